"""Pinhole and homography geometry.

Random rotations come from scipy's Rotation, used here purely as a
reference oracle; the package itself never depends on it.
"""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from arpps.camera import (
    BehindCameraError,
    CameraIntrinsics,
    Homography,
    PlaneCoords,
    Pose,
    apply_homography,
    plane_homography,
    project,
    rotation_homography,
)

K = CameraIntrinsics(fx=800.0, fy=820.0, cx=320.0, cy=240.0)


def rand_rotation(rng):
    return Rotation.random(random_state=int(rng.integers(0, 2**31))).as_matrix()


def rand_scene(rng):
    """Camera j at origin looking at a plane anchored in front of it;
    camera i is a small displaced/rotated neighbour."""
    rotvec = rng.uniform(-0.2, 0.2, size=3)
    r = Rotation.from_rotvec(rotvec).as_matrix()
    t = rng.uniform(-0.5, 0.5, size=3)
    anchor = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(3.0, 6.0)])
    n = rng.normal(size=3)
    n[2] = np.sign(n[2] or 1.0) * max(abs(n[2]), 1.0)   # keep the plane facing z
    n /= np.linalg.norm(n)
    d = float(-n @ anchor)
    return Pose(r, t), PlaneCoords(n, d), anchor


def plane_points(plane, anchor, rng, count=25):
    """Points on the plane near its anchor, all at positive depth."""
    n = plane.n
    basis = np.eye(3)[np.argmin(np.abs(n))]
    u = np.cross(n, basis)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    pts = []
    for _ in range(10 * count):
        a, b = rng.uniform(-1.5, 1.5, size=2)
        p = anchor + a * u + b * v
        if p[2] > 0.5:
            pts.append(p)
            if len(pts) == count:
                break
    assert len(pts) >= 5, "degenerate scene"
    return pts


def test_axis_point_hits_principal_point():
    px = project(K, Pose.identity(), [0.0, 0.0, 5.0])
    assert px == pytest.approx([K.cx, K.cy])


def test_zero_depth_rejected():
    with pytest.raises(BehindCameraError):
        project(K, Pose.identity(), [0.0, 0.0, 0.0])
    with pytest.raises(BehindCameraError):
        project(K, Pose.identity(), [1.0, 1.0, -2.0])


def test_backprojected_ray_passes_through_point():
    rng = np.random.default_rng(0)
    for _ in range(50):
        pose = Pose(rand_rotation(rng), rng.uniform(-1, 1, size=3))
        x = rng.uniform(-3, 3, size=3)
        cam = pose.r @ x + pose.t
        if cam[2] <= 0.1:
            continue
        u, v = project(K, pose, x)
        ray_cam = K.k_inv @ np.array([u, v, 1.0])
        recon = pose.r.T @ (ray_cam * cam[2] - pose.t)
        assert np.linalg.norm(recon - x) < 1e-9


def test_pose_validation_strict():
    with pytest.raises(ValueError):
        Pose(np.eye(3) * 1.001, np.zeros(3))
    flip = np.diag([1.0, 1.0, -1.0])
    with pytest.raises(ValueError):
        Pose(flip, np.zeros(3))


def test_intrinsics_validation():
    with pytest.raises(ValueError):
        CameraIntrinsics(fx=0.0, fy=1.0, cx=0.0, cy=0.0)
    assert np.allclose(K.k @ K.k_inv, np.eye(3), atol=1e-12)


def test_plane_homography_identity_case():
    h = plane_homography(K, K, Pose.identity(), PlaneCoords([0.0, 0.0, 1.0], -5.0))
    assert np.allclose(h.h, np.eye(3), atol=1e-12)


def test_plane_through_center_rejected():
    with pytest.raises(ValueError):
        plane_homography(K, K, Pose.identity(), PlaneCoords.from_any([0, 0, 1], 0.0))


def test_plane_transfer_twenty_scenes():
    rng = np.random.default_rng(4)
    k_i = CameraIntrinsics(fx=750.0, fy=760.0, cx=310.0, cy=250.0)
    worst = 0.0
    for _ in range(20):
        pose, plane, anchor = rand_scene(rng)
        h = plane_homography(k_i, K, pose, plane)
        for x_j in plane_points(plane, anchor, rng):
            x_i = pose.r @ x_j + pose.t
            if x_i[2] <= 0.0:
                continue
            px_j = project(K, Pose.identity(), x_j)
            px_i = project(k_i, Pose.identity(), x_i)
            err = np.linalg.norm(apply_homography(h, px_j) - px_i)
            worst = max(worst, err)
    assert worst <= 1e-6


def test_rotation_homography_identity():
    r = rand_rotation(np.random.default_rng(9))
    h = rotation_homography(K, K, r, r)
    assert np.allclose(h.h, np.eye(3), atol=1e-12)


def test_rotation_composition_chain():
    rng = np.random.default_rng(11)
    for _ in range(25):
        r1, r2, r3 = (rand_rotation(rng) for _ in range(3))
        h12 = rotation_homography(K, K, r1, r2)
        h23 = rotation_homography(K, K, r2, r3)
        h13 = rotation_homography(K, K, r1, r3)
        composed = Homography(h12.h @ h23.h)
        assert np.allclose(composed.h, h13.h, atol=1e-9)


def test_ninety_degree_roll_rotates_offsets():
    k0 = CameraIntrinsics(fx=500.0, fy=500.0, cx=0.0, cy=0.0)
    roll = Rotation.from_euler("z", 90, degrees=True).as_matrix()
    h = rotation_homography(k0, k0, roll, np.eye(3))
    for u, v in [(10.0, 0.0), (0.0, 10.0), (7.0, -3.0)]:
        got = apply_homography(h, [u, v])
        want = roll[:2, :2] @ np.array([u, v])
        assert np.allclose(got, want, atol=1e-9)


def test_zero_translation_reduces_to_rotation_form():
    """Plane formula with t=0 must equal the pure-rotation formula."""
    rng = np.random.default_rng(13)
    for _ in range(25):
        r = rand_rotation(rng)
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        plane = PlaneCoords(n, float(rng.uniform(1.0, 5.0)))
        h4 = plane_homography(K, K, Pose(r, np.zeros(3)), plane)
        h5 = rotation_homography(K, K, r, np.eye(3))
        assert np.allclose(h4.h, h5.h, atol=1e-12)


def test_apply_identity_fixed_point():
    h = Homography(np.eye(3))
    assert apply_homography(h, [11.0, 22.0]) == pytest.approx([11.0, 22.0])


def test_scale_invariance():
    rng = np.random.default_rng(15)
    m = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    a = Homography(m)
    b = Homography(7.0 * m)
    assert np.allclose(a.h, b.h, atol=1e-15)
    assert apply_homography(a, [5.0, 6.0]) == pytest.approx(
        apply_homography(b, [5.0, 6.0]), abs=1e-12)


def test_inverse_round_trip():
    rng = np.random.default_rng(17)
    for _ in range(20):
        r1, r2 = rand_rotation(rng), rand_rotation(rng)
        h = rotation_homography(K, K, r1, r2)
        p = rng.uniform(0, 640, size=2)
        back = apply_homography(h.inverse(), apply_homography(h, p))
        assert np.allclose(back, p, atol=1e-9)


def test_normalization_pins_largest_entry():
    h = rotation_homography(K, K, rand_rotation(np.random.default_rng(19)), np.eye(3))
    flat = h.h.reshape(-1)
    assert flat[np.argmax(np.abs(flat))] == pytest.approx(1.0)


def test_singular_matrix_rejected():
    with pytest.raises(ValueError):
        Homography(np.zeros((3, 3)))


def test_map_to_infinity_rejected():
    # perspective map whose horizon line is u = 5
    h = Homography(np.array([[1.0, 0.0, 0.0],
                             [0.0, 1.0, 0.0],
                             [1.0, 0.0, -5.0]]))
    with pytest.raises(ValueError):
        apply_homography(h, [5.0, 3.0])
    assert np.all(np.isfinite(apply_homography(h, [6.0, 3.0])))
