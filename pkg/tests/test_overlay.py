"""Overlay rendering: trench geometry, projection against an independent
oracle, painter ordering, and the canonical frame interchange format."""

import json
import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from arpps.camera import CameraIntrinsics
from arpps.geodesy import GeoPoint, bbox_from_fix, enu_from_geo
from arpps.overlay import (
    ARC_SEGMENTS,
    CAMERA_FROM_BODY,
    CIRCULAR,
    DEPTH_MARGIN_M,
    MARKER_COLOR,
    PALETTE,
    RECTANGULAR,
    TRENCH_FLOOR_COLOR,
    TRENCH_WALL_COLOR,
    TrenchSpec,
    Viewport,
    build_trench,
    camera_pose,
    emit_svg,
    parse_frame,
    render_frame,
    serialize_frame,
)
from arpps.overlay import _tube_rings
from arpps.pipe_model import PipeCategory
from arpps.store import FeatureKind, SpatialStore
from arpps.tracking import TrackedPose, quat_from_heading, quat_from_rotvec, quat_multiply

K = CameraIntrinsics(fx=1000.0, fy=1000.0, cx=640.0, cy=360.0)


def make_pose(fix: GeoPoint, heading: float = 0.0, pitch: float = 0.0,
              r: float = 10.0) -> TrackedPose:
    q = quat_from_heading(heading)
    if pitch:
        q = quat_multiply(q, quat_from_rotvec(np.array([0.0, math.radians(pitch), 0.0])))
    return TrackedPose(position=fix, orientation=q, load_bbox=bbox_from_fix(fix, r))


def oracle_project(pose: TrackedPose, enu: np.ndarray) -> tuple[float, float, float]:
    """Independent pinhole projection of an ENU-about-pose point."""
    w, x, y, z = pose.orientation
    r_be = Rotation.from_quat([x, y, z, w]).as_matrix()
    cam = CAMERA_FROM_BODY @ r_be.T @ np.asarray(enu, dtype=np.float64)
    u = K.fx * cam[0] / cam[2] + K.cx
    v = K.fy * cam[1] / cam[2] + K.cy
    return u, v, cam[2]


# ---------------------------------------------------------------------------
# palette

def test_palette_covers_every_category():
    assert set(PALETTE) == {c.code for c in PipeCategory}
    for rgb in PALETTE.values():
        assert len(rgb) == 3
        assert all(0.0 <= ch <= 1.0 for ch in rgb)


def test_trench_translucent_marker_opaque():
    assert TRENCH_WALL_COLOR[3] < 1.0
    assert TRENCH_FLOOR_COLOR[3] < 1.0
    assert MARKER_COLOR[3] == 1.0


# ---------------------------------------------------------------------------
# trench meshes

def test_trench_spec_validation():
    with pytest.raises(ValueError):
        TrenchSpec(mode="Octagon")
    with pytest.raises(ValueError):
        TrenchSpec(size=0.0)
    with pytest.raises(ValueError):
        TrenchSpec(depth=-1.0)
    spec = TrenchSpec()
    assert spec.mode == RECTANGULAR and spec.size == 4.0 and spec.depth is None


def test_rectangular_trench_mesh():
    pose = make_pose(GeoPoint(10.0, 20.0, 51.5))
    spec = TrenchSpec(mode=RECTANGULAR, size=4.0, depth=2.0, ground_elevation=50.0)
    faces = build_trench(spec, pose)
    kinds = [f.kind for f in faces]
    assert kinds.count("trench_wall") == 4
    assert kinds.count("trench_floor") == 1
    z_top = 50.0 - 51.5
    for f in faces:
        v = f.vertices
        assert np.all(v[:, 2] <= z_top + 1e-12)
        assert np.all(np.abs(v[:, :2]) <= 2.0 + 1e-12)
        if f.kind == "trench_floor":
            assert np.allclose(v[:, 2], z_top - 2.0, atol=1e-12)
    corners = np.vstack([f.vertices[:, :2] for f in faces])
    assert np.isclose(np.abs(corners).max(), 2.0)


def test_circular_trench_mesh():
    pose = make_pose(GeoPoint(0.0, 0.0, 1.5), heading=0.0)
    spec = TrenchSpec(mode=CIRCULAR, size=3.0, depth=1.5, ground_elevation=0.0)
    faces = build_trench(spec, pose)
    kinds = [f.kind for f in faces]
    assert kinds.count("trench_wall") == ARC_SEGMENTS + 1
    assert kinds.count("trench_floor") == 1
    for f in faces:
        v = f.vertices
        radii = np.hypot(v[:, 0], v[:, 1])
        assert np.all(radii <= 3.0 + 1e-9)
        # heading 0 opens the half-disc northwards
        assert np.all(v[:, 1] >= -1e-9)
    arc = [f for f in faces if f.kind == "trench_wall"][:ARC_SEGMENTS]
    rim = np.vstack([f.vertices for f in arc])
    outer = np.hypot(rim[:, 0], rim[:, 1])
    assert np.isclose(outer.max(), 3.0)


def test_circular_trench_follows_heading():
    pose = make_pose(GeoPoint(0.0, 0.0, 1.5), heading=90.0)
    faces = build_trench(TrenchSpec(mode=CIRCULAR, size=2.0, depth=1.0), pose)
    for f in faces:
        # heading 90 opens eastwards
        assert np.all(f.vertices[:, 0] >= -1e-9)


@pytest.mark.parametrize("mode", [RECTANGULAR, CIRCULAR])
@pytest.mark.parametrize("alt_above", [0.2, 1.5, 3.0])
def test_trench_never_exceeds_ground(mode, alt_above):
    ground = 47.0
    pose = make_pose(GeoPoint(5.0, 5.0, ground + alt_above), heading=222.0)
    spec = TrenchSpec(mode=mode, size=5.0, depth=2.5, ground_elevation=ground)
    for f in build_trench(spec, pose):
        assert np.all(f.vertices[:, 2] <= (ground - pose.position.alt) + 1e-12)


# ---------------------------------------------------------------------------
# camera model

def test_point_ahead_projects_to_principal_point():
    pose = make_pose(GeoPoint(0.0, 0.0, 1.5), heading=0.0)
    cam = camera_pose(pose)
    px = cam.r @ np.array([0.0, 5.0, 0.0])
    assert np.allclose(px, [0.0, 0.0, 5.0], atol=1e-12)


def test_image_axes_orientation():
    pose = make_pose(GeoPoint(0.0, 0.0, 1.5), heading=0.0)
    cam = camera_pose(pose)
    east = cam.r @ np.array([1.0, 5.0, 0.0])
    above = cam.r @ np.array([0.0, 5.0, 1.0])
    assert east[0] > 0.0       # east of a north-facing camera is image right
    assert above[1] < 0.0      # above is image up, towards smaller y


def test_pitch_down_sees_the_ground():
    pose = make_pose(GeoPoint(0.0, 0.0, 1.5), heading=0.0, pitch=90.0)
    cam = camera_pose(pose)
    below = cam.r @ np.array([0.0, 0.0, -2.0])
    assert np.allclose(below, [0.0, 0.0, 2.0], atol=1e-12)


def test_tube_rings_shape_and_radius():
    rings = _tube_rings(np.array([0.0, 0.0, 0.0]), np.array([4.0, 0.0, 0.0]), 0.1, 8)
    assert rings.shape == (16, 3)
    for p in rings:
        end = np.array([0.0, 0.0, 0.0]) if p[0] < 2.0 else np.array([4.0, 0.0, 0.0])
        assert np.isclose(np.linalg.norm(p - end), 0.1)


# ---------------------------------------------------------------------------
# rendering

@pytest.fixture(scope="module")
def loaded_store(small_network):
    points, lines = small_network
    return SpatialStore(points, lines)


@pytest.fixture(scope="module")
def scene_pose(loaded_store):
    center = GeoPoint(116.0, 40.0, 51.5)
    return make_pose(center, heading=0.0, pitch=45.0, r=60.0)


def test_empty_store_still_shows_trench():
    store = SpatialStore([], [])
    pose = make_pose(GeoPoint(0.0, 0.0, 1.5), pitch=60.0)
    frame = render_frame(store, pose, K, TrenchSpec(depth=2.0))
    kinds = {p.kind for p in frame.primitives}
    assert kinds == {"trench_wall", "trench_floor"}
    assert len(frame.primitives) == 5


def test_frame_is_depth_sorted(loaded_store, scene_pose):
    frame = render_frame(loaded_store, scene_pose, K,
                         TrenchSpec(ground_elevation=50.0))
    depths = [p.depth for p in frame.primitives]
    assert depths == sorted(depths, reverse=True)
    keys = [(-p.depth, p.kind, p.feature_id or "") for p in frame.primitives]
    assert keys == sorted(keys)


def test_pipe_vertices_match_projection_oracle(loaded_store, scene_pose):
    frame = render_frame(loaded_store, scene_pose, K,
                         TrenchSpec(ground_elevation=50.0))
    tubes = {p.feature_id: p for p in frame.primitives if p.kind == "pipe_tube"}
    assert tubes
    origin = scene_pose.position
    checked = 0
    for fid in loaded_store.query_bbox(scene_pose.load_bbox):
        if fid.kind != FeatureKind.LINE:
            continue
        ln = loaded_store.lines[fid.object_id]
        s = enu_from_geo(origin, GeoPoint(ln.start_x, ln.start_y,
                                          ln.start_elevation - ln.start_depth))
        e = enu_from_geo(origin, GeoPoint(ln.end_x, ln.end_y,
                                          ln.end_elevation - ln.end_depth))
        rings = _tube_rings(np.array([s.e, s.n, s.u]), np.array([e.e, e.n, e.u]),
                            ln.diameter / 2000.0, 8)
        expect = [oracle_project(scene_pose, v) for v in rings]
        prim = tubes.get(f"line-{ln.object_id}")
        if any(depth <= 0.0 for _, _, depth in expect):
            assert prim is None     # behind-camera faces are dropped whole
            continue
        assert prim is not None
        for (u, v, _), got in zip(expect, prim.vertices):
            assert abs(u - got[0]) <= 1e-9
            assert abs(v - got[1]) <= 1e-9
        checked += 1
    assert checked > 0


def test_marker_color_and_ids(loaded_store, scene_pose):
    frame = render_frame(loaded_store, scene_pose, K,
                         TrenchSpec(ground_elevation=50.0))
    for p in frame.primitives:
        if p.kind == "point_marker":
            assert p.color == MARKER_COLOR
            assert p.feature_id.startswith("point-")
        elif p.kind == "pipe_tube":
            assert p.category in PALETTE
            assert p.feature_id.startswith("line-")
        else:
            assert p.feature_id is None


def test_auto_depth_matches_explicit(loaded_store, scene_pose):
    deepest = max(max(ln.start_depth, ln.end_depth)
                  for fid in loaded_store.query_bbox(scene_pose.load_bbox)
                  if fid.kind == FeatureKind.LINE
                  for ln in [loaded_store.lines[fid.object_id]])
    auto = render_frame(loaded_store, scene_pose, K,
                        TrenchSpec(ground_elevation=50.0))
    fixed = render_frame(loaded_store, scene_pose, K,
                         TrenchSpec(ground_elevation=50.0,
                                    depth=deepest + DEPTH_MARGIN_M))
    assert serialize_frame(auto) == serialize_frame(fixed)


# ---------------------------------------------------------------------------
# interchange format

def test_serialize_parse_serialize_byte_stable(loaded_store, scene_pose):
    frame = render_frame(loaded_store, scene_pose, K,
                         TrenchSpec(ground_elevation=50.0))
    text = serialize_frame(frame)
    again = serialize_frame(parse_frame(text))
    assert text.encode() == again.encode()


def test_serialized_form_is_canonical(loaded_store, scene_pose):
    frame = render_frame(loaded_store, scene_pose, K,
                         TrenchSpec(ground_elevation=50.0))
    a = serialize_frame(frame)
    b = serialize_frame(render_frame(loaded_store, scene_pose, K,
                                     TrenchSpec(ground_elevation=50.0)))
    assert a == b
    assert ": " not in a and ", " not in a


def test_serialized_structure(loaded_store, scene_pose):
    frame = render_frame(loaded_store, scene_pose, K,
                         TrenchSpec(ground_elevation=50.0))
    doc = json.loads(serialize_frame(frame))
    assert doc["viewport"] == {"width": 1280, "height": 720}
    assert len(doc["primitives"]) == len(frame.primitives)
    for prim in doc["primitives"]:
        assert set(prim) == {"kind", "vertices", "depth", "color",
                             "category", "feature_id", "clipped"}
        assert len(prim["color"]) == 4
        for vertex in prim["vertices"]:
            assert len(vertex) == 2
            assert all(isinstance(c, float) for c in vertex)


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_frame("not json")
    with pytest.raises(ValueError):
        parse_frame(json.dumps({"viewport": {"width": 10, "height": 10}}))


def test_svg_emission(loaded_store, scene_pose):
    frame = render_frame(loaded_store, scene_pose, K,
                         TrenchSpec(ground_elevation=50.0))
    svg = emit_svg(frame)
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    assert 'width="1280"' in svg
    assert "<polygon" in svg
