"""Pinhole camera model and plane/rotation induced homographies.

Conventions (locked by the transfer-error tests):
  * camera frame: x right, y down, z forward; a point is visible when its
    camera-frame z is strictly positive.
  * a relative Pose (R, t) maps frame-j coordinates into frame-i
    coordinates, X_i = R @ X_j + t; the inducing plane n.X + d = 0 is
    expressed in frame j.
  * homographies are compared after scaling so the largest-magnitude
    entry equals +1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORTHONORMAL_TOL = 1e-9


class BehindCameraError(ValueError):
    pass


@dataclass(frozen=True)
class CameraIntrinsics:
    """Zero-skew pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        if self.fx <= 0.0 or self.fy <= 0.0:
            raise ValueError(f"focal lengths must be positive: fx={self.fx}, fy={self.fy}")

    @property
    def k(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])

    @property
    def k_inv(self) -> np.ndarray:
        return np.array([[1.0 / self.fx, 0.0, -self.cx / self.fx],
                         [0.0, 1.0 / self.fy, -self.cy / self.fy],
                         [0.0, 0.0, 1.0]])


def check_rotation(r: np.ndarray) -> np.ndarray:
    """Validate a proper rotation matrix; never repairs silently."""
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {r.shape}")
    if not np.allclose(r.T @ r, np.eye(3), atol=ORTHONORMAL_TOL, rtol=0.0):
        raise ValueError("rotation matrix is not orthonormal within 1e-9")
    if abs(np.linalg.det(r) - 1.0) > ORTHONORMAL_TOL:
        raise ValueError(f"rotation determinant {np.linalg.det(r)} is not +1 within 1e-9")
    return r


@dataclass(frozen=True)
class Pose:
    """Rigid transform: X_out = r @ X_in + t, translation in metres."""

    r: np.ndarray
    t: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", check_rotation(self.r))
        t = np.asarray(self.t, dtype=np.float64).reshape(3)
        object.__setattr__(self, "t", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))


@dataclass(frozen=True)
class PlaneCoords:
    """Plane n.X + d = 0 with unit normal."""

    n: np.ndarray
    d: float

    def __post_init__(self) -> None:
        n = np.asarray(self.n, dtype=np.float64).reshape(3)
        norm = float(np.linalg.norm(n))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"plane normal must be unit length, got |n|={norm}")
        object.__setattr__(self, "n", n)

    @classmethod
    def from_any(cls, n, d: float) -> "PlaneCoords":
        """Normalize an arbitrary (n, d) description of the same plane."""
        n = np.asarray(n, dtype=np.float64).reshape(3)
        norm = float(np.linalg.norm(n))
        if norm == 0.0:
            raise ValueError("plane normal must be nonzero")
        return cls(n / norm, d / norm)


@dataclass(frozen=True)
class Homography:
    """3x3 projective map, stored normalized (largest |entry| -> +1)."""

    h: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=np.float64)
        if h.shape != (3, 3):
            raise ValueError(f"homography must be 3x3, got {h.shape}")
        # scale-invariant rank check: intrinsics make raw determinants
        # arbitrarily small without the map being singular
        s = np.linalg.svd(h, compute_uv=False)
        if s[2] <= s[0] * 1e-12:
            raise ValueError("homography is singular")
        flat = h.reshape(-1)
        pivot = flat[np.argmax(np.abs(flat))]
        object.__setattr__(self, "h", h / pivot)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.h))


def project(k: CameraIntrinsics, pose: Pose, x) -> np.ndarray:
    """World point -> pixel; raises BehindCameraError for depth <= 0."""
    x = np.asarray(x, dtype=np.float64).reshape(3)
    cam = pose.r @ x + pose.t
    if cam[2] <= 0.0:
        raise BehindCameraError(f"point has non-positive camera depth {cam[2]}")
    return np.array([k.fx * cam[0] / cam[2] + k.cx,
                     k.fy * cam[1] / cam[2] + k.cy])


def plane_homography(k_i: CameraIntrinsics, k_j: CameraIntrinsics,
                     pose_rel: Pose, plane: PlaneCoords) -> Homography:
    """Homography induced by a plane: K_i (R - t n^T / d) K_j^{-1}."""
    if plane.d == 0.0:
        raise ValueError("plane passes through the reference camera centre (d = 0)")
    core = pose_rel.r - np.outer(pose_rel.t, plane.n) / plane.d
    return Homography(k_i.k @ core @ k_j.k_inv)


def rotation_homography(k_i: CameraIntrinsics, k_j: CameraIntrinsics,
                        r_i, r_j) -> Homography:
    """Homography for a camera rotating about its optical centre: K_i R_i R_j^T K_j^{-1}."""
    r_i = check_rotation(r_i)
    r_j = check_rotation(r_j)
    return Homography(k_i.k @ r_i @ r_j.T @ k_j.k_inv)


def apply_homography(h: Homography, pixel) -> np.ndarray:
    """Map a pixel through h; raises when the image lies at infinity."""
    u, v = float(pixel[0]), float(pixel[1])
    mapped = h.h @ np.array([u, v, 1.0])
    if abs(mapped[2]) < 1e-12:
        raise ValueError(f"pixel ({u}, {v}) maps to infinity")
    return mapped[:2] / mapped[2]
