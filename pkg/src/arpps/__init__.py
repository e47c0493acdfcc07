"""Desk-scale underground-pipeline AR stack.

Synthetic pipe networks served over HTTP, camera geometry with
plane-induced homographies, chaotic-network feature matching, sensor
stream filtering, dead-reckoning pose tracking, and trench-sectioning
overlay frames for a browser viewer.
"""

__version__ = "0.1.0"

from .camera import (
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
from .filtering import FilterParams, FilterState, Vec3Sample, filter_stream
from .geodesy import BBox, EnuPoint, GeoPoint, bbox_from_fix, enu_from_geo, geo_from_enu
from .overlay import OverlayFrame, TrenchSpec, Viewport, build_trench, render_frame, serialize_frame
from .pipe_model import NetworkSpec, PipeCategory, PipeLine, PipePoint, generate_network
from .service import serve
from .store import FeatureId, FeatureKind, SpatialStore
from .tcnn import MatchProblem, TcnnParams, brute_force_match, run_matching
from .tracking import (
    NoiseSpec,
    SensorFrame,
    TrackedPose,
    TrajectorySpec,
    simulate_trajectory,
    track,
)

__all__ = [
    "BBox",
    "BehindCameraError",
    "CameraIntrinsics",
    "EnuPoint",
    "FeatureId",
    "FeatureKind",
    "FilterParams",
    "FilterState",
    "GeoPoint",
    "Homography",
    "MatchProblem",
    "NetworkSpec",
    "NoiseSpec",
    "OverlayFrame",
    "PipeCategory",
    "PipeLine",
    "PipePoint",
    "PlaneCoords",
    "Pose",
    "SensorFrame",
    "SpatialStore",
    "TcnnParams",
    "TrackedPose",
    "TrajectorySpec",
    "TrenchSpec",
    "Vec3Sample",
    "Viewport",
    "apply_homography",
    "bbox_from_fix",
    "brute_force_match",
    "build_trench",
    "enu_from_geo",
    "filter_stream",
    "generate_network",
    "geo_from_enu",
    "plane_homography",
    "project",
    "render_frame",
    "rotation_homography",
    "run_matching",
    "serialize_frame",
    "serve",
    "simulate_trajectory",
    "track",
]
