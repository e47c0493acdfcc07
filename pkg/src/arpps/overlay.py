"""Trench-sectioning overlay: virtual excavation geometry plus projected
pipe primitives, emitted as depth-sorted draw lists.

The painter's algorithm stands in for GPU alpha blending: primitives are
sorted back-to-front on their mean camera depth and the viewer composites
them in order. Trench faces carry alpha < 1 so the ground reads as a
translucent cut; pipes are opaque and colored by category.

All geometry is built in the ENU frame anchored at the pose position
(camera at the origin, including altitude); elevations in feature data
are absolute and get rebased by the camera altitude on conversion.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .camera import CameraIntrinsics, Pose, project
from .geodesy import GeoPoint, enu_from_geo
from .pipe_model import PipeCategory
from .store import FeatureKind, SpatialStore
from .tracking import TrackedPose, heading_of

# camera mount: camera x right = -body y, y down = -body z, z forward = body x
CAMERA_FROM_BODY = np.array([
    [0.0, -1.0, 0.0],
    [0.0, 0.0, -1.0],
    [1.0, 0.0, 0.0],
])

RECTANGULAR = "RectangularAllSight"
CIRCULAR = "CircularFrontSight180"

DEFAULT_TRENCH_SIZE_M = 4.0
DEPTH_MARGIN_M = 1.0        # auto trench depth: deepest queried pipe plus this
ARC_SEGMENTS = 16           # half-circle tessellation for the circular trench

TRENCH_WALL_COLOR = (0.45, 0.32, 0.18, 0.45)
TRENCH_FLOOR_COLOR = (0.30, 0.21, 0.12, 0.45)
MARKER_COLOR = (0.15, 0.15, 0.15, 1.0)

# fixed category palette, RGB in [0, 1]; alpha is always 1 for pipes
PALETTE: dict[str, tuple[float, float, float]] = {
    "CoveredChannel": (0.55, 0.27, 0.07),
    "Communication": (1.00, 0.55, 0.00),
    "FeedWater": (0.05, 0.25, 0.85),
    "HotWater": (0.80, 0.20, 0.55),
    "Integrated": (0.25, 0.70, 0.70),
    "MonitoringSignal": (0.45, 0.45, 0.45),
    "NaturalGas": (0.95, 0.85, 0.10),
    "PowerLineCarrier": (0.60, 0.30, 0.70),
    "PowerSupply": (0.90, 0.10, 0.10),
    "Rainwater": (0.35, 0.55, 0.95),
    "ReclaimedWater": (0.60, 0.60, 0.30),
    "Sewage": (0.40, 0.25, 0.10),
    "StreetLamp": (0.95, 0.60, 0.75),
}


@dataclass(frozen=True)
class TrenchSpec:
    """Virtual excavation parameters.

    size is the rectangle side length or the sector radius depending on
    mode; depth=None resolves at render time to the deepest queried pipe
    plus DEPTH_MARGIN_M.
    """

    mode: str = RECTANGULAR
    size: float = DEFAULT_TRENCH_SIZE_M
    depth: float | None = None
    ground_elevation: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in (RECTANGULAR, CIRCULAR):
            raise ValueError(f"unknown trench mode {self.mode!r}")
        if self.size <= 0.0:
            raise ValueError(f"trench size must be positive, got {self.size}")
        if self.depth is not None and self.depth <= 0.0:
            raise ValueError(f"trench depth must be positive, got {self.depth}")
        if not math.isfinite(self.ground_elevation):
            raise ValueError("ground elevation must be finite")


@dataclass(frozen=True)
class TrenchFace:
    kind: str                   # trench_wall | trench_floor
    vertices: np.ndarray        # (n, 3) ENU


@dataclass(frozen=True)
class Viewport:
    width: int = 1280
    height: int = 720

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("viewport dimensions must be positive")


@dataclass(frozen=True)
class Primitive:
    kind: str                   # trench_wall | trench_floor | pipe_tube | point_marker
    vertices: list[list[float]]
    depth: float                # mean camera-frame depth, the sort key
    color: tuple[float, float, float, float]
    category: str | None = None
    feature_id: str | None = None
    clipped: bool = False


@dataclass(frozen=True)
class OverlayFrame:
    viewport: Viewport
    primitives: list[Primitive] = field(default_factory=list)


def camera_pose(pose: TrackedPose) -> Pose:
    """ENU-to-camera extrinsics for a tracked pose (camera at ENU origin)."""
    w, x, y, z = pose.orientation
    r_be = np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
    return Pose(r=CAMERA_FROM_BODY @ r_be.T, t=np.zeros(3))


def build_trench(spec: TrenchSpec, pose: TrackedPose) -> list[TrenchFace]:
    """Excavation mesh in ENU about the pose position.

    Rectangular: an open-topped box of side spec.size centred on the
    camera ground point. Circular: a half-cylinder sector of radius
    spec.size spanning heading +-90 degrees, ahead of the camera.
    """
    if spec.depth is None:
        raise ValueError("trench depth unresolved; pass an explicit depth")
    z_top = spec.ground_elevation - pose.position.alt
    z_bot = z_top - spec.depth
    faces: list[TrenchFace] = []

    def wall(a, b):
        faces.append(TrenchFace("trench_wall", np.array([
            [a[0], a[1], z_top], [b[0], b[1], z_top],
            [b[0], b[1], z_bot], [a[0], a[1], z_bot],
        ])))

    if spec.mode == RECTANGULAR:
        h = spec.size / 2.0
        corners = [(-h, -h), (h, -h), (h, h), (-h, h)]
        for a, b in zip(corners, corners[1:] + corners[:1]):
            wall(a, b)
        faces.append(TrenchFace("trench_floor", np.array(
            [[e, n, z_bot] for e, n in corners])))
    else:
        yaw = math.radians(90.0 - heading_of(pose.orientation))
        angles = [yaw - math.pi / 2.0 + i * math.pi / ARC_SEGMENTS
                  for i in range(ARC_SEGMENTS + 1)]
        arc = [(spec.size * math.cos(a), spec.size * math.sin(a)) for a in angles]
        for a, b in zip(arc, arc[1:]):
            wall(a, b)
        wall(arc[-1], arc[0])   # flat diameter wall closing the sector
        faces.append(TrenchFace("trench_floor", np.array(
            [[e, n, z_bot] for e, n in arc])))
    return faces


def _tube_rings(start: np.ndarray, end: np.ndarray, radius: float,
                sides: int) -> np.ndarray:
    """Two rings of prism vertices around the segment axis, (2*sides, 3)."""
    axis = end - start
    norm = float(np.linalg.norm(axis))
    axis = axis / norm if norm > 0.0 else np.array([1.0, 0.0, 0.0])
    ref = np.array([0.0, 0.0, 1.0])
    if abs(float(np.dot(axis, ref))) > 0.99:
        ref = np.array([0.0, 1.0, 0.0])
    u = np.cross(axis, ref)
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    ring = [radius * (u * math.cos(2.0 * math.pi * i / sides)
                      + v * math.sin(2.0 * math.pi * i / sides))
            for i in range(sides)]
    return np.array([start + r for r in ring] + [end + r for r in ring])


def _project_face(vertices: np.ndarray, cam: Pose, k: CameraIntrinsics,
                  viewport: Viewport) -> tuple[list[list[float]], float, bool] | None:
    """Project one face; None when any vertex is at or behind the camera."""
    depths = []
    pixels = []
    clipped = False
    for vtx in vertices:
        c = cam.r @ vtx + cam.t
        if c[2] <= 0.0:
            return None
        depths.append(float(c[2]))
        px = project(k, cam, vtx)
        if not (0.0 <= px[0] <= viewport.width and 0.0 <= px[1] <= viewport.height):
            clipped = True
        pixels.append([float(px[0]), float(px[1])])
    return pixels, sum(depths) / len(depths), clipped


def render_frame(store: SpatialStore, pose: TrackedPose, k: CameraIntrinsics,
                 trench: TrenchSpec, viewport: Viewport | None = None,
                 tube_sides: int = 8) -> OverlayFrame:
    """Query, convert, project and depth-sort everything visible.

    Features come from query_bbox(pose.load_bbox); every queried pipe
    yields a primitive unless it lies behind the camera. An empty query
    still produces the trench.
    """
    viewport = viewport or Viewport()
    origin = pose.position
    cam = camera_pose(pose)
    prims: list[Primitive] = []

    ids = sorted(store.query_bbox(pose.load_bbox))
    deepest = 0.0
    for fid in ids:
        if fid.kind == FeatureKind.LINE:
            ln = store.lines[fid.object_id]
            deepest = max(deepest, ln.start_depth, ln.end_depth)
    spec = trench if trench.depth is not None else replace(
        trench, depth=deepest + DEPTH_MARGIN_M)

    for face in build_trench(spec, pose):
        hit = _project_face(face.vertices, cam, k, viewport)
        if hit is None:
            continue
        pixels, depth, clipped = hit
        color = TRENCH_FLOOR_COLOR if face.kind == "trench_floor" else TRENCH_WALL_COLOR
        prims.append(Primitive(kind=face.kind, vertices=pixels, depth=depth,
                               color=color, clipped=clipped))

    for fid in ids:
        if fid.kind == FeatureKind.POINT:
            p = store.points[fid.object_id]
            enu = enu_from_geo(origin, GeoPoint(p.x, p.y, p.ground_elevation))
            hit = _project_face(np.array([[enu.e, enu.n, enu.u]]), cam, k, viewport)
            if hit is None:
                continue
            pixels, depth, clipped = hit
            prims.append(Primitive(kind="point_marker", vertices=pixels, depth=depth,
                                   color=MARKER_COLOR, feature_id=f"point-{p.object_id}",
                                   clipped=clipped))
        else:
            ln = store.lines[fid.object_id]
            s = enu_from_geo(origin, GeoPoint(ln.start_x, ln.start_y,
                                              ln.start_elevation - ln.start_depth))
            e = enu_from_geo(origin, GeoPoint(ln.end_x, ln.end_y,
                                              ln.end_elevation - ln.end_depth))
            rings = _tube_rings(np.array([s.e, s.n, s.u]), np.array([e.e, e.n, e.u]),
                                ln.diameter / 2000.0, tube_sides)
            hit = _project_face(rings, cam, k, viewport)
            if hit is None:
                continue
            pixels, depth, clipped = hit
            rgb = PALETTE[ln.line_type.code]
            prims.append(Primitive(kind="pipe_tube", vertices=pixels, depth=depth,
                                   color=(*rgb, 1.0), category=ln.line_type.code,
                                   feature_id=f"line-{ln.object_id}", clipped=clipped))

    prims.sort(key=lambda p: (-p.depth, p.kind, p.feature_id or ""))
    return OverlayFrame(viewport=viewport, primitives=prims)


# ---------------------------------------------------------------------------
# frame interchange

def serialize_frame(frame: OverlayFrame) -> str:
    doc = {
        "viewport": {"width": frame.viewport.width, "height": frame.viewport.height},
        "primitives": [
            {
                "kind": p.kind,
                "vertices": p.vertices,
                "depth": p.depth,
                "color": list(p.color),
                "category": p.category,
                "feature_id": p.feature_id,
                "clipped": p.clipped,
            }
            for p in frame.primitives
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def parse_frame(text: str) -> OverlayFrame:
    try:
        doc = json.loads(text)
        vp = Viewport(width=doc["viewport"]["width"], height=doc["viewport"]["height"])
        prims = [
            Primitive(
                kind=p["kind"],
                vertices=[[float(x), float(y)] for x, y in p["vertices"]],
                depth=float(p["depth"]),
                color=tuple(p["color"]),
                category=p["category"],
                feature_id=p["feature_id"],
                clipped=bool(p["clipped"]),
            )
            for p in doc["primitives"]
        ]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed overlay frame: {exc}") from exc
    return OverlayFrame(viewport=vp, primitives=prims)


def emit_svg(frame: OverlayFrame) -> str:
    """Quick-look SVG of a frame in draw-list order."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{frame.viewport.width}"'
        f' height="{frame.viewport.height}">',
        f'<rect width="100%" height="100%" fill="#9aa78f"/>',
    ]
    for p in frame.primitives:
        r, g, b, a = p.color
        fill = f"rgba({round(r * 255)},{round(g * 255)},{round(b * 255)},{a})"
        if p.kind == "point_marker":
            x, y = p.vertices[0]
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{fill}"/>')
        else:
            pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in p.vertices)
            parts.append(f'<polygon points="{pts}" fill="{fill}"/>')
    parts.append("</svg>")
    return "\n".join(parts)
