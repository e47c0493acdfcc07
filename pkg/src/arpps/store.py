"""In-memory spatial store over a pipe network.

Two query paths answer bbox queries with identical semantics: a uniform
grid index (query_bbox) and a linear scan (query_brute_force). Both use
the same closed-boundary intersection predicate, so their results must be
set-equal on every input; the tests enforce exactly that.

Intersection semantics: a point matches when it lies inside or on the
boundary of the box; a segment matches when any part of it touches the
closed box (Liang-Barsky clipping), so pipes crossing a view rectangle
are returned even when both manholes sit outside.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .geodesy import BBox
from .pipe_model import (PipeCategory, PipeLine, PipePoint, Violation,
                         validate_network)

SNAPSHOT_MAGIC = "ARPPS-STORE"
SNAPSHOT_VERSION = 1


class FeatureKind(enum.IntEnum):
    POINT = 0
    LINE = 1


@dataclass(frozen=True, order=True)
class FeatureId:
    kind: FeatureKind
    object_id: int


class ValidationError(ValueError):
    """Raised when load() is handed a network that fails validation."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        preview = "; ".join(str(v) for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__(f"network validation failed: {preview}{more}")


class SnapshotError(ValueError):
    pass


def point_in_bbox(x: float, y: float, bbox: BBox) -> bool:
    return bbox.lon_min <= x <= bbox.lon_max and bbox.lat_min <= y <= bbox.lat_max


def segment_intersects_bbox(x1: float, y1: float, x2: float, y2: float, bbox: BBox) -> bool:
    """Closed segment-rectangle intersection via Liang-Barsky clipping."""
    dx = x2 - x1
    dy = y2 - y1
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x1 - bbox.lon_min), (dx, bbox.lon_max - x1),
                 (-dy, y1 - bbox.lat_min), (dy, bbox.lat_max - y1)):
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            r = q / p
            if p < 0.0:
                if r > t0:
                    t0 = r
            else:
                if r < t1:
                    t1 = r
    return t0 <= t1


def _segments_intersect_bbox(x1, y1, x2, y2, bbox: BBox) -> np.ndarray:
    """Vectorized Liang-Barsky over parallel coordinate arrays."""
    dx = x2 - x1
    dy = y2 - y1
    t0 = np.zeros_like(x1)
    t1 = np.ones_like(x1)
    reject = np.zeros(x1.shape, dtype=bool)
    for p, q in ((-dx, x1 - bbox.lon_min), (dx, bbox.lon_max - x1),
                 (-dy, y1 - bbox.lat_min), (dy, bbox.lat_max - y1)):
        zero = p == 0.0
        reject |= zero & (q < 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(zero, 0.0, q / np.where(zero, 1.0, p))
        t0 = np.where(~zero & (p < 0.0), np.maximum(t0, r), t0)
        t1 = np.where(~zero & (p > 0.0), np.minimum(t1, r), t1)
    return ~reject & (t0 <= t1)


class _Grid:
    """Uniform grid over feature bounding boxes; cells hold feature rows."""

    def __init__(self, minx: float, miny: float, maxx: float, maxy: float, n_features: int):
        self.minx = minx
        self.miny = miny
        g = max(1, min(256, math.ceil(math.sqrt(max(1, n_features)))))
        self.g = g
        w = maxx - minx
        h = maxy - miny
        self.cell_w = w / g if w > 0.0 else 1.0
        self.cell_h = h / g if h > 0.0 else 1.0
        self.maxx = maxx
        self.maxy = maxy
        self._cells: list[list[int]] = [[] for _ in range(g * g)]
        self._frozen: list[np.ndarray] | None = None

    def _cx(self, x: float) -> int:
        return min(self.g - 1, max(0, int((x - self.minx) / self.cell_w)))

    def _cy(self, y: float) -> int:
        return min(self.g - 1, max(0, int((y - self.miny) / self.cell_h)))

    def insert(self, row: int, fx0: float, fy0: float, fx1: float, fy1: float) -> None:
        for cy in range(self._cy(fy0), self._cy(fy1) + 1):
            for cx in range(self._cx(fx0), self._cx(fx1) + 1):
                self._cells[cy * self.g + cx].append(row)

    def freeze(self) -> None:
        self._frozen = [np.asarray(c, dtype=np.int64) for c in self._cells]

    def candidates(self, bbox: BBox) -> np.ndarray:
        if bbox.lon_max < self.minx or bbox.lon_min > self.maxx \
                or bbox.lat_max < self.miny or bbox.lat_min > self.maxy:
            return np.empty(0, dtype=np.int64)
        assert self._frozen is not None
        parts = []
        for cy in range(self._cy(bbox.lat_min), self._cy(bbox.lat_max) + 1):
            for cx in range(self._cx(bbox.lon_min), self._cx(bbox.lon_max) + 1):
                cell = self._frozen[cy * self.g + cx]
                if cell.size:
                    parts.append(cell)
        if not parts:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(parts))


class SpatialStore:
    """Immutable-after-load feature store; safe for concurrent readers."""

    def __init__(self, points: list[PipePoint], lines: list[PipeLine], epoch: int = 1):
        self.points: dict[int, PipePoint] = {p.object_id: p for p in points}
        self.lines: dict[int, PipeLine] = {ln.object_id: ln for ln in lines}
        self.epoch = epoch

        self._point_ids = np.asarray(sorted(self.points), dtype=np.int64)
        self._line_ids = np.asarray(sorted(self.lines), dtype=np.int64)
        self._px = np.asarray([self.points[i].x for i in self._point_ids], dtype=np.float64)
        self._py = np.asarray([self.points[i].y for i in self._point_ids], dtype=np.float64)
        self._lx1 = np.asarray([self.lines[i].start_x for i in self._line_ids], dtype=np.float64)
        self._ly1 = np.asarray([self.lines[i].start_y for i in self._line_ids], dtype=np.float64)
        self._lx2 = np.asarray([self.lines[i].end_x for i in self._line_ids], dtype=np.float64)
        self._ly2 = np.asarray([self.lines[i].end_y for i in self._line_ids], dtype=np.float64)

        n = len(points) + len(lines)
        if n:
            xs = [self._px, self._lx1, self._lx2]
            ys = [self._py, self._ly1, self._ly2]
            minx = min((float(a.min()) for a in xs if a.size), default=0.0)
            maxx = max((float(a.max()) for a in xs if a.size), default=0.0)
            miny = min((float(a.min()) for a in ys if a.size), default=0.0)
            maxy = max((float(a.max()) for a in ys if a.size), default=0.0)
        else:
            minx = miny = maxx = maxy = 0.0
        self._grid = _Grid(minx, miny, maxx, maxy, n)
        np_n = len(self._point_ids)
        for row in range(np_n):
            x, y = self._px[row], self._py[row]
            self._grid.insert(row, x, y, x, y)
        for row in range(len(self._line_ids)):
            x0 = min(self._lx1[row], self._lx2[row])
            x1 = max(self._lx1[row], self._lx2[row])
            y0 = min(self._ly1[row], self._ly2[row])
            y1 = max(self._ly1[row], self._ly2[row])
            self._grid.insert(np_n + row, x0, y0, x1, y1)
        self._grid.freeze()

    # -- construction ------------------------------------------------------

    @classmethod
    def load(cls, points: list[PipePoint], lines: list[PipeLine]) -> "SpatialStore":
        violations = validate_network(points, lines)
        if violations:
            raise ValidationError(violations)
        return cls(points, lines, epoch=1)

    # -- queries -----------------------------------------------------------

    def _test_rows(self, rows: np.ndarray, bbox: BBox) -> set[FeatureId]:
        """Exact predicate on the given feature rows; rows are global indices."""
        np_n = len(self._point_ids)
        prows = rows[rows < np_n]
        lrows = rows[rows >= np_n] - np_n
        out: set[FeatureId] = set()
        if prows.size:
            x, y = self._px[prows], self._py[prows]
            hit = ((bbox.lon_min <= x) & (x <= bbox.lon_max)
                   & (bbox.lat_min <= y) & (y <= bbox.lat_max))
            for i in prows[hit]:
                out.add(FeatureId(FeatureKind.POINT, int(self._point_ids[i])))
        if lrows.size:
            hit = _segments_intersect_bbox(self._lx1[lrows], self._ly1[lrows],
                                           self._lx2[lrows], self._ly2[lrows], bbox)
            for i in lrows[hit]:
                out.add(FeatureId(FeatureKind.LINE, int(self._line_ids[i])))
        return out

    def query_bbox(self, bbox: BBox) -> set[FeatureId]:
        """Indexed query: grid candidates narrowed by the exact predicate."""
        return self._test_rows(self._grid.candidates(bbox), bbox)

    def query_brute_force(self, bbox: BBox) -> set[FeatureId]:
        """Oracle query: the exact predicate over every feature."""
        n = len(self._point_ids) + len(self._line_ids)
        return self._test_rows(np.arange(n, dtype=np.int64), bbox)

    # -- persistence -------------------------------------------------------

    def save_snapshot(self, path: str | Path) -> None:
        payload = {
            "epoch": self.epoch,
            "points": [asdict(self.points[i]) for i in sorted(self.points)],
            "lines": [{**asdict(self.lines[i]), "line_type": self.lines[i].line_type.code}
                      for i in sorted(self.lines)],
        }
        text = f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}\n" + json.dumps(payload, sort_keys=True)
        Path(path).write_text(text, encoding="utf-8")


def load_snapshot(path: str | Path) -> SpatialStore:
    text = Path(path).read_text(encoding="utf-8")
    header, _, body = text.partition("\n")
    parts = header.split()
    if len(parts) != 2 or parts[0] != SNAPSHOT_MAGIC:
        raise SnapshotError(f"bad snapshot header: {header!r}")
    try:
        version = int(parts[1])
    except ValueError:
        raise SnapshotError(f"bad snapshot version token: {parts[1]!r}") from None
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"snapshot version {version} not supported (expected {SNAPSHOT_VERSION})")
    try:
        payload = json.loads(body)
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"corrupt snapshot body: {exc}") from None
    points = [PipePoint(**rec) for rec in payload["points"]]
    lines = [PipeLine(**{**rec, "line_type": PipeCategory.from_code(rec["line_type"])})
             for rec in payload["lines"]]
    return SpatialStore(points, lines, epoch=payload.get("epoch", 1))
