"""Pipe network domain records, synthetic generation and CSV interchange.

The network is a jittered street grid: manholes (PipePoint) sit near the
nodes of a regular grid and pipes (PipeLine) run between grid neighbours,
so a bounding-box query at any scale inside the extent finds features.
Units: coordinates in degrees, elevations/depths/lengths in metres,
diameters in millimetres.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import random
from dataclasses import dataclass, fields

from .geodesy import EnuPoint, GeoPoint, geo_from_enu, haversine_m


class PipeCategory(enum.Enum):
    """Functional classification of a pipe line; exactly 13 codes."""

    COVERED_CHANNEL = "CoveredChannel"
    POWER_LINE_CARRIER = "PowerLineCarrier"
    POWER_SUPPLY = "PowerSupply"
    MONITORING_SIGNAL = "MonitoringSignal"
    STREET_LAMP = "StreetLamp"
    HOT_WATER = "HotWater"
    FEED_WATER = "FeedWater"
    NATURAL_GAS = "NaturalGas"
    COMMUNICATION = "Communication"
    SEWAGE = "Sewage"
    RAINWATER = "Rainwater"
    INTEGRATED = "Integrated"
    RECLAIMED_WATER = "ReclaimedWater"

    @property
    def code(self) -> str:
        return self.value

    @classmethod
    def from_code(cls, code: str) -> "PipeCategory":
        try:
            return cls(code)
        except ValueError:
            raise UnknownCategoryError(f"unknown pipe category code: {code!r}") from None


class UnknownCategoryError(ValueError):
    pass


@dataclass(frozen=True)
class PipePoint:
    object_id: int
    point_number: str
    x: float                    # longitude, degrees
    y: float                    # latitude, degrees
    ground_elevation: float     # metres
    feature_kind: str
    attached_object: str
    well_bottom_depth: float    # metres below ground, >= 0
    lid_type: str
    lid_spec: str
    lid_material: str
    offset_distance: float      # metres
    rotation_angle: float       # degrees, [0, 360)


@dataclass(frozen=True)
class PipeLine:
    object_id: int
    start_point_id: int
    end_point_id: int
    start_depth: float          # metres, >= 0
    end_depth: float
    start_elevation: float      # metres
    end_elevation: float
    start_x: float
    start_y: float
    end_x: float
    end_y: float
    material: str
    burial_method: str
    line_type: PipeCategory
    diameter: float             # millimetres, > 0
    length: float               # metres, > 0


def uniform_mix() -> dict[PipeCategory, float]:
    w = 1.0 / len(PipeCategory)
    return {c: w for c in PipeCategory}


@dataclass(frozen=True)
class NetworkSpec:
    """Parameters for the deterministic synthetic generator."""

    seed: int
    center: GeoPoint
    extent: float               # metres, full width of the square network
    point_count: int
    category_mix: "dict[PipeCategory, float] | None" = None

    def resolved_mix(self) -> dict[PipeCategory, float]:
        return dict(self.category_mix) if self.category_mix is not None else uniform_mix()

    def validate(self) -> None:
        if self.point_count <= 0:
            raise ValueError(f"point_count must be > 0, got {self.point_count}")
        if self.extent <= 0.0:
            raise ValueError(f"extent must be > 0, got {self.extent}")
        mix = self.resolved_mix()
        if any(w < 0.0 for w in mix.values()):
            raise ValueError("category weights must be non-negative")
        total = sum(mix.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"category weights must sum to 1, got {total}")


# vocabularies for the opaque attribute fields
_FEATURE_KINDS = ["well", "valve", "junction", "inspection", "hydrant"]
_ATTACHED = ["", "lamp_post", "cabinet", "marker_post"]
_LID_TYPES = ["round", "square"]
_LID_SPECS = ["B125", "C250", "D400"]
_LID_MATERIALS = ["cast_iron", "composite", "concrete"]
_MATERIALS = ["PE", "PVC", "steel", "cast_iron", "concrete"]
_BURIAL_METHODS = ["open_cut", "trench", "directional_drill"]
_DIAMETERS_MM = [50.0, 100.0, 150.0, 200.0, 300.0, 500.0, 800.0]


def generate_network(spec: NetworkSpec) -> tuple[list[PipePoint], list[PipeLine]]:
    """Build a referentially intact jittered-grid network, deterministic in seed."""
    spec.validate()
    rng = random.Random(spec.seed)
    mix = spec.resolved_mix()
    categories = list(mix.keys())
    weights = [mix[c] for c in categories]

    n = spec.point_count
    cols = max(1, math.ceil(math.sqrt(n)))
    rows = math.ceil(n / cols)
    cell_e = spec.extent / cols
    cell_n = spec.extent / rows

    points: list[PipePoint] = []
    coords: list[tuple[float, float]] = []
    elevations: list[float] = []
    for i in range(n):
        r, c = divmod(i, cols)
        e = (c + 0.5) * cell_e - spec.extent / 2.0 + (rng.random() - 0.5) * 0.6 * cell_e
        nn = (r + 0.5) * cell_n - spec.extent / 2.0 + (rng.random() - 0.5) * 0.6 * cell_n
        geo = geo_from_enu(spec.center, EnuPoint(e=e, n=nn, u=0.0))
        elev = 5.0 + rng.random() * 2.0
        points.append(PipePoint(
            object_id=i + 1,
            point_number=f"P{i + 1:05d}",
            x=geo.lon,
            y=geo.lat,
            ground_elevation=elev,
            feature_kind=rng.choice(_FEATURE_KINDS),
            attached_object=rng.choice(_ATTACHED),
            well_bottom_depth=0.5 + rng.random() * 3.0,
            lid_type=rng.choice(_LID_TYPES),
            lid_spec=rng.choice(_LID_SPECS),
            lid_material=rng.choice(_LID_MATERIALS),
            offset_distance=rng.random() * 0.5,
            rotation_angle=rng.random() * 360.0,
        ))
        coords.append((geo.lon, geo.lat))
        elevations.append(elev)

    lines: list[PipeLine] = []
    line_id = 0
    for i in range(n):
        r, c = divmod(i, cols)
        neighbours = []
        if c + 1 < cols and i + 1 < n:
            neighbours.append(i + 1)
        if r + 1 < rows and i + cols < n:
            neighbours.append(i + cols)
        for j in neighbours:
            line_id += 1
            (sx, sy), (ex, ey) = coords[i], coords[j]
            length = haversine_m(GeoPoint(sx, sy), GeoPoint(ex, ey))
            lines.append(PipeLine(
                object_id=line_id,
                start_point_id=i + 1,
                end_point_id=j + 1,
                start_depth=0.6 + rng.random() * 2.4,
                end_depth=0.6 + rng.random() * 2.4,
                start_elevation=elevations[i],
                end_elevation=elevations[j],
                start_x=sx, start_y=sy, end_x=ex, end_y=ey,
                material=rng.choice(_MATERIALS),
                burial_method=rng.choice(_BURIAL_METHODS),
                line_type=rng.choices(categories, weights=weights)[0],
                diameter=rng.choice(_DIAMETERS_MM),
                length=length,
            ))

    return points, lines


@dataclass(frozen=True)
class Violation:
    """One broken invariant; violations are data, not exceptions."""

    record: str     # e.g. "point 17" or "line 3"
    rule: str       # short machine-readable rule name
    detail: str

    def __str__(self) -> str:
        return f"{self.record}: {self.rule} ({self.detail})"


def validate_network(points: list[PipePoint], lines: list[PipeLine]) -> list[Violation]:
    """Check every record invariant; empty result means the network is sound."""
    out: list[Violation] = []
    by_id: dict[int, PipePoint] = {}

    for p in points:
        rec = f"point {p.object_id}"
        if p.object_id in by_id:
            out.append(Violation(rec, "duplicate-id", "object_id reused"))
        else:
            by_id[p.object_id] = p
        if not (-180.0 <= p.x <= 180.0) or not (-90.0 <= p.y <= 90.0):
            out.append(Violation(rec, "coordinate-range", f"({p.x}, {p.y})"))
        if p.well_bottom_depth < 0.0:
            out.append(Violation(rec, "field-range", f"well_bottom_depth {p.well_bottom_depth}"))
        if not (0.0 <= p.rotation_angle < 360.0):
            out.append(Violation(rec, "field-range", f"rotation_angle {p.rotation_angle}"))

    seen_lines: set[int] = set()
    for ln in lines:
        rec = f"line {ln.object_id}"
        if ln.object_id in seen_lines:
            out.append(Violation(rec, "duplicate-id", "object_id reused"))
        seen_lines.add(ln.object_id)
        if ln.start_point_id == ln.end_point_id:
            out.append(Violation(rec, "degenerate-line", f"both endpoints point {ln.start_point_id}"))
        if ln.diameter <= 0.0:
            out.append(Violation(rec, "field-range", f"diameter {ln.diameter}"))
        if ln.length <= 0.0:
            out.append(Violation(rec, "field-range", f"length {ln.length}"))
        if ln.start_depth < 0.0 or ln.end_depth < 0.0:
            out.append(Violation(rec, "field-range", f"depths ({ln.start_depth}, {ln.end_depth})"))
        for label, pid, lx, ly in (("start", ln.start_point_id, ln.start_x, ln.start_y),
                                   ("end", ln.end_point_id, ln.end_x, ln.end_y)):
            ref = by_id.get(pid)
            if ref is None:
                out.append(Violation(rec, "dangling-reference", f"{label}_point_id {pid} missing"))
                continue
            if abs(ref.x - lx) > 1e-9 or abs(ref.y - ly) > 1e-9:
                out.append(Violation(
                    rec, "coordinate-mismatch",
                    f"{label} ({lx}, {ly}) vs point {pid} ({ref.x}, {ref.y})"))
        if ln.length > 0.0:
            geod = haversine_m(GeoPoint(ln.start_x, ln.start_y), GeoPoint(ln.end_x, ln.end_y))
            if geod > 0.0 and abs(ln.length - geod) / geod > 0.05:
                out.append(Violation(rec, "length-mismatch",
                                     f"length {ln.length} vs geodesic {geod}"))
    return out


# ---------------------------------------------------------------------------
# CSV interchange: pipe_points.csv / pipe_lines.csv, UTF-8, comma-separated.

POINT_COLUMNS = [f.name for f in fields(PipePoint)]
LINE_COLUMNS = [f.name for f in fields(PipeLine)]

_POINT_FLOATS = {"x", "y", "ground_elevation", "well_bottom_depth",
                 "offset_distance", "rotation_angle"}
_LINE_FLOATS = {"start_depth", "end_depth", "start_elevation", "end_elevation",
                "start_x", "start_y", "end_x", "end_y", "diameter", "length"}
_LINE_INTS = {"object_id", "start_point_id", "end_point_id"}


class CsvFormatError(ValueError):
    pass


def _fmt(v: object) -> str:
    if isinstance(v, float):
        return repr(v)        # shortest round-tripping form
    if isinstance(v, PipeCategory):
        return v.code
    return str(v)


def write_csv(points: list[PipePoint], lines: list[PipeLine]) -> tuple[str, str]:
    """Serialize to (points_text, lines_text); exact float round-trip."""
    def dump(columns: list[str], records: list) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_fmt(getattr(rec, c)) for c in columns])
        return buf.getvalue()

    return dump(POINT_COLUMNS, points), dump(LINE_COLUMNS, lines)


def _parse_cell(raw: str, column: str, row: int, kind: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise CsvFormatError(
            f"{kind} row {row}, column {column!r}: cannot parse {raw!r} as a number"
        ) from None


def _parse_int(raw: str, column: str, row: int, kind: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise CsvFormatError(
            f"{kind} row {row}, column {column!r}: cannot parse {raw!r} as an integer"
        ) from None


def parse_csv(points_text: str, lines_text: str) -> tuple[list[PipePoint], list[PipeLine]]:
    """Parse the two-file CSV format back into typed records.

    Headers must match POINT_COLUMNS / LINE_COLUMNS exactly; numeric cells
    use a locale-independent decimal point; bad cells report row and column.
    """
    points: list[PipePoint] = []
    reader = csv.reader(io.StringIO(points_text))
    header = next(reader, None)
    if header != POINT_COLUMNS:
        raise CsvFormatError(f"pipe_points header mismatch: expected {POINT_COLUMNS}, got {header}")
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(POINT_COLUMNS):
            raise CsvFormatError(f"points row {row_no}: expected {len(POINT_COLUMNS)} cells, got {len(row)}")
        vals: dict[str, object] = {}
        for col, raw in zip(POINT_COLUMNS, row):
            if col == "object_id":
                vals[col] = _parse_int(raw, col, row_no, "points")
            elif col in _POINT_FLOATS:
                vals[col] = _parse_cell(raw, col, row_no, "points")
            else:
                vals[col] = raw
        points.append(PipePoint(**vals))

    lines: list[PipeLine] = []
    reader = csv.reader(io.StringIO(lines_text))
    header = next(reader, None)
    if header != LINE_COLUMNS:
        raise CsvFormatError(f"pipe_lines header mismatch: expected {LINE_COLUMNS}, got {header}")
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(LINE_COLUMNS):
            raise CsvFormatError(f"lines row {row_no}: expected {len(LINE_COLUMNS)} cells, got {len(row)}")
        vals = {}
        for col, raw in zip(LINE_COLUMNS, row):
            if col in _LINE_INTS:
                vals[col] = _parse_int(raw, col, row_no, "lines")
            elif col in _LINE_FLOATS:
                vals[col] = _parse_cell(raw, col, row_no, "lines")
            elif col == "line_type":
                try:
                    vals[col] = PipeCategory.from_code(raw)
                except UnknownCategoryError:
                    raise CsvFormatError(
                        f"lines row {row_no}: unknown category code {raw!r}") from None
            else:
                vals[col] = raw
        lines.append(PipeLine(**vals))

    return points, lines
