"""Weighted recursive average low-pass filter for 3-axis sensor streams.

Each incoming sample is blended into the retained state per axis,
A <- A + alpha(d) * (A' - A), where d is the joint 3-axis displacement
between the incoming sample and the state, and alpha is piecewise on d:
tiny (heavy smoothing) below the low threshold, moderate between the
thresholds, large (fast tracking) at or above the high threshold. One d,
and hence one alpha, applies to all three axes of a sample.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

ALPHA_SMALL = 0.001
ALPHA_MID = 0.6
ALPHA_LARGE = 0.9


@dataclass(frozen=True)
class Vec3Sample:
    timestamp: float            # seconds
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        # coerce numpy scalars so repr round-trips through the CSV format
        for name in ("timestamp", "x", "y", "z"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError("sample components must be finite")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class FilterParams:
    low: float = 0.1
    high: float = 0.5
    alpha_small: float = ALPHA_SMALL
    alpha_mid: float = ALPHA_MID
    alpha_large: float = ALPHA_LARGE

    def __post_init__(self) -> None:
        if not (0.0 < self.low < self.high):
            raise ValueError(f"need 0 < low < high, got low={self.low}, high={self.high}")


@dataclass(frozen=True)
class FilterState:
    current: "Vec3Sample | None" = None

    @property
    def initialized(self) -> bool:
        return self.current is not None


def sample_distance(a: Vec3Sample, a_new: Vec3Sample) -> float:
    """Euclidean displacement between two samples over all three axes."""
    return math.sqrt((a_new.x - a.x) ** 2 + (a_new.y - a.y) ** 2 + (a_new.z - a.z) ** 2)


def alpha_of(d: float, params: FilterParams) -> float:
    """Piecewise blend weight; boundaries take the larger branch."""
    if d < params.low:
        return params.alpha_small
    if d < params.high:
        return params.alpha_mid
    return params.alpha_large


def filter_step(state: FilterState, incoming: Vec3Sample,
                params: FilterParams) -> tuple[FilterState, Vec3Sample]:
    """One recursive-average update; the first sample bootstraps the state."""
    if state.current is None:
        return FilterState(incoming), incoming
    prev = state.current
    if incoming.timestamp <= prev.timestamp:
        raise ValueError(
            f"timestamp must advance: {incoming.timestamp} after {prev.timestamp}")
    a = alpha_of(sample_distance(prev, incoming), params)
    out = Vec3Sample(
        timestamp=incoming.timestamp,
        x=prev.x + a * (incoming.x - prev.x),
        y=prev.y + a * (incoming.y - prev.y),
        z=prev.z + a * (incoming.z - prev.z),
    )
    return FilterState(out), out


def filter_stream(samples: list[Vec3Sample], params: FilterParams) -> list[Vec3Sample]:
    """Fold filter_step over a time-ordered stream; same length out as in."""
    if not samples:
        raise ValueError("cannot filter an empty stream")
    state = FilterState()
    out: list[Vec3Sample] = []
    for s in samples:
        state, filtered = filter_step(state, s, params)
        out.append(filtered)
    return out


# -- CSV replay format: timestamp,x,y,z -------------------------------------

STREAM_COLUMNS = ["timestamp", "x", "y", "z"]


def write_stream_csv(samples: list[Vec3Sample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STREAM_COLUMNS)
    for s in samples:
        w.writerow([repr(s.timestamp), repr(s.x), repr(s.y), repr(s.z)])
    return buf.getvalue()


def parse_stream_csv(text: str) -> list[Vec3Sample]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != STREAM_COLUMNS:
        raise ValueError(f"stream header mismatch: expected {STREAM_COLUMNS}, got {header}")
    out = []
    for row in reader:
        if not row:
            continue
        t, x, y, z = (float(v) for v in row)
        out.append(Vec3Sample(t, x, y, z))
    return out
