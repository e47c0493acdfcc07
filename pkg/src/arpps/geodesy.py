"""Geographic <-> local east-north-up conversions and the GPS-fix load box.

All conversions assume a spherical earth (EARTH_RADIUS_M) and an
equirectangular tangent-plane approximation, which is accurate to well
under 0.1% at the sub-kilometre separations this system operates at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0

# tangent-plane validity bound for enu_from_geo / geo_from_enu
MAX_SEPARATION_DEG = 1.0


@dataclass(frozen=True)
class GeoPoint:
    """Geographic position in degrees, altitude in metres."""

    lon: float
    lat: float
    alt: float = 0.0

    def __post_init__(self) -> None:
        for name in ("lon", "lat", "alt"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon}")
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat}")
        if not math.isfinite(self.alt):
            raise ValueError("altitude must be finite")


@dataclass(frozen=True)
class EnuPoint:
    """Metres east/north/up relative to a declared GeoPoint origin."""

    e: float
    n: float
    u: float

    def __post_init__(self) -> None:
        for name in ("e", "n", "u"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError("ENU components must be finite")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned geographic rectangle, degrees, min <= max per axis."""

    lon_min: float
    lat_min: float
    lon_max: float
    lat_max: float

    def __post_init__(self) -> None:
        for name in ("lon_min", "lat_min", "lon_max", "lat_max"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError("bbox bounds must be finite")
            object.__setattr__(self, name, v)
        if self.lon_min > self.lon_max or self.lat_min > self.lat_max:
            raise ValueError(
                f"bbox min exceeds max: ({self.lon_min},{self.lat_min},"
                f"{self.lon_max},{self.lat_max})"
            )

    def contains(self, lon: float, lat: float) -> bool:
        """Closed-boundary point containment."""
        return (self.lon_min <= lon <= self.lon_max
                and self.lat_min <= lat <= self.lat_max)


class SeparationError(ValueError):
    """Point too far from the origin for the tangent-plane approximation."""


def enu_from_geo(origin: GeoPoint, p: GeoPoint) -> EnuPoint:
    """Project ``p`` into the ENU frame tangent at ``origin``.

    Valid for separations up to MAX_SEPARATION_DEG per axis; raises
    SeparationError beyond that.
    """
    dlat = p.lat - origin.lat
    dlon = p.lon - origin.lon
    if abs(dlat) > MAX_SEPARATION_DEG or abs(dlon) > MAX_SEPARATION_DEG:
        raise SeparationError(
            f"separation ({dlon:.6f}, {dlat:.6f}) deg exceeds "
            f"{MAX_SEPARATION_DEG} deg tangent-plane bound"
        )
    scale = math.pi / 180.0 * EARTH_RADIUS_M
    e = dlon * scale * math.cos(math.radians(origin.lat))
    n = dlat * scale
    return EnuPoint(e=e, n=n, u=p.alt - origin.alt)


def geo_from_enu(origin: GeoPoint, p: EnuPoint) -> GeoPoint:
    """Inverse of enu_from_geo about the same origin."""
    scale = math.pi / 180.0 * EARTH_RADIUS_M
    lat = origin.lat + p.n / scale
    lon = origin.lon + p.e / (scale * math.cos(math.radians(origin.lat)))
    return GeoPoint(lon=lon, lat=lat, alt=origin.alt + p.u)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in metres (ignores altitude)."""
    lat1, lat2 = math.radians(a.lat), math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    h = (math.sin(dlat / 2.0) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2)
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def bbox_from_fix(fix: GeoPoint, r: float) -> BBox:
    """Load rectangle of half-extent ``r`` metres centred on a GPS fix.

    r is converted to degree offsets at the fix latitude; the cosine
    degenerates towards the poles, so |lat| >= 89 deg is rejected.
    """
    if r <= 0.0:
        raise ValueError(f"radius must be positive, got {r}")
    if abs(fix.lat) >= 89.0:
        raise ValueError(f"latitude {fix.lat} too close to pole for bbox")
    dlat = r * (180.0 / math.pi) / EARTH_RADIUS_M
    dlon = dlat / math.cos(math.radians(fix.lat))
    return BBox(
        lon_min=fix.lon - dlon,
        lat_min=fix.lat - dlat,
        lon_max=fix.lon + dlon,
        lat_max=fix.lat + dlat,
    )
