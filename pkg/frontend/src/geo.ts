/** Spherical-earth coordinate helpers, kept formula-identical to the
 * service side so both ends compute the same load rectangle. */

export const EARTH_RADIUS_M = 6_371_000;

export interface GeoFix {
  lon: number;
  lat: number;
  alt: number;
}

export interface BBox {
  lonMin: number;
  latMin: number;
  lonMax: number;
  latMax: number;
}

export interface EnuPoint {
  e: number;
  n: number;
  u: number;
}

const DEG = Math.PI / 180;

/** Load rectangle of half-extent r metres centred on a fix. */
export function bboxFromFix(lon: number, lat: number, radiusM: number): BBox {
  if (radiusM <= 0) throw new Error(`radius must be positive, got ${radiusM}`);
  if (Math.abs(lat) >= 89) throw new Error(`latitude ${lat} too close to pole`);
  const dlat = (radiusM * (180 / Math.PI)) / EARTH_RADIUS_M;
  const dlon = dlat / Math.cos(lat * DEG);
  return {
    lonMin: lon - dlon,
    latMin: lat - dlat,
    lonMax: lon + dlon,
    latMax: lat + dlat,
  };
}

export function rangeParam(b: BBox): string {
  return `${b.lonMin},${b.latMin},${b.lonMax},${b.latMax}`;
}

/** Equirectangular tangent-plane offset of a point about an origin fix. */
export function enuFromGeo(origin: GeoFix, lon: number, lat: number, alt: number): EnuPoint {
  const scale = DEG * EARTH_RADIUS_M;
  return {
    e: (lon - origin.lon) * scale * Math.cos(origin.lat * DEG),
    n: (lat - origin.lat) * scale,
    u: alt - origin.alt,
  };
}
