/** Pure scene builder: GeoJSON features plus a camera pose in, a
 * depth-sorted overlay draw list out. Mirrors the service renderer so a
 * frame built here matches one fetched from the service byte-for-byte in
 * structure and ordering. */

import { enuFromGeo, type GeoFix } from "./geo.js";
import type { Frame, Primitive, Viewport } from "./frame.js";
import { isLine, isPoint, type FeatureDocument } from "./geojson.js";
import {
  categoryColor,
  MARKER_COLOR,
  TRENCH_FLOOR_COLOR,
  TRENCH_WALL_COLOR,
} from "./palette.js";
import {
  cameraMatrix,
  poseQuat,
  type CameraIntrinsics,
  type Vec3,
} from "./projection.js";
import { buildTrench, DEPTH_MARGIN_M, type TrenchSpec } from "./trench.js";

export interface ViewerPose extends GeoFix {
  headingDeg: number;
  pitchDeg: number;
}

export const DEFAULT_VIEWPORT: Viewport = { width: 1280, height: 720 };

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

/** Two rings of prism vertices around the segment axis. */
export function tubeRings(start: Vec3, end: Vec3, radius: number, sides: number): Vec3[] {
  let axis: Vec3 = [end[0] - start[0], end[1] - start[1], end[2] - start[2]];
  const norm = Math.hypot(axis[0], axis[1], axis[2]);
  axis = norm > 0 ? [axis[0] / norm, axis[1] / norm, axis[2] / norm] : [1, 0, 0];
  let ref: Vec3 = [0, 0, 1];
  if (Math.abs(axis[0] * ref[0] + axis[1] * ref[1] + axis[2] * ref[2]) > 0.99)
    ref = [0, 1, 0];
  let u = cross(axis, ref);
  const un = Math.hypot(u[0], u[1], u[2]);
  u = [u[0] / un, u[1] / un, u[2] / un];
  const v = cross(axis, u);
  const ring: Vec3[] = [];
  for (let i = 0; i < sides; i++) {
    const a = (2 * Math.PI * i) / sides;
    ring.push([
      radius * (u[0] * Math.cos(a) + v[0] * Math.sin(a)),
      radius * (u[1] * Math.cos(a) + v[1] * Math.sin(a)),
      radius * (u[2] * Math.cos(a) + v[2] * Math.sin(a)),
    ]);
  }
  const out: Vec3[] = [];
  for (const r of ring) out.push([start[0] + r[0], start[1] + r[1], start[2] + r[2]]);
  for (const r of ring) out.push([end[0] + r[0], end[1] + r[1], end[2] + r[2]]);
  return out;
}

interface FaceHit {
  pixels: [number, number][];
  depth: number;
  clipped: boolean;
}

/** Project one face; null when any vertex is at or behind the camera. */
function projectFace(
  vertices: Vec3[],
  cam: number[][],
  k: CameraIntrinsics,
  viewport: Viewport,
): FaceHit | null {
  const pixels: [number, number][] = [];
  let depthSum = 0;
  let clipped = false;
  for (const p of vertices) {
    const xc = cam[0]![0]! * p[0] + cam[0]![1]! * p[1] + cam[0]![2]! * p[2];
    const yc = cam[1]![0]! * p[0] + cam[1]![1]! * p[1] + cam[1]![2]! * p[2];
    const zc = cam[2]![0]! * p[0] + cam[2]![1]! * p[1] + cam[2]![2]! * p[2];
    if (zc <= 0) return null;
    depthSum += zc;
    const u = k.fx * (xc / zc) + k.cx;
    const v = k.fy * (yc / zc) + k.cy;
    if (!(u >= 0 && u <= viewport.width && v >= 0 && v <= viewport.height)) clipped = true;
    pixels.push([u, v]);
  }
  return { pixels, depth: depthSum / vertices.length, clipped };
}

function byDrawOrder(a: Primitive, b: Primitive): number {
  if (a.depth !== b.depth) return b.depth - a.depth;
  if (a.kind !== b.kind) return a.kind < b.kind ? -1 : 1;
  const ai = a.featureId ?? "";
  const bi = b.featureId ?? "";
  return ai < bi ? -1 : ai > bi ? 1 : 0;
}

export function buildScene(
  doc: FeatureDocument,
  pose: ViewerPose,
  k: CameraIntrinsics,
  trench: TrenchSpec,
  viewport: Viewport = DEFAULT_VIEWPORT,
  tubeSides = 8,
): Frame {
  const cam = cameraMatrix(poseQuat(pose.headingDeg, pose.pitchDeg));
  const prims: Primitive[] = [];

  let deepest = 0;
  for (const f of doc.features)
    if (isLine(f))
      deepest = Math.max(deepest, f.properties.start_depth, f.properties.end_depth);
  const spec: TrenchSpec =
    trench.depth !== null ? trench : { ...trench, depth: deepest + DEPTH_MARGIN_M };

  for (const face of buildTrench(spec, pose.headingDeg, pose.alt)) {
    const hit = projectFace(face.vertices, cam, k, viewport);
    if (!hit) continue;
    prims.push({
      kind: face.kind,
      vertices: hit.pixels,
      depth: hit.depth,
      color: face.kind === "trench_floor" ? TRENCH_FLOOR_COLOR : TRENCH_WALL_COLOR,
      category: null,
      featureId: null,
      clipped: hit.clipped,
    });
  }

  for (const f of doc.features) {
    if (isPoint(f)) {
      const [lon, lat] = f.geometry.coordinates;
      const e = enuFromGeo(pose, lon, lat, f.properties.ground_elevation);
      const hit = projectFace([[e.e, e.n, e.u]], cam, k, viewport);
      if (!hit) continue;
      prims.push({
        kind: "point_marker",
        vertices: hit.pixels,
        depth: hit.depth,
        color: MARKER_COLOR,
        category: null,
        featureId: f.id,
        clipped: hit.clipped,
      });
    } else {
      const p = f.properties;
      const [c0, c1] = f.geometry.coordinates;
      if (!c0 || !c1) continue;
      const s = enuFromGeo(pose, c0[0], c0[1], p.start_elevation - p.start_depth);
      const e = enuFromGeo(pose, c1[0], c1[1], p.end_elevation - p.end_depth);
      const rings = tubeRings(
        [s.e, s.n, s.u],
        [e.e, e.n, e.u],
        p.diameter / 2000,
        tubeSides,
      );
      const hit = projectFace(rings, cam, k, viewport);
      if (!hit) continue;
      prims.push({
        kind: "pipe_tube",
        vertices: hit.pixels,
        depth: hit.depth,
        color: categoryColor(p.line_type),
        category: p.line_type,
        featureId: f.id,
        clipped: hit.clipped,
      });
    }
  }

  prims.sort(byDrawOrder);
  return { viewport, primitives: prims };
}
