/** Virtual excavation mesh, built in ENU about the camera ground point.
 * Geometry mirrors the service renderer so both sides draw the same box. */

import type { Vec3 } from "./projection.js";

export const RECTANGULAR = "RectangularAllSight";
export const CIRCULAR = "CircularFrontSight180";
export const DEFAULT_TRENCH_SIZE_M = 4.0;
export const DEPTH_MARGIN_M = 1.0;
export const ARC_SEGMENTS = 16;

export type TrenchMode = typeof RECTANGULAR | typeof CIRCULAR;

export interface TrenchSpec {
  mode: TrenchMode;
  /** Rectangle side length or sector radius, metres. */
  size: number;
  /** null resolves at render time to the deepest queried pipe plus margin. */
  depth: number | null;
  groundElevation: number;
}

export interface TrenchFace {
  kind: "trench_wall" | "trench_floor";
  vertices: Vec3[];
}

export function defaultTrench(groundElevation: number): TrenchSpec {
  return { mode: RECTANGULAR, size: DEFAULT_TRENCH_SIZE_M, depth: null, groundElevation };
}

export function buildTrench(
  spec: TrenchSpec,
  headingDeg: number,
  cameraAlt: number,
): TrenchFace[] {
  if (spec.depth === null) throw new Error("trench depth unresolved; pass an explicit depth");
  if (spec.size <= 0) throw new Error(`trench size must be positive, got ${spec.size}`);
  const zTop = spec.groundElevation - cameraAlt;
  const zBot = zTop - spec.depth;
  const faces: TrenchFace[] = [];

  const wall = (a: [number, number], b: [number, number]) => {
    faces.push({
      kind: "trench_wall",
      vertices: [
        [a[0], a[1], zTop],
        [b[0], b[1], zTop],
        [b[0], b[1], zBot],
        [a[0], a[1], zBot],
      ],
    });
  };

  if (spec.mode === RECTANGULAR) {
    const h = spec.size / 2;
    const corners: [number, number][] = [
      [-h, -h],
      [h, -h],
      [h, h],
      [-h, h],
    ];
    for (let i = 0; i < 4; i++) wall(corners[i]!, corners[(i + 1) % 4]!);
    faces.push({ kind: "trench_floor", vertices: corners.map(([e, n]) => [e, n, zBot]) });
  } else {
    const yaw = ((90 - headingDeg) * Math.PI) / 180;
    const arc: [number, number][] = [];
    for (let i = 0; i <= ARC_SEGMENTS; i++) {
      const a = yaw - Math.PI / 2 + (i * Math.PI) / ARC_SEGMENTS;
      arc.push([spec.size * Math.cos(a), spec.size * Math.sin(a)]);
    }
    for (let i = 0; i < ARC_SEGMENTS; i++) wall(arc[i]!, arc[i + 1]!);
    wall(arc[ARC_SEGMENTS]!, arc[0]!);
    faces.push({ kind: "trench_floor", vertices: arc.map(([e, n]) => [e, n, zBot]) });
  }
  return faces;
}
