/** Overlay frame interchange: parse and validate the draw-list JSON the
 * service emits for one rendered camera frame. */

import type { Rgba } from "./palette.js";

export type PrimitiveKind =
  | "pipe_tube"
  | "point_marker"
  | "trench_wall"
  | "trench_floor";

export interface Viewport {
  width: number;
  height: number;
}

export interface Primitive {
  kind: PrimitiveKind;
  /** Projected pixel vertices, painter-ordered polygon loop (or a single
   * point for markers). */
  vertices: [number, number][];
  /** Mean camera-space depth in metres; the draw list is far-to-near. */
  depth: number;
  color: Rgba;
  category: string | null;
  featureId: string | null;
  clipped: boolean;
}

export interface Frame {
  viewport: Viewport;
  primitives: Primitive[];
}

const KINDS = new Set(["pipe_tube", "point_marker", "trench_wall", "trench_floor"]);

function fail(msg: string): never {
  throw new Error(`malformed overlay frame: ${msg}`);
}

function asNumber(v: unknown, what: string): number {
  if (typeof v !== "number" || !Number.isFinite(v)) fail(`${what} is not a finite number`);
  return v;
}

export function parseFrame(text: string): Frame {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (exc) {
    fail(String(exc));
  }
  if (typeof doc !== "object" || doc === null) fail("top level is not an object");
  const d = doc as Record<string, unknown>;
  const vp = d["viewport"];
  if (typeof vp !== "object" || vp === null) fail("missing viewport");
  const vpr = vp as Record<string, unknown>;
  const viewport: Viewport = {
    width: asNumber(vpr["width"], "viewport.width"),
    height: asNumber(vpr["height"], "viewport.height"),
  };
  const raw = d["primitives"];
  if (!Array.isArray(raw)) fail("missing primitives list");

  const primitives = raw.map((entry, i): Primitive => {
    if (typeof entry !== "object" || entry === null) fail(`primitive ${i} is not an object`);
    const p = entry as Record<string, unknown>;
    const kind = p["kind"];
    if (typeof kind !== "string" || !KINDS.has(kind)) fail(`primitive ${i} has bad kind ${JSON.stringify(kind)}`);
    const verts = p["vertices"];
    if (!Array.isArray(verts) || verts.length === 0) fail(`primitive ${i} has no vertices`);
    const vertices = verts.map((v): [number, number] => {
      if (!Array.isArray(v) || v.length !== 2) fail(`primitive ${i} has a non-pair vertex`);
      return [asNumber(v[0], "vertex x"), asNumber(v[1], "vertex y")];
    });
    const color = p["color"];
    if (!Array.isArray(color) || color.length !== 4) fail(`primitive ${i} has bad color`);
    const rgba = color.map((c) => asNumber(c, "color channel")) as Rgba;
    const category = p["category"];
    if (category !== null && typeof category !== "string") fail(`primitive ${i} has bad category`);
    const featureId = p["feature_id"];
    if (featureId !== null && typeof featureId !== "string") fail(`primitive ${i} has bad feature_id`);
    return {
      kind: kind as PrimitiveKind,
      vertices,
      depth: asNumber(p["depth"], "depth"),
      color: rgba,
      category: category ?? null,
      featureId: featureId ?? null,
      clipped: Boolean(p["clipped"]),
    };
  });
  return { viewport, primitives };
}
