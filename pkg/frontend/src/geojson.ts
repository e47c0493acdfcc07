/** Typed view of the pipe-network GeoJSON served by /pipes. */

export interface PointProperties {
  object_id: number;
  point_number: string;
  ground_elevation: number;
  feature_kind: string;
  attached_object: string;
  well_bottom_depth: number;
  lid_type: string;
  lid_spec: string;
  lid_material: string;
  offset_distance: number;
  rotation_angle: number;
}

export interface LineProperties {
  object_id: number;
  start_point_id: number;
  end_point_id: number;
  start_depth: number;
  end_depth: number;
  start_elevation: number;
  end_elevation: number;
  material: string;
  burial_method: string;
  line_type: string;
  diameter: number;
  length: number;
}

export interface PointFeature {
  type: "Feature";
  id: string;
  geometry: { type: "Point"; coordinates: [number, number] };
  properties: PointProperties;
}

export interface LineFeature {
  type: "Feature";
  id: string;
  geometry: { type: "LineString"; coordinates: [number, number][] };
  properties: LineProperties;
}

export type PipeFeature = PointFeature | LineFeature;

export interface FeatureDocument {
  type: "FeatureCollection";
  features: PipeFeature[];
}

export function isPoint(f: PipeFeature): f is PointFeature {
  return f.geometry.type === "Point";
}

export function isLine(f: PipeFeature): f is LineFeature {
  return f.geometry.type === "LineString";
}

function fail(msg: string): never {
  throw new Error(`malformed feature document: ${msg}`);
}

/** Parse and structurally validate a /pipes response body. */
export function parseFeatureDocument(text: string): FeatureDocument {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (exc) {
    fail(String(exc));
  }
  if (typeof doc !== "object" || doc === null) fail("top level is not an object");
  const d = doc as Record<string, unknown>;
  if (d["type"] !== "FeatureCollection") fail(`bad type ${JSON.stringify(d["type"])}`);
  const feats = d["features"];
  if (!Array.isArray(feats)) fail("missing features list");
  for (const [i, f] of feats.entries()) {
    if (typeof f !== "object" || f === null) fail(`feature ${i} is not an object`);
    const fr = f as Record<string, unknown>;
    if (fr["type"] !== "Feature") fail(`feature ${i} has bad type`);
    if (typeof fr["id"] !== "string") fail(`feature ${i} has no id`);
    const geom = fr["geometry"] as Record<string, unknown> | null;
    if (typeof geom !== "object" || geom === null) fail(`feature ${i} has no geometry`);
    const gt = geom["type"];
    if (gt !== "Point" && gt !== "LineString") fail(`feature ${i} has geometry type ${JSON.stringify(gt)}`);
    if (!Array.isArray(geom["coordinates"])) fail(`feature ${i} has no coordinates`);
    if (typeof fr["properties"] !== "object" || fr["properties"] === null)
      fail(`feature ${i} has no properties`);
  }
  return d as unknown as FeatureDocument;
}
