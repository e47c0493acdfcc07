import { readFileSync } from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";

const here = path.dirname(fileURLToPath(import.meta.url));

/** Shared test-vector directory exported by the service's own suite. */
export const FIXTURE_DIR = path.resolve(here, "..", "..", "fixtures");

export function loadFixture(name: string): string {
  return readFileSync(path.join(FIXTURE_DIR, name), "utf-8");
}

export interface SharedVectors {
  meta: {
    earth_radius_m: number;
    angular_tolerance_deg: number;
    intrinsics: { fx: number; fy: number; cx: number; cy: number };
  };
  bbox_from_fix: {
    lon: number;
    lat: number;
    radius_m: number;
    bbox: [number, number, number, number];
  }[];
  projection: {
    heading_deg: number;
    pitch_deg: number;
    quat_wxyz: [number, number, number, number];
    enu: [number, number, number];
    pixel: [number, number];
    depth: number;
  }[];
  palette: Record<string, [number, number, number]>;
}

export function sharedVectors(): SharedVectors {
  return JSON.parse(loadFixture("shared_vectors.json")) as SharedVectors;
}

export interface SampleScene {
  pose: {
    lon: number;
    lat: number;
    alt: number;
    heading_deg: number;
    pitch_deg: number;
    radius_m: number;
  };
  trench: {
    mode: string;
    size: number;
    depth: number | null;
    ground_elevation: number;
  };
  intrinsics: { fx: number; fy: number; cx: number; cy: number };
  features: unknown;
}

export function sampleScene(): SampleScene {
  return JSON.parse(loadFixture("sample_scene.json")) as SampleScene;
}
