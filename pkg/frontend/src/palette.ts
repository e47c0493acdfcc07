/** Pipe category colours, mirrored from the service's overlay palette. */

export type Rgb = [number, number, number];
export type Rgba = [number, number, number, number];

export const PALETTE: Record<string, Rgb> = {
  Communication: [1.0, 0.55, 0.0],
  CoveredChannel: [0.55, 0.27, 0.07],
  FeedWater: [0.05, 0.25, 0.85],
  HotWater: [0.8, 0.2, 0.55],
  Integrated: [0.25, 0.7, 0.7],
  MonitoringSignal: [0.45, 0.45, 0.45],
  NaturalGas: [0.95, 0.85, 0.1],
  PowerLineCarrier: [0.6, 0.3, 0.7],
  PowerSupply: [0.9, 0.1, 0.1],
  Rainwater: [0.35, 0.55, 0.95],
  ReclaimedWater: [0.6, 0.6, 0.3],
  Sewage: [0.4, 0.25, 0.1],
  StreetLamp: [0.95, 0.6, 0.75],
};

export const TRENCH_WALL_COLOR: Rgba = [0.45, 0.32, 0.18, 0.45];
export const TRENCH_FLOOR_COLOR: Rgba = [0.3, 0.21, 0.12, 0.45];
export const MARKER_COLOR: Rgba = [0.15, 0.15, 0.15, 1.0];

export function categoryColor(code: string): Rgba {
  const rgb = PALETTE[code];
  if (!rgb) throw new Error(`unknown pipe category ${JSON.stringify(code)}`);
  return [rgb[0], rgb[1], rgb[2], 1.0];
}

/** rgba() string for canvas/SVG fills. */
export function cssColor(c: Rgba): string {
  return `rgba(${Math.round(c[0] * 255)},${Math.round(c[1] * 255)},${Math.round(c[2] * 255)},${c[3]})`;
}
