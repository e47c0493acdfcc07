/** Service client and viewer state.
 *
 * Talks to the pipe service over plain HTTP GET. Radius and fix changes
 * are debounced so dragging a slider issues one request, and responses
 * apply latest-wins so a slow stale reply never overwrites a newer one.
 */

import { bboxFromFix, rangeParam, type GeoFix } from "./geo.js";
import { parseFeatureDocument, type FeatureDocument } from "./geojson.js";

export interface MinimalResponse {
  ok: boolean;
  status: number;
  text(): Promise<string>;
}

export type FetchLike = (url: string) => Promise<MinimalResponse>;

export interface HealthInfo {
  status: string;
  points: number;
  lines: number;
  epoch: number;
}

export interface ViewerState {
  fix: GeoFix;
  radiusM: number;
  doc: FeatureDocument | null;
  /** Features in the last applied response. */
  displayedCount: number;
  lastError: string | null;
  loading: boolean;
}

export const DEFAULT_DEBOUNCE_MS = 250;

export async function fetchHealth(baseUrl: string, fetchImpl: FetchLike): Promise<HealthInfo> {
  const resp = await fetchImpl(`${baseUrl}/health`);
  if (!resp.ok) throw new Error(`health check failed with status ${resp.status}`);
  return JSON.parse(await resp.text()) as HealthInfo;
}

export class PipesClient {
  readonly state: ViewerState;
  /** Count of /pipes requests actually sent, for debounce accounting. */
  requestsIssued = 0;

  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;
  private readonly debounceMs: number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private generation = 0;
  private readonly listeners: Array<(s: ViewerState) => void> = [];

  constructor(
    baseUrl: string,
    fetchImpl: FetchLike,
    options: { debounceMs?: number; fix?: GeoFix; radiusM?: number } = {},
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl;
    this.debounceMs = options.debounceMs ?? DEFAULT_DEBOUNCE_MS;
    this.state = {
      fix: options.fix ?? { lon: 116.0, lat: 40.0, alt: 50.0 },
      radiusM: options.radiusM ?? 60.0,
      doc: null,
      displayedCount: 0,
      lastError: null,
      loading: false,
    };
  }

  onChange(fn: (s: ViewerState) => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  setFix(fix: GeoFix): void {
    this.state.fix = fix;
    this.schedule();
  }

  setRadius(radiusM: number): void {
    if (radiusM <= 0) throw new Error(`radius must be positive, got ${radiusM}`);
    this.state.radiusM = radiusM;
    this.schedule();
  }

  /** Collapse rapid updates into one request after debounceMs of quiet. */
  private schedule(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.refresh();
    }, this.debounceMs);
  }

  pipesUrl(): string {
    const b = bboxFromFix(this.state.fix.lon, this.state.fix.lat, this.state.radiusM);
    return `${this.baseUrl}/pipes?range=${encodeURIComponent(rangeParam(b))}`;
  }

  /** Fetch the current load rectangle immediately. */
  async refresh(): Promise<void> {
    const gen = ++this.generation;
    this.state.loading = true;
    this.requestsIssued += 1;
    this.notify();
    try {
      const resp = await this.fetchImpl(this.pipesUrl());
      if (gen !== this.generation) return; // a newer request superseded this one
      if (!resp.ok) throw new Error(`service returned status ${resp.status}`);
      const doc = parseFeatureDocument(await resp.text());
      if (gen !== this.generation) return;
      this.state.doc = doc;
      this.state.displayedCount = doc.features.length;
      this.state.lastError = null;
    } catch (exc) {
      if (gen !== this.generation) return;
      this.state.lastError = exc instanceof Error ? exc.message : String(exc);
    } finally {
      if (gen === this.generation) {
        this.state.loading = false;
        this.notify();
      }
    }
  }

  dispose(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.generation += 1; // orphan any in-flight response
  }
}
