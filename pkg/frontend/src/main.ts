/** Browser entry point: wires the client, pose controls and canvas. */

import { PipesClient, fetchHealth } from "./client.js";
import { cssColor } from "./palette.js";
import { buildScene, DEFAULT_VIEWPORT, type ViewerPose } from "./render.js";
import type { Frame } from "./frame.js";
import type { CameraIntrinsics } from "./projection.js";
import { CIRCULAR, RECTANGULAR, defaultTrench, type TrenchMode } from "./trench.js";

const K: CameraIntrinsics = { fx: 1000, fy: 1000, cx: 640, cy: 360 };

function drawFrame(ctx: CanvasRenderingContext2D, frame: Frame): void {
  ctx.fillStyle = "#9aa78f";
  ctx.fillRect(0, 0, frame.viewport.width, frame.viewport.height);
  for (const p of frame.primitives) {
    ctx.fillStyle = cssColor(p.color);
    if (p.kind === "point_marker") {
      const [x, y] = p.vertices[0]!;
      ctx.beginPath();
      ctx.arc(x, y, 4, 0, 2 * Math.PI);
      ctx.fill();
    } else {
      ctx.beginPath();
      const [x0, y0] = p.vertices[0]!;
      ctx.moveTo(x0, y0);
      for (const [x, y] of p.vertices.slice(1)) ctx.lineTo(x, y);
      ctx.closePath();
      ctx.fill();
    }
  }
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function start(): void {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "http://127.0.0.1:8787";

  const canvas = el<HTMLCanvasElement>("view");
  canvas.width = DEFAULT_VIEWPORT.width;
  canvas.height = DEFAULT_VIEWPORT.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d canvas context");

  const status = el<HTMLElement>("status");
  const radius = el<HTMLInputElement>("radius");
  const heading = el<HTMLInputElement>("heading");
  const pitch = el<HTMLInputElement>("pitch");
  const trenchMode = el<HTMLSelectElement>("trench-mode");

  const client = new PipesClient(base, (url) => window.fetch(url), {
    radiusM: Number(radius.value),
  });

  const pose = (): ViewerPose => ({
    ...client.state.fix,
    headingDeg: Number(heading.value),
    pitchDeg: Number(pitch.value),
  });

  const redraw = (): void => {
    const doc = client.state.doc;
    if (!doc) return;
    const trench = defaultTrench(client.state.fix.alt);
    trench.mode = trenchMode.value as TrenchMode;
    drawFrame(ctx, buildScene(doc, pose(), K, trench));
    status.textContent = client.state.lastError
      ? `error: ${client.state.lastError}`
      : `${client.state.displayedCount} features, ${client.requestsIssued} requests`;
  };

  client.onChange(redraw);
  radius.addEventListener("input", () => client.setRadius(Number(radius.value)));
  heading.addEventListener("input", redraw);
  pitch.addEventListener("input", redraw);
  trenchMode.addEventListener("change", redraw);

  fetchHealth(base, (url) => window.fetch(url))
    .then((h) => {
      status.textContent = `service up: ${h.points} points, ${h.lines} lines`;
      void client.refresh();
    })
    .catch((exc) => {
      status.textContent = `service unreachable at ${base}: ${exc}`;
    });

  trenchMode.append(new Option("rectangular", RECTANGULAR), new Option("circular", CIRCULAR));
}
