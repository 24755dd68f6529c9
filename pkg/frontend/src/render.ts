/** Canvas painters for the three panels. All take the shared viewport so
 * zoom and pan stay linked; none touch the DOM, so tests can pass a
 * recording context. */

import type { VisualizationBundle } from "./types.js";
import { timeToX, type Viewport } from "./viewport.js";

/** The 2D-context subset the panels draw with. */
export interface Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  textAlign: CanvasTextAlign;
  textBaseline: CanvasTextBaseline;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

const BACKGROUND = "#14161f";
const NOTE_COLOR = "#6ea8fe";
const F0_COLOR = "#ffd166";
const WAVE_COLOR = "#4f9d69";
const AXIS_COLOR = "#2b2f3d";
const PLAYHEAD_COLOR = "#ff5470";

const CLASS_ORDER = ["pppp", "ppp", "pp", "p", "mp", "mf", "f", "ff", "fff", "ffff"];

/** Quiet dynamics map to blue, loud to red; sf and friends stay gray. */
export function categoryColor(category: string): string {
  const index = CLASS_ORDER.indexOf(category);
  if (index < 0) return "#8a8fa3";
  const hue = 220 - (index / (CLASS_ORDER.length - 1)) * 200;
  return `hsl(${Math.round(hue)}, 70%, 55%)`;
}

function clear(ctx: Canvas2D, w: number, h: number): void {
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = BACKGROUND;
  ctx.fillRect(0, 0, w, h);
}

export function drawNotesPanel(
  ctx: Canvas2D,
  bundle: VisualizationBundle,
  vp: Viewport,
  w: number,
  h: number,
): void {
  clear(ctx, w, h);
  const freqs = bundle.notes
    .map((n) => n.pitch_hz)
    .concat(bundle.f0.map((p) => p[1]))
    .filter((hz) => hz > 0);
  const lo = (freqs.length ? Math.min(...freqs) : 110) / 1.3;
  const hi = (freqs.length ? Math.max(...freqs) : 880) * 1.3;
  const yOf = (hz: number): number =>
    h - ((Math.log(hz) - Math.log(lo)) / (Math.log(hi) - Math.log(lo))) * h;

  ctx.fillStyle = NOTE_COLOR;
  for (const note of bundle.notes) {
    if (note.offset < vp.start || note.onset > vp.end) continue;
    const x0 = timeToX(vp, note.onset, w);
    const x1 = timeToX(vp, note.offset, w);
    ctx.fillRect(x0, yOf(note.pitch_hz) - 3, Math.max(1, x1 - x0 - 1), 6);
  }
  ctx.fillStyle = F0_COLOR;
  for (const [t, hz] of bundle.f0) {
    if (hz <= 0 || t < vp.start || t > vp.end) continue;
    ctx.fillRect(timeToX(vp, t, w) - 1, yOf(hz) - 1, 2, 2);
  }
}

export function drawWaveformPanel(
  ctx: Canvas2D,
  bundle: VisualizationBundle,
  vp: Viewport,
  w: number,
  h: number,
): void {
  clear(ctx, w, h);
  ctx.strokeStyle = AXIS_COLOR;
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(0, h / 2);
  ctx.lineTo(w, h / 2);
  ctx.stroke();

  const buckets = bundle.envelope.length;
  if (!buckets) return;
  const dur = bundle.duration_seconds;
  ctx.fillStyle = WAVE_COLOR;
  for (let k = 0; k < buckets; k++) {
    const t0 = (k / buckets) * dur;
    const t1 = ((k + 1) / buckets) * dur;
    if (t1 < vp.start || t0 > vp.end) continue;
    const [low, high] = bundle.envelope[k]!;
    const x0 = timeToX(vp, t0, w);
    const x1 = timeToX(vp, t1, w);
    const yHigh = h / 2 - high * (h / 2) * 0.92;
    const yLow = h / 2 - low * (h / 2) * 0.92;
    ctx.fillRect(x0, yHigh, Math.max(1, x1 - x0), Math.max(1, yLow - yHigh));
  }
}

export function drawRegionsPanel(
  ctx: Canvas2D,
  bundle: VisualizationBundle,
  vp: Viewport,
  w: number,
  h: number,
): void {
  clear(ctx, w, h);
  for (const region of bundle.regions) {
    if (region.end < vp.start || region.start > vp.end) continue;
    const x0 = Math.max(0, timeToX(vp, region.start, w));
    const x1 = Math.min(w, timeToX(vp, region.end, w));
    ctx.globalAlpha = 0.55;
    ctx.fillStyle = categoryColor(region.category);
    ctx.fillRect(x0, 0, Math.max(1, x1 - x0), h);
    ctx.globalAlpha = 1;
    if (x1 - x0 < 28) continue;
    const suffix =
      region.region === "crescendo" ? " <" : region.region === "diminuendo" ? " >" : "";
    ctx.fillStyle = "#ffffff";
    ctx.font = "12px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(region.category + suffix, (x0 + x1) / 2, h / 2);
  }
}

export function drawPlayhead(
  ctx: Canvas2D,
  vp: Viewport,
  time: number,
  w: number,
  h: number,
): void {
  if (time < vp.start || time > vp.end) return;
  const x = timeToX(vp, time, w);
  ctx.strokeStyle = PLAYHEAD_COLOR;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(x, 0);
  ctx.lineTo(x, h);
  ctx.stroke();
}
