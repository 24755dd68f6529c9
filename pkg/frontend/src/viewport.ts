/** Shared time window for the stacked panels: zoom/pan math, pure. */

export interface Viewport {
  readonly start: number;
  readonly end: number;
  readonly duration: number;
}

export const MIN_SPAN = 0.05;

export function fullView(duration: number): Viewport {
  return { start: 0, end: Math.max(duration, MIN_SPAN), duration };
}

export function span(v: Viewport): number {
  return v.end - v.start;
}

function clamped(start: number, end: number, duration: number): Viewport {
  const limit = Math.max(duration, MIN_SPAN);
  const width = Math.min(Math.max(end - start, MIN_SPAN), limit);
  let s = start;
  if (s < 0) s = 0;
  if (s + width > limit) s = limit - width;
  return { start: s, end: s + width, duration };
}

/** Scale the window by `factor` (<1 zooms in) keeping `focus` at the same pixel. */
export function zoom(v: Viewport, factor: number, focus: number): Viewport {
  const oldSpan = span(v);
  const newSpan = oldSpan * factor;
  const ratio = (focus - v.start) / oldSpan;
  return clamped(focus - ratio * newSpan, focus + (1 - ratio) * newSpan, v.duration);
}

/** Shift the window by `deltaSeconds`, saturating at the edges. */
export function pan(v: Viewport, deltaSeconds: number): Viewport {
  return clamped(v.start + deltaSeconds, v.end + deltaSeconds, v.duration);
}

export function timeToX(v: Viewport, t: number, width: number): number {
  return ((t - v.start) / span(v)) * width;
}

export function xToTime(v: Viewport, x: number, width: number): number {
  return v.start + (x / width) * span(v);
}
