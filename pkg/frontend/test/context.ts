/** A recording stand-in for the 2D canvas context (jsdom has none). */

import type { Canvas2D } from "../src/render.js";

export interface RecordedCall {
  op: string;
  args: unknown[];
}

export interface RecordingContext extends Canvas2D {
  calls: RecordedCall[];
  ops(name: string): RecordedCall[];
  reset(): void;
}

export function recordingContext(): RecordingContext {
  const calls: RecordedCall[] = [];
  const record =
    (op: string) =>
    (...args: unknown[]): void => {
      calls.push({ op, args });
    };
  return {
    calls,
    ops: (name) => calls.filter((c) => c.op === name),
    reset: () => {
      calls.length = 0;
    },
    fillStyle: "#000",
    strokeStyle: "#000",
    lineWidth: 1,
    globalAlpha: 1,
    font: "",
    textAlign: "left",
    textBaseline: "alphabetic",
    clearRect: record("clearRect"),
    fillRect: record("fillRect"),
    beginPath: record("beginPath"),
    moveTo: record("moveTo"),
    lineTo: record("lineTo"),
    stroke: record("stroke"),
    fillText: record("fillText"),
  };
}
