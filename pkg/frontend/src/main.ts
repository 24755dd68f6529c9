/** Review application: record list, three linked canvas panels over a shared
 * time axis, audio playback with a playhead, and accept/reject decisions. */

import {
  ApiError,
  audioUrl,
  fetchVisualization,
  listPerformances,
  postDecision,
} from "./api.js";
import {
  type Canvas2D,
  drawNotesPanel,
  drawPlayhead,
  drawRegionsPanel,
  drawWaveformPanel,
} from "./render.js";
import { showToast } from "./toast.js";
import type { PerformanceSummary, VisualizationBundle } from "./types.js";
import { fullView, pan, span, type Viewport, xToTime, zoom } from "./viewport.js";

type PanelPainter = (
  ctx: Canvas2D,
  bundle: VisualizationBundle,
  vp: Viewport,
  w: number,
  h: number,
) => void;

interface Panel {
  canvas: HTMLCanvasElement;
  ctx: Canvas2D;
  draw: PanelPainter;
}

const PANELS: { name: string; height: number; draw: PanelPainter }[] = [
  { name: "notes", height: 220, draw: drawNotesPanel },
  { name: "waveform", height: 120, draw: drawWaveformPanel },
  { name: "regions", height: 56, draw: drawRegionsPanel },
];

const raf: (cb: () => void) => void =
  typeof requestAnimationFrame === "function"
    ? (cb) => {
        requestAnimationFrame(() => cb());
      }
    : (cb) => {
        setTimeout(cb, 33);
      };

export class ReviewApp {
  private records: PerformanceSummary[] = [];
  private selected: string | null = null;
  private bundle: VisualizationBundle | null = null;
  private viewport: Viewport = fullView(1);
  private playhead = 0;
  private busy = false;
  private rafActive = false;
  private drag: { anchorX: number; anchorView: Viewport } | null = null;

  private readonly panels: Panel[] = [];
  private readonly listEl: HTMLUListElement;
  private readonly titleEl: HTMLElement;
  private readonly chipEl: HTMLElement;
  private readonly scoreEl: HTMLElement;
  private readonly decisionEl: HTMLElement;
  private readonly panelsEl: HTMLElement;
  private readonly noteInput: HTMLInputElement;
  private readonly audio: HTMLAudioElement;

  constructor(private readonly root: HTMLElement) {
    root.innerHTML = `
      <div class="layout">
        <aside class="sidebar">
          <h1>vocaldyn review</h1>
          <ul class="performances"></ul>
        </aside>
        <main class="detail">
          <header class="detail-header">
            <h2 class="title">no selection</h2>
            <span class="chip"></span>
            <span class="score"></span>
            <span class="decision-info"></span>
          </header>
          <div class="panels"></div>
          <div class="controls">
            <input class="note" placeholder="review note (optional)" />
            <button class="accept">accept (a)</button>
            <button class="reject">reject (r)</button>
          </div>
          <p class="hint">wheel zooms, drag pans, double-click resets; a / r decide; space plays</p>
        </main>
      </div>`;

    this.listEl = root.querySelector(".performances") as HTMLUListElement;
    this.titleEl = root.querySelector(".title") as HTMLElement;
    this.chipEl = root.querySelector(".chip") as HTMLElement;
    this.scoreEl = root.querySelector(".score") as HTMLElement;
    this.decisionEl = root.querySelector(".decision-info") as HTMLElement;
    this.panelsEl = root.querySelector(".panels") as HTMLElement;
    this.noteInput = root.querySelector(".note") as HTMLInputElement;

    for (const spec of PANELS) {
      const canvas = document.createElement("canvas");
      canvas.className = `panel ${spec.name}`;
      canvas.height = spec.height;
      canvas.width = 800;
      this.panelsEl.appendChild(canvas);
      const ctx = canvas.getContext("2d");
      if (!ctx) throw new Error("canvas 2d context unavailable");
      this.panels.push({ canvas, ctx, draw: spec.draw });
      this.bindPanelEvents(canvas);
    }

    this.audio = document.createElement("audio");
    this.audio.controls = true;
    const controls = root.querySelector(".controls") as HTMLElement;
    controls.insertBefore(this.audio, controls.firstChild);
    this.audio.addEventListener("timeupdate", () => {
      this.playhead = this.audio.currentTime;
      this.redraw();
    });
    this.audio.addEventListener("play", () => this.followPlayback());
    this.audio.addEventListener("pause", () => this.redraw());
    this.audio.addEventListener("ended", () => this.redraw());

    (root.querySelector(".accept") as HTMLElement).addEventListener("click", () => {
      void this.decide("accept");
    });
    (root.querySelector(".reject") as HTMLElement).addEventListener("click", () => {
      void this.decide("reject");
    });
    window.addEventListener("keydown", this.onKey);
    window.addEventListener("pointerup", this.onPointerUp);
  }

  get view(): Viewport {
    return this.viewport;
  }

  get selectedId(): string | null {
    return this.selected;
  }

  get recordCount(): number {
    return this.records.length;
  }

  destroy(): void {
    window.removeEventListener("keydown", this.onKey);
    window.removeEventListener("pointerup", this.onPointerUp);
  }

  async start(): Promise<void> {
    this.records = await listPerformances();
    this.renderList();
    const first = this.records[0];
    if (first) await this.select(first.id);
  }

  async select(id: string): Promise<void> {
    this.selected = id;
    this.renderList();
    this.renderHeader();
    const width = Math.max(300, Math.min(2000, this.panelsEl.clientWidth || 800));
    for (const panel of this.panels) panel.canvas.width = width;
    try {
      const bundle = await fetchVisualization(id, width);
      if (this.selected !== id) return; // a later selection won the race
      this.bundle = bundle;
      this.viewport = fullView(bundle.duration_seconds);
    } catch (err) {
      if (this.selected !== id) return;
      this.bundle = null;
      this.viewport = fullView(1);
      if (!(err instanceof ApiError)) throw err;
      showToast(`${id}: ${err.message}`);
    }
    this.playhead = 0;
    this.audio.src = audioUrl(id);
    this.redraw();
  }

  async decide(decision: "accept" | "reject"): Promise<void> {
    if (!this.selected || this.busy) return;
    this.busy = true;
    try {
      const updated = await postDecision(this.selected, decision, this.noteInput.value.trim());
      this.records = this.records.map((r) => (r.id === updated.id ? updated : r));
      this.renderList();
      this.renderHeader();
      showToast(`${updated.id}: ${updated.status}`, "info");
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      showToast(err.status === 409 ? `conflict: ${err.message}` : err.message);
      if (err.status === 409) await this.refresh();
    } finally {
      this.busy = false;
    }
  }

  async refresh(): Promise<void> {
    this.records = await listPerformances();
    this.renderList();
    this.renderHeader();
  }

  redraw(): void {
    for (const panel of this.panels) {
      const { canvas, ctx } = panel;
      if (this.bundle) {
        panel.draw(ctx, this.bundle, this.viewport, canvas.width, canvas.height);
        drawPlayhead(ctx, this.viewport, this.playhead, canvas.width, canvas.height);
      } else {
        ctx.clearRect(0, 0, canvas.width, canvas.height);
      }
    }
  }

  private bindPanelEvents(canvas: HTMLCanvasElement): void {
    canvas.addEventListener("wheel", (e) => {
      if (!this.bundle) return;
      e.preventDefault();
      const factor = e.deltaY > 0 ? 1.25 : 0.8;
      const focus = xToTime(this.viewport, e.offsetX, canvas.width);
      this.viewport = zoom(this.viewport, factor, focus);
      this.redraw();
    });
    canvas.addEventListener("pointerdown", (e) => {
      if (!this.bundle) return;
      this.drag = { anchorX: e.clientX, anchorView: this.viewport };
    });
    canvas.addEventListener("pointermove", (e) => {
      if (!this.drag) return;
      const dx = e.clientX - this.drag.anchorX;
      this.viewport = pan(this.drag.anchorView, (-dx / canvas.width) * span(this.drag.anchorView));
      this.redraw();
    });
    canvas.addEventListener("dblclick", () => {
      if (!this.bundle) return;
      this.viewport = fullView(this.bundle.duration_seconds);
      this.redraw();
    });
  }

  private readonly onPointerUp = (): void => {
    this.drag = null;
  };

  private readonly onKey = (e: KeyboardEvent): void => {
    const target = e.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
    if (e.key === "a") {
      void this.decide("accept");
    } else if (e.key === "r") {
      void this.decide("reject");
    } else if (e.key === " ") {
      e.preventDefault();
      this.togglePlayback();
    } else if (e.key === "ArrowLeft") {
      this.viewport = pan(this.viewport, -0.1 * span(this.viewport));
      this.redraw();
    } else if (e.key === "ArrowRight") {
      this.viewport = pan(this.viewport, 0.1 * span(this.viewport));
      this.redraw();
    }
  };

  private togglePlayback(): void {
    if (this.audio.paused) {
      try {
        const playing = this.audio.play() as Promise<void> | undefined;
        if (playing && typeof playing.catch === "function") {
          playing.catch(() => showToast("audio playback unavailable"));
        }
      } catch {
        showToast("audio playback unavailable");
      }
    } else {
      this.audio.pause();
    }
  }

  private followPlayback(): void {
    if (this.rafActive) return;
    this.rafActive = true;
    const tick = (): void => {
      if (this.audio.paused || this.audio.ended) {
        this.rafActive = false;
        return;
      }
      this.playhead = this.audio.currentTime;
      this.redraw();
      raf(tick);
    };
    raf(tick);
  }

  private renderList(): void {
    this.listEl.textContent = "";
    for (const record of this.records) {
      const li = document.createElement("li");
      li.className = "perf" + (record.id === this.selected ? " selected" : "");
      const rid = document.createElement("span");
      rid.className = "rid";
      rid.textContent = record.id;
      const chip = document.createElement("span");
      chip.className = `chip status-${record.status}`;
      chip.textContent = record.status;
      const score = document.createElement("span");
      score.className = "score";
      score.textContent =
        record.alignment_score != null ? record.alignment_score.toFixed(2) : "—";
      li.append(rid, chip, score);
      li.addEventListener("click", () => {
        void this.select(record.id);
      });
      this.listEl.appendChild(li);
    }
  }

  private renderHeader(): void {
    const record = this.records.find((r) => r.id === this.selected);
    if (!record) {
      this.titleEl.textContent = "no selection";
      this.chipEl.textContent = "";
      this.chipEl.className = "chip";
      this.scoreEl.textContent = "";
      this.decisionEl.textContent = "";
      return;
    }
    this.titleEl.textContent = record.id;
    this.chipEl.textContent = record.status;
    this.chipEl.className = `chip status-${record.status}`;
    this.scoreEl.textContent =
      record.alignment_score != null ? `alignment ${record.alignment_score.toFixed(2)}` : "";
    this.decisionEl.textContent = record.decision
      ? `${record.status} by ${record.decision.by}` +
        (record.decision.note ? ` — ${record.decision.note}` : "")
      : "";
  }
}

export async function bootstrap(root: HTMLElement): Promise<ReviewApp> {
  const app = new ReviewApp(root);
  await app.start();
  return app;
}
