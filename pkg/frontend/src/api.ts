/** Typed client for the three review endpoints plus the audio URL. */

import type { PerformanceSummary, VisualizationBundle } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = `${response.status} ${response.statusText}`.trim();
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (typeof body.detail === "string" && body.detail) detail = body.detail;
    } catch {
      // non-JSON error body: keep the status line
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export function listPerformances(): Promise<PerformanceSummary[]> {
  return request("/api/performances");
}

export function fetchVisualization(
  id: string,
  width: number,
): Promise<VisualizationBundle> {
  const encoded = encodeURIComponent(id);
  return request(`/api/performances/${encoded}/visualization?width=${width}`);
}

export function postDecision(
  id: string,
  decision: "accept" | "reject",
  note: string,
): Promise<PerformanceSummary> {
  return request(`/api/performances/${encodeURIComponent(id)}/decision`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ decision, note }),
  });
}

export function audioUrl(id: string): string {
  return `/api/performances/${encodeURIComponent(id)}/audio`;
}
