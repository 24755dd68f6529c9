/** Wire types mirrored from the review service's JSON endpoints. */

export interface DecisionInfo {
  by: string;
  at: string;
  note: string;
}

export interface PerformanceSummary {
  id: string;
  status: string;
  alignment_score: number | null;
  decision: DecisionInfo | null;
}

export interface VisualizationNote {
  onset: number;
  offset: number;
  pitch: number;
  pitch_hz: number;
}

export interface DynamicsRegion {
  start: number;
  end: number;
  category: string;
  region: string | null;
}

export interface VisualizationBundle {
  duration_seconds: number;
  /** Voiced frames only: [time_seconds, frequency_hz]. */
  f0: [number, number][];
  notes: VisualizationNote[];
  /** Per-bucket [min, max] sample values spanning the full duration. */
  envelope: [number, number][];
  regions: DynamicsRegion[];
}
