/** Message payloads exchanged with the session service. */

export const OBJECTIVE_TAGS = [
  "minimum.min",
  "maximum.max",
  "amplitude",
  "max.increase",
  "max.derivative",
  "min.mean",
  "max.decrease",
] as const;

export type ObjectiveTag = (typeof OBJECTIVE_TAGS)[number];

export interface CandidateSummary {
  cid: number;
  raw_scores: Record<ObjectiveTag, number>;
  ratios: Record<ObjectiveTag, number>;
  dff: number;
  generation: number;
  error: boolean;
}

export interface EventPayload {
  index: number;
  current: CandidateSummary[];
  previous: CandidateSummary[];
  bounds: Record<string, [number, number]>;
  counters: { iterations: number; evaluations: number };
  weights: Record<ObjectiveTag, number>;
  best_dff: number;
}

export interface CandidateDetail {
  cid: number;
  inputs: Record<string, number[]>;
  outputs: Record<string, number[]>;
  raw_scores: Record<ObjectiveTag, number>;
  dff: number;
  generation: number;
}

export interface VersionInfo {
  version_id: number;
  label: string;
}

export interface Response {
  type: "response";
  cmd: string;
  seq: number;
  ok: boolean;
  error?: string;
  session_id?: string;
  versions?: VersionInfo[];
  event?: EventPayload;
  weights?: Record<string, number>;
  detail?: CandidateDetail;
  running?: boolean;
  path?: string;
  csv?: string;
  sidecar?: string;
  status?: Record<string, unknown>;
  log?: Record<string, unknown>;
}

export interface EventPush {
  type: "event";
  session_id: string;
  push_seq: number;
  event: EventPayload;
}

export type ServerMessage = Response | EventPush;
