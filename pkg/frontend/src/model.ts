/** Pure view-model transforms: scatter points, outliers, progress strip.
 * All client-side work is presentation; the search itself lives behind the
 * protocol. */

import { OBJECTIVE_TAGS, type CandidateSummary, type EventPayload, type ObjectiveTag } from "./types.js";

export interface Axes {
  x: ObjectiveTag;
  y: ObjectiveTag;
}

export const DEFAULT_AXES: Axes = { x: "maximum.max", y: "max.derivative" };

export interface ScatterPoint {
  cid: number;
  x: number; // oriented ratio of axes.x, in [0, 1]
  y: number;
  cohort: "current" | "previous";
  dff: number;
}

export interface Outlier {
  cid: number;
  objective: ObjectiveTag;
  kind: "best" | "worst";
}

export function validAxes(axes: Axes): boolean {
  return axes.x !== axes.y
    && OBJECTIVE_TAGS.includes(axes.x)
    && OBJECTIVE_TAGS.includes(axes.y);
}

/** Current generation plus the previous one, positioned by the two
 * selected objectives' oriented ratios. */
export function scatterPoints(event: EventPayload, axes: Axes): ScatterPoint[] {
  const toPoint = (c: CandidateSummary, cohort: "current" | "previous"): ScatterPoint => ({
    cid: c.cid,
    x: c.ratios[axes.x],
    y: c.ratios[axes.y],
    cohort,
    dff: c.dff,
  });
  return [
    ...event.current.map((c) => toPoint(c, "current")),
    ...event.previous.map((c) => toPoint(c, "previous")),
  ];
}

/** Extreme candidates on either displayed axis, with the objective that
 * makes them extreme named, so the view can say *why* a point stands out. */
export function findOutliers(event: EventPayload, axes: Axes): Outlier[] {
  const everyone = [...event.current, ...event.previous];
  if (everyone.length === 0) return [];
  const out: Outlier[] = [];
  for (const tag of [axes.x, axes.y]) {
    let best = everyone[0];
    let worst = everyone[0];
    for (const c of everyone) {
      if (c.ratios[tag] > best.ratios[tag]) best = c;
      if (c.ratios[tag] < worst.ratios[tag]) worst = c;
    }
    if (best.ratios[tag] > worst.ratios[tag]) {
      out.push({ cid: best.cid, objective: tag, kind: "best" });
      out.push({ cid: worst.cid, objective: tag, kind: "worst" });
    }
  }
  return out;
}

/** Best-DFF trajectory across the events seen so far (progress strip). */
export function bestDffSeries(events: EventPayload[]): number[] {
  return events.map((e) => e.best_dff);
}

export function describeCounters(event: EventPayload): string {
  const { iterations, evaluations } = event.counters;
  return `event ${event.index} · ${iterations} iterations · ${evaluations} evaluations`;
}

/** Slider domain: 0..10 in 0.1 steps; 0 deselects the objective. */
export const WEIGHT_MIN = 0;
export const WEIGHT_MAX = 10;
export const WEIGHT_STEP = 0.1;

export function clampWeight(value: number): number {
  if (!Number.isFinite(value)) return 0;
  const snapped = Math.round(value / WEIGHT_STEP) * WEIGHT_STEP;
  return Math.min(WEIGHT_MAX, Math.max(WEIGHT_MIN, Number(snapped.toFixed(1))));
}

export interface ViewState {
  axes: Axes;
  selectedCid: number | null;
  connected: boolean;
  event: EventPayload | null;
  history: EventPayload[];
}

export function initialViewState(): ViewState {
  return { axes: { ...DEFAULT_AXES }, selectedCid: null, connected: false, event: null, history: [] };
}

export function applyEvent(state: ViewState, event: EventPayload): ViewState {
  const alive = new Set([...event.current, ...event.previous].map((c) => c.cid));
  return {
    ...state,
    event,
    history: [...state.history, event],
    // stale selections are cleared rather than silently remapped
    selectedCid: state.selectedCid !== null && alive.has(state.selectedCid)
      ? state.selectedCid
      : null,
  };
}

export function setAxes(state: ViewState, axes: Axes): ViewState {
  if (!validAxes(axes)) return state;
  return { ...state, axes };
}
