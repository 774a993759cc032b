// Episode-end and suite-end summary formatting, shared by the DOM layer
// and the headless tests. The SPL/pace terms come from the server rows;
// nothing is recomputed client-side.

import { EpisodeResultPayload } from "./protocol.js";

export interface SummaryLine {
  label: string;
  value: string;
}

export function episodeSummary(result: EpisodeResultPayload): SummaryLine[] {
  return [
    { label: "scenario", value: result.scenario_id },
    { label: "outcome", value: result.success ? "SUCCESS" : result.reason },
    { label: "shortest path", value: `${result.shortest_m.toFixed(2)} m` },
    { label: "executed path", value: `${result.executed_m.toFixed(2)} m` },
    { label: "SPL contribution", value: result.spl_term.toFixed(2) },
    { label: "pace term", value: result.pace_term.toFixed(2) },
    { label: "steps", value: String(result.steps) },
  ];
}

export interface SuiteSummary {
  episodes: number;
  sr: number;
  spl: number;
  pace: number;
}

export function suiteSummaryLines(s: SuiteSummary): SummaryLine[] {
  const pct = (v: number) => `${(100 * v).toFixed(1)}%`;
  return [
    { label: "episodes", value: String(s.episodes) },
    { label: "SR", value: pct(s.sr) },
    { label: "SPL", value: pct(s.spl) },
    { label: "pace", value: pct(s.pace) },
  ];
}
