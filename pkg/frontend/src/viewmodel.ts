// Pure view-models: service responses in, display rows out. No number on
// screen is computed here beyond formatting -- reductions, counts and
// recall all arrive ready-made from the service.

import type { Histogram, Proposal, Run, SweepPoint, ValidationRow, Decision } from "./types.js";

export interface SweepRowView {
  percentile: string;
  falseCallsBefore: number;
  falseCallsAfter: number;
  reduction: string;
  defectsRetained: string;
  guardActivations: number;
  partsExceedingCurrent: number;
}

export function formatPercent(fraction: number): string {
  return `${(fraction * 100).toFixed(1)}%`;
}

export function sweepView(points: SweepPoint[]): SweepRowView[] {
  return points.map((point) => ({
    percentile: `p${point.p}`,
    falseCallsBefore: point.total_false_calls_before,
    falseCallsAfter: point.total_false_calls_after,
    reduction: formatPercent(point.reduction_fraction),
    defectsRetained: `${point.defects_flagged}/${point.defects_total}`,
    guardActivations: point.guard_activations,
    partsExceedingCurrent: point.parts_exceeding_current,
  }));
}

export interface ValidationRowView {
  part: string;
  trainDefects: number;
  holdoutDefects: number;
  flagged: number;
  escaped: number;
  status: "pass" | "fail";
  highlight: boolean;
}

export interface ValidationView {
  rows: ValidationRowView[];
  overallRecall: string;
  allPassed: boolean;
  errors: string[];
}

export function validationView(run: Run): ValidationView {
  const rows = run.validation.rows.map((row: ValidationRow) => ({
    part: `${row.key.part_number}/${row.key.inspection_type}`,
    trainDefects: row.train_defect_count,
    holdoutDefects: row.holdout_defect_count,
    flagged: row.holdout_flagged,
    escaped: row.holdout_escaped,
    status: row.status,
    highlight: row.status === "fail",
  }));
  const overall = run.validation.overall_recall;
  return {
    rows,
    overallRecall: overall === null ? "n/a" : formatPercent(overall.recall),
    allPassed: rows.length > 0 && rows.every((row) => row.status === "pass"),
    errors: run.validation.errors,
  };
}

export interface ProposalRowView {
  id: string;
  part: string;
  currentTolerance: number;
  finalTolerance: number;
  falseCalls: string;
  guardApplied: boolean;
  exceedsCurrent: boolean;
  decision: Decision | null;
}

export function proposalQueueView(
  proposals: Proposal[],
  decisions: Map<string, Decision>,
): { pending: ProposalRowView[]; decided: ProposalRowView[] } {
  const rows = proposals.map((proposal) => ({
    id: proposal.id,
    part: `${proposal.key.part_number}/${proposal.key.inspection_type}`,
    currentTolerance: proposal.current_tolerance,
    finalTolerance: proposal.final_tolerance,
    falseCalls: `${proposal.false_calls_before} -> ${proposal.false_calls_after}`,
    guardApplied: proposal.guard.applied,
    exceedsCurrent: proposal.exceeds_current,
    decision: decisions.get(proposal.id) ?? null,
  }));
  return {
    pending: rows.filter((row) => row.decision === null),
    decided: rows.filter((row) => row.decision !== null),
  };
}

export interface ExportPreviewView {
  header: string;
  rows: string[];
}

/** The export preview shows the service's CSV verbatim, line by line. */
export function exportPreviewView(exportText: string): ExportPreviewView {
  const lines = exportText.trim().split("\n");
  return { header: lines[0] ?? "", rows: lines.slice(1) };
}

export interface HistogramBarView {
  /** Bar height as a fraction of the tallest bin; layout only. */
  height: number;
  count: number;
  label: string;
}

export interface HistogramView {
  bars: HistogramBarView[];
  currentMarker: number | null;
  optimisedMarker: number | null;
}

export function histogramView(data: Histogram): HistogramView {
  const peak = Math.max(...data.counts, 1);
  const bars = data.counts.map((count, i) => ({
    height: count / peak,
    count,
    label: `${data.bin_edges[i]?.toFixed(2)}..${data.bin_edges[i + 1]?.toFixed(2)}`,
  }));
  return {
    bars,
    currentMarker: data.markers.current_tolerance,
    optimisedMarker: data.markers.optimised_tolerance,
  };
}
