// Wire types mirroring the service's response models. The dashboard never
// derives numbers of its own: everything rendered comes from these shapes.

export interface PartKey {
  part_number: string;
  inspection_type: string;
}

export interface DatasetCounts {
  accepted: number;
  rejected: number;
  quarantined: number;
  parts: number;
  false_calls: number;
  defects: number;
}

export interface DatasetVersion {
  version: string;
  created_at: string;
  source: string;
  counts: DatasetCounts;
}

export interface SweepPoint {
  p: number;
  total_false_calls_before: number;
  total_false_calls_after: number;
  reduction_fraction: number;
  defects_total: number;
  defects_flagged: number;
  guard_activations: number;
  parts_exceeding_current: number;
  annotations: string[];
}

export interface Guard {
  applied: boolean;
  max_defect_value: number | null;
  safety_margin: number;
}

export interface Proposal {
  id: string;
  key: PartKey;
  current_tolerance: number;
  percentile_used: number;
  candidate_tolerance: number;
  final_tolerance: number;
  guard: Guard;
  false_calls_before: number;
  false_calls_after: number;
  defects_total: number;
  defects_flagged_after: number;
  exceeds_current: boolean;
}

export interface RecallValue {
  tp: number;
  fn: number;
  recall: number;
}

export interface ValidationRow {
  key: PartKey;
  train_defect_count: number;
  holdout_defect_count: number;
  holdout_flagged: number;
  holdout_escaped: number;
  status: "pass" | "fail";
}

export interface ValidationReport {
  rows: ValidationRow[];
  overall_recall: RecallValue | null;
  errors: string[];
}

export interface Run {
  run_id: string;
  dataset_version: string;
  parameters: unknown;
  proposals: Proposal[];
  validation: ValidationReport;
}

export interface PartSummary {
  key: PartKey;
  current_tolerance: number;
  false_calls: number;
  defects: number;
  passes: number;
  models: string[];
}

export interface Histogram {
  bin_edges: number[];
  counts: number[];
  markers: { current_tolerance: number | null; optimised_tolerance: number | null };
}

export type DecisionChoice = "approved" | "rejected";

export interface Decision {
  proposal_id: string;
  decision: DecisionChoice;
  decided_by: string;
  decided_at: string;
  note: string | null;
}
