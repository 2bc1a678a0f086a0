"""Pydantic request/response models for the HTTP surface."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, field_validator


class DatasetCounts(BaseModel):
    accepted: int
    rejected: int
    quarantined: int
    parts: int
    false_calls: int
    defects: int


class DatasetVersionOut(BaseModel):
    version: str
    created_at: str
    source: str
    counts: DatasetCounts


class MarginIn(BaseModel):
    value: float = Field(default=0.01, gt=0)
    relative: bool = True


class SplitIn(BaseModel):
    policy: Literal["chronological", "shuffle"] = "chronological"
    seed: int = 0
    ratio: float = Field(default=0.7, gt=0, lt=1)
    top_k: int = Field(default=5, ge=1)


class RunRequest(BaseModel):
    dataset_version: str
    percentile: float = Field(default=80.0, ge=0, le=100)
    margin: MarginIn = MarginIn()
    split: SplitIn = SplitIn()


class RunCreated(BaseModel):
    run_id: str
    created: bool


class PartKeyOut(BaseModel):
    part_number: str
    inspection_type: str


class GuardOut(BaseModel):
    applied: bool
    max_defect_value: float | None
    safety_margin: float


class ProposalOut(BaseModel):
    id: str
    key: PartKeyOut
    current_tolerance: float
    percentile_used: float
    candidate_tolerance: float
    final_tolerance: float
    guard: GuardOut
    false_calls_before: int
    false_calls_after: int
    defects_total: int
    defects_flagged_after: int
    exceeds_current: bool


class RecallOut(BaseModel):
    tp: int
    fn: int
    recall: float


class ValidationRowOut(BaseModel):
    key: PartKeyOut
    train_defect_count: int
    holdout_defect_count: int
    holdout_flagged: int
    holdout_escaped: int
    status: Literal["pass", "fail"]


class ValidationOut(BaseModel):
    rows: list[ValidationRowOut]
    overall_recall: RecallOut | None
    errors: list[str]


class RunOut(BaseModel):
    run_id: str
    dataset_version: str
    parameters: RunRequest
    proposals: list[ProposalOut]
    validation: ValidationOut


class SweepRequest(BaseModel):
    dataset_version: str
    percentiles: list[float] = Field(min_length=1)
    margin: MarginIn = MarginIn()

    @field_validator("percentiles")
    @classmethod
    def _percentiles_in_range(cls, values: list[float]) -> list[float]:
        for p in values:
            if not 0 <= p <= 100:
                raise ValueError(f"percentile {p} outside [0, 100]")
        return values


class SweepPointOut(BaseModel):
    p: float
    total_false_calls_before: int
    total_false_calls_after: int
    reduction_fraction: float
    defects_total: int
    defects_flagged: int
    guard_activations: int
    parts_exceeding_current: int
    annotations: list[str]


class DecisionRequest(BaseModel):
    decision: Literal["approved", "rejected"]
    decided_by: str
    note: str | None = None


class DecisionOut(BaseModel):
    proposal_id: str
    decision: Literal["approved", "rejected"]
    decided_by: str
    decided_at: str
    note: str | None


class PartSummaryOut(BaseModel):
    key: PartKeyOut
    current_tolerance: float
    false_calls: int
    defects: int
    passes: int
    models: list[str]


class HistogramOut(BaseModel):
    bin_edges: list[float]
    counts: list[int]
    markers: dict[str, float | None]
