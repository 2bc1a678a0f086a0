"""Holdout validation of proposed tolerances.

Selects the parts with the most confirmed defects, splits each part's
defects 70/30, re-optimises on the training share, and checks that every
holdout defect is still flagged under the proposed tolerance. Recall over
the holdout is the protocol's sole quality metric.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from datetime import datetime
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import EmptySample, ParameterError
from .ingest import PartDataset, PartKey
from .optimizer import (
    DEFAULT_MARGIN,
    SafetyMargin,
    ToleranceProposal,
    flag,
    optimize_part,
)
from .quantile import PercentileSpec


@dataclass(frozen=True)
class SplitPolicy:
    """How defects are partitioned into train/holdout.

    Chronological ordering needs timestamps; when they are unavailable the
    policy degrades to a seeded uniform shuffle so the split stays
    deterministic and unbiased. The seed is combined with the part key, so
    per-part splits do not depend on how many other parts are processed.
    """

    kind: str = "chronological"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("chronological", "shuffle"):
            raise ParameterError(f"unknown split policy {self.kind!r}")


def _train_size(n: int, ratio: float) -> int:
    # floor() on the binary float ratio miscounts (e.g. floor(0.7*90) == 62),
    # so the ratio is treated as the decimal the caller wrote.
    return int(Fraction(str(ratio)) * n)


@dataclass(frozen=True)
class DefectSplit:
    key: PartKey | None
    train_defects: tuple[float, ...]
    holdout_defects: tuple[float, ...]
    policy: str

    @property
    def total(self) -> int:
        return len(self.train_defects) + len(self.holdout_defects)


@dataclass(frozen=True)
class RecallValue:
    tp: int
    fn: int
    recall: float


@dataclass(frozen=True)
class ValidationRow:
    key: PartKey
    train_defect_count: int
    holdout_defect_count: int
    holdout_flagged: int
    holdout_escaped: int
    status: str  # "pass" | "fail"


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple[ValidationRow, ...]
    overall: RecallValue
    errors: tuple[str, ...] = ()


def select_top_parts(
    datasets: Mapping[PartKey, PartDataset],
    k: int = 5,
) -> list[PartKey]:
    """Keys of the k parts with the most confirmed defects.

    Ties break by ascending key; parts without defects never qualify, so
    fewer than k keys may come back.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    defective = [key for key, ds in datasets.items() if ds.defect_values]
    defective.sort(key=lambda key: (-len(datasets[key].defect_values), key))
    return defective[:k]


def split_defects(
    defects: Sequence[float],
    ratio: float = 0.7,
    policy: SplitPolicy = SplitPolicy(),
    *,
    timestamps: Sequence[datetime | None] | None = None,
    key: PartKey | None = None,
) -> DefectSplit:
    """Partition defect values into train (floor(ratio*n)) and holdout.

    Chronological policy orders by timestamp with input order breaking
    ties; without a full set of timestamps it falls back to a seeded
    shuffle, recorded in the split's policy descriptor.
    """
    n = len(defects)
    if n == 0:
        raise EmptySample("cannot split zero defects")
    if not (0.0 < ratio < 1.0):
        raise ParameterError(f"split ratio must lie in (0, 1), got {ratio!r}")

    order = list(range(n))
    if policy.kind == "chronological" and timestamps is not None and all(
        t is not None for t in timestamps
    ):
        if len(timestamps) != n:
            raise ParameterError("timestamps and defects differ in length")
        order.sort(key=lambda i: (timestamps[i], i))
        descriptor = "chronological"
    else:
        rng = random.Random(f"{policy.seed}|{key if key is not None else ''}")
        rng.shuffle(order)
        descriptor = f"shuffle(seed={policy.seed})"
        if policy.kind == "chronological":
            descriptor = f"chronological-fallback-{descriptor}"

    train_size = _train_size(n, ratio)
    train = tuple(defects[i] for i in order[:train_size])
    holdout = tuple(defects[i] for i in order[train_size:])
    return DefectSplit(key=key, train_defects=train, holdout_defects=holdout, policy=descriptor)


def recall(tp: int, fn: int) -> RecallValue:
    """TP / (TP + FN); an empty denominator cannot evidence an escape."""
    if tp < 0 or fn < 0:
        raise ParameterError("counts must be non-negative")
    value = tp / (tp + fn) if (tp + fn) > 0 else 1.0
    return RecallValue(tp=tp, fn=fn, recall=value)


def validate_part(
    proposal: ToleranceProposal,
    holdout: Sequence[float],
) -> ValidationRow:
    """Count how many holdout defects the proposed tolerance still flags."""
    flagged = sum(1 for d in holdout if flag(d, proposal.final_tolerance))
    escaped = len(holdout) - flagged
    return ValidationRow(
        key=proposal.key,
        train_defect_count=proposal.defects_total,
        holdout_defect_count=len(holdout),
        holdout_flagged=flagged,
        holdout_escaped=escaped,
        status="pass" if escaped == 0 else "fail",
    )


def run_validation_protocol(
    datasets: Mapping[PartKey, PartDataset],
    p: float | PercentileSpec,
    margin: SafetyMargin | float = DEFAULT_MARGIN,
    k: int = 5,
    ratio: float = 0.7,
    policy: SplitPolicy = SplitPolicy(),
) -> ValidationReport:
    """Full Step-6 protocol over the top-k defect-bearing parts.

    For each selected part, defects are split, the tolerance is
    re-optimised on all false calls plus the training defects, and the
    holdout is checked against the result. Escapes can only ever originate
    from holdout values: the guard makes training defects unmissable, and
    that is re-asserted on every run.
    """
    top = select_top_parts(datasets, k)
    if not top:
        raise EmptySample("validation needs at least one part with a confirmed defect")

    rows: list[ValidationRow] = []
    errors: list[str] = []
    tp = 0
    fn = 0
    for key in top:
        dataset = datasets[key]
        try:
            split = split_defects(
                dataset.defect_values, ratio=ratio, policy=policy, key=key
            )
            training = replace(dataset, defect_values=split.train_defects)
            proposal = optimize_part(training, p, margin)
        except EmptySample as exc:
            errors.append(f"{key}: {exc}")
            continue
        unflagged_train = [d for d in split.train_defects if not flag(d, proposal.final_tolerance)]
        if unflagged_train:
            raise AssertionError(
                f"{key}: training defects escaped the guard: {unflagged_train}"
            )
        row = validate_part(proposal, split.holdout_defects)
        rows.append(row)
        tp += row.holdout_flagged
        fn += row.holdout_escaped
    return ValidationReport(rows=tuple(rows), overall=recall(tp, fn), errors=tuple(errors))


def validation_report_to_csv(report: ValidationReport) -> str:
    """Table-shaped export: one row per part plus an overall-recall footer."""
    lines = ["part_number,inspection_type,train_defect_count,holdout_defect_count,"
             "holdout_flagged,holdout_escaped,status"]
    for row in report.rows:
        lines.append(
            f"{row.key.part_number},{row.key.inspection_type},{row.train_defect_count},"
            f"{row.holdout_defect_count},{row.holdout_flagged},{row.holdout_escaped},{row.status}"
        )
    lines.append(f"# overall_recall={report.overall.recall!r} "
                 f"(tp={report.overall.tp} fn={report.overall.fn})")
    return "\n".join(lines) + "\n"
