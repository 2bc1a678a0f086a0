"""What-if simulation: percentile sweeps, aggregate reports, histogram
data, and a seeded synthetic dataset generator.

Sweeps never mutate the datasets they evaluate; engineers can explore
percentile choices freely before touching the real machine settings.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import EmptySample, ParameterError, SpecError
from .ingest import PartDataset, PartKey, check_dataset_invariants
from .optimizer import (
    DEFAULT_MARGIN,
    SafetyMargin,
    ToleranceProposal,
    optimize_all,
)

# Brackets the percentiles the method is typically run at (75 and 80).
DEFAULT_SWEEP_GRID = (50.0, 55.0, 60.0, 65.0, 70.0, 75.0, 80.0, 85.0, 90.0, 95.0, 99.0)

DEFAULT_HISTOGRAM_BINS = 30


@dataclass(frozen=True)
class SweepPoint:
    p: float
    total_false_calls_before: int
    total_false_calls_after: int
    reduction_fraction: float
    defects_total: int
    defects_flagged: int
    guard_activations: int
    parts_exceeding_current: int
    annotations: tuple[str, ...] = ()


def sweep(
    datasets: Mapping[PartKey, PartDataset],
    percentiles: Sequence[float],
    margin: SafetyMargin | float = DEFAULT_MARGIN,
) -> list[SweepPoint]:
    """Evaluate the whole optimisation at each percentile, lowest first."""
    if not percentiles:
        raise ParameterError("sweep needs at least one percentile")
    points = []
    for p in sorted(float(p) for p in percentiles):
        proposals, errors = optimize_all(datasets, p, margin)
        before = sum(pr.false_calls_before for pr in proposals)
        after = sum(pr.false_calls_after for pr in proposals)
        points.append(
            SweepPoint(
                p=p,
                total_false_calls_before=before,
                total_false_calls_after=after,
                reduction_fraction=(before - after) / before if before > 0 else 0.0,
                defects_total=sum(pr.defects_total for pr in proposals),
                defects_flagged=sum(pr.defects_flagged_after for pr in proposals),
                guard_activations=sum(1 for pr in proposals if pr.guard.applied),
                parts_exceeding_current=sum(1 for pr in proposals if pr.exceeds_current),
                annotations=tuple(f"{e.key}: {e.message}" for e in errors),
            )
        )
    return points


def sweep_point_to_dict(point: SweepPoint) -> dict:
    return {
        "p": point.p,
        "total_false_calls_before": point.total_false_calls_before,
        "total_false_calls_after": point.total_false_calls_after,
        "reduction_fraction": point.reduction_fraction,
        "defects_total": point.defects_total,
        "defects_flagged": point.defects_flagged,
        "guard_activations": point.guard_activations,
        "parts_exceeding_current": point.parts_exceeding_current,
        "annotations": list(point.annotations),
    }


def sweep_to_jsonl(points: Iterable[SweepPoint]) -> str:
    return "".join(json.dumps(sweep_point_to_dict(p)) + "\n" for p in points)


@dataclass(frozen=True)
class PartBreakdownRow:
    model: str
    key: PartKey
    current_tolerance: float
    false_calls_before: int
    defects_total: int
    final_tolerance: float
    false_calls_after: int
    defects_flagged_after: int


@dataclass(frozen=True)
class RunSummary:
    total_false_calls_before: int
    total_false_calls_after: int
    reduction_fraction: float
    defects_total: int
    defects_flagged: int
    guard_activations: int
    parts_exceeding_current: int
    breakdown: tuple[PartBreakdownRow, ...]


def aggregate_report(
    proposals: Sequence[ToleranceProposal],
    datasets: Mapping[PartKey, PartDataset] | None = None,
) -> RunSummary:
    """Run-level totals plus a per-part breakdown table.

    ``datasets`` is only consulted for the model-id column; proposals alone
    carry every number.
    """
    before = sum(p.false_calls_before for p in proposals)
    after = sum(p.false_calls_after for p in proposals)

    def model_of(key: PartKey) -> str:
        if datasets and key in datasets:
            return ";".join(datasets[key].models)
        return ""

    breakdown = tuple(
        PartBreakdownRow(
            model=model_of(p.key),
            key=p.key,
            current_tolerance=p.current_tolerance,
            false_calls_before=p.false_calls_before,
            defects_total=p.defects_total,
            final_tolerance=p.final_tolerance,
            false_calls_after=p.false_calls_after,
            defects_flagged_after=p.defects_flagged_after,
        )
        for p in proposals
    )
    return RunSummary(
        total_false_calls_before=before,
        total_false_calls_after=after,
        reduction_fraction=(before - after) / before if before > 0 else 0.0,
        defects_total=sum(p.defects_total for p in proposals),
        defects_flagged=sum(p.defects_flagged_after for p in proposals),
        guard_activations=sum(1 for p in proposals if p.guard.applied),
        parts_exceeding_current=sum(1 for p in proposals if p.exceeds_current),
        breakdown=breakdown,
    )


@dataclass(frozen=True)
class ToleranceMarkers:
    current_tolerance: float
    optimised_tolerance: float | None = None


@dataclass(frozen=True)
class HistogramData:
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    markers: ToleranceMarkers


def histogram(
    values: Sequence[float],
    bin_count: int = DEFAULT_HISTOGRAM_BINS,
    markers: ToleranceMarkers | None = None,
) -> HistogramData:
    """Equal-width binning over [min, max]; the maximum lands in the last bin.

    A degenerate range (all values equal) widens to unit width around the
    value so the single bin stays well-defined.
    """
    if not values:
        raise EmptySample("cannot bin an empty sample")
    if bin_count < 1:
        raise ParameterError(f"bin_count must be >= 1, got {bin_count}")
    lo = min(values)
    hi = max(values)
    if lo == hi:
        lo -= 0.5
        hi += 0.5
    span = hi - lo
    edges = tuple(lo + span * i / bin_count for i in range(bin_count + 1))
    counts = [0] * bin_count
    for v in values:
        idx = min(int((v - lo) / span * bin_count), bin_count - 1)
        counts[idx] += 1
    return HistogramData(
        bin_edges=edges,
        counts=tuple(counts),
        markers=markers if markers is not None else ToleranceMarkers(current_tolerance=hi),
    )


def histogram_to_dict(data: HistogramData) -> dict:
    return {
        "bin_edges": list(data.bin_edges),
        "counts": list(data.counts),
        "markers": {
            "current_tolerance": data.markers.current_tolerance,
            "optimised_tolerance": data.markers.optimised_tolerance,
        },
    }


@dataclass(frozen=True)
class DistributionSpec:
    """A value distribution expressed as fractions of the part tolerance.

    Families:
      uniform          -- params low/high, support [low*t, high*t) capped at t
      truncated_normal -- params mean/sd, rejection-sampled below t
      near_tolerance   -- params frac, the constant frac*t (adversarial)
    """

    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    def validated(self) -> "DistributionSpec":
        if self.family == "uniform":
            low = self.params.get("low", 0.5)
            high = self.params.get("high", 1.0)
            if not (0.0 <= low < high <= 1.0):
                raise SpecError(f"uniform needs 0 <= low < high <= 1, got {low}, {high}")
        elif self.family == "truncated_normal":
            sd = self.params.get("sd", 0.15)
            mean = self.params.get("mean", 0.8)
            if sd <= 0:
                raise SpecError(f"truncated_normal needs sd > 0, got {sd}")
            if mean >= 1.5:
                raise SpecError(
                    f"truncated_normal mean {mean} sits too far above the tolerance bound"
                )
        elif self.family == "near_tolerance":
            frac = self.params.get("frac", 0.999)
            if not (0.0 < frac < 1.0):
                raise SpecError(f"near_tolerance frac must lie in (0, 1), got {frac}")
        else:
            raise SpecError(f"unknown distribution family {self.family!r}")
        return self

    def sample(self, rng: random.Random, tolerance: float) -> float:
        if self.family == "uniform":
            low = self.params.get("low", 0.5) * tolerance
            high = self.params.get("high", 1.0) * tolerance
            v = rng.uniform(low, high)
        elif self.family == "truncated_normal":
            mean = self.params.get("mean", 0.8) * tolerance
            sd = self.params.get("sd", 0.15) * tolerance
            for _ in range(1000):
                v = rng.gauss(mean, sd)
                if v < tolerance:
                    break
            else:
                raise SpecError(
                    f"truncated_normal({mean}, {sd}) rarely falls below {tolerance}"
                )
        else:  # near_tolerance
            v = self.params.get("frac", 0.999) * tolerance
        # Strict below-tolerance invariant; uniform(a, b) may return b.
        return min(v, math.nextafter(tolerance, -math.inf))

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "DistributionSpec":
        return cls(family=data["family"], params=dict(data.get("params", {}))).validated()


DEFAULT_FALSE_CALL_DISTRIBUTION = DistributionSpec(
    family="truncated_normal", params={"mean": 0.8, "sd": 0.15}
)
# Defect support is kept below the false-call region so any sensible
# percentile candidate still flags every defect.
DEFAULT_DEFECT_DISTRIBUTION = DistributionSpec(
    family="uniform", params={"low": 0.05, "high": 0.45}
)


@dataclass(frozen=True)
class SyntheticSpec:
    """Self-describing recipe for a reproducible synthetic dataset."""

    part_count: int = 20
    false_calls_per_part: tuple[int, int] = (50, 400)
    false_call_distribution: DistributionSpec = DEFAULT_FALSE_CALL_DISTRIBUTION
    defect_distribution: DistributionSpec = DEFAULT_DEFECT_DISTRIBUTION
    defect_rate: float = 0.01
    seed: int = 0
    tolerance_range: tuple[float, float] = (25.0, 50.0)
    inspection_type: str = "solder"

    def validated(self) -> "SyntheticSpec":
        if self.part_count < 1:
            raise SpecError(f"part_count must be >= 1, got {self.part_count}")
        lo, hi = self.false_calls_per_part
        if not (0 <= lo <= hi):
            raise SpecError(f"false_calls_per_part range invalid: {lo}..{hi}")
        if not (0.0 <= self.defect_rate <= 1.0):
            raise SpecError(f"defect_rate must lie in [0, 1], got {self.defect_rate}")
        t_lo, t_hi = self.tolerance_range
        if not (0 < t_lo <= t_hi) or not math.isfinite(t_lo) or not math.isfinite(t_hi):
            raise SpecError(f"tolerance_range invalid: {t_lo}..{t_hi}")
        self.false_call_distribution.validated()
        self.defect_distribution.validated()
        return self

    def to_dict(self) -> dict:
        return {
            "part_count": self.part_count,
            "false_calls_per_part": list(self.false_calls_per_part),
            "false_call_distribution": self.false_call_distribution.to_dict(),
            "defect_distribution": self.defect_distribution.to_dict(),
            "defect_rate": self.defect_rate,
            "seed": self.seed,
            "tolerance_range": list(self.tolerance_range),
            "inspection_type": self.inspection_type,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SyntheticSpec":
        kwargs = dict(data)
        if "false_calls_per_part" in kwargs:
            kwargs["false_calls_per_part"] = tuple(kwargs["false_calls_per_part"])
        if "tolerance_range" in kwargs:
            kwargs["tolerance_range"] = tuple(kwargs["tolerance_range"])
        if "false_call_distribution" in kwargs:
            kwargs["false_call_distribution"] = DistributionSpec.from_dict(
                kwargs["false_call_distribution"]
            )
        if "defect_distribution" in kwargs:
            kwargs["defect_distribution"] = DistributionSpec.from_dict(
                kwargs["defect_distribution"]
            )
        return cls(**kwargs).validated()


def generate_synthetic(spec: SyntheticSpec) -> dict[PartKey, PartDataset]:
    """Deterministically generate datasets that honour every invariant.

    The same spec (seed included) always produces identical datasets; the
    generated data passes the ingest invariant checker before it is
    returned.
    """
    spec = spec.validated()
    rng = random.Random(spec.seed)
    datasets: dict[PartKey, PartDataset] = {}
    lo, hi = spec.false_calls_per_part
    for idx in range(spec.part_count):
        key = PartKey(f"P{idx + 1:04d}", spec.inspection_type)
        tolerance = round(rng.uniform(*spec.tolerance_range), 2)
        n_fc = rng.randint(lo, hi)
        false_calls = tuple(
            spec.false_call_distribution.sample(rng, tolerance) for _ in range(n_fc)
        )
        n_defects = sum(1 for _ in range(n_fc) if rng.random() < spec.defect_rate)
        defects = tuple(
            spec.defect_distribution.sample(rng, tolerance) for _ in range(n_defects)
        )
        dataset = PartDataset(
            key=key,
            current_tolerance=tolerance,
            false_call_values=false_calls,
            defect_values=defects,
            models=(f"M{idx % 5 + 1}",),
        )
        check_dataset_invariants(dataset)
        datasets[key] = dataset
    return datasets
