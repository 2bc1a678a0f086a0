"""Per-part tolerance optimisation with the defect guard.

A value is flagged iff it lies strictly below the tolerance. The candidate
tolerance is the chosen percentile of the part's false-call values; the
guard then raises it to (max defect + safety margin) whenever the worst
confirmed defect would otherwise stop being flagged, so training defects
are always retained by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import GuardIneffective, ParameterError
from .ingest import PartDataset, PartKey
from .quantile import PercentileSpec, percentile_value, sort_ascending


def flag(value: float, tolerance: float) -> bool:
    """True iff the machine would flag this measurement (value < tolerance)."""
    return value < tolerance


@dataclass(frozen=True)
class FlaggingRule:
    """Comparison semantics of the inspection.

    Only strict below-tolerance flagging exists today; the direction field
    leaves room for above-tolerance inspections (by value negation) without
    changing any call site.
    """

    direction: str = "below_tolerance"
    strict: bool = True

    def flags(self, value: float, tolerance: float) -> bool:
        if self.direction != "below_tolerance" or not self.strict:
            raise NotImplementedError("only strict below-tolerance flagging is defined")
        return flag(value, tolerance)


@dataclass(frozen=True)
class SafetyMargin:
    """Offset added above the maximum defect when the guard fires.

    Relative margins resolve against the part's current tolerance, so a
    single run-level setting scales sensibly across parts with very
    different units.
    """

    value: float
    relative: bool = False

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value > 0):
            raise ParameterError(f"safety margin must be positive, got {self.value!r}")

    @classmethod
    def absolute(cls, value: float) -> "SafetyMargin":
        return cls(value=value, relative=False)

    @classmethod
    def parse(cls, text: str) -> "SafetyMargin":
        """Parse a CLI-style margin: '1%' (relative) or '0.5' (absolute)."""
        text = text.strip()
        try:
            if text.endswith("%"):
                return cls(value=float(text[:-1]) / 100.0, relative=True)
            return cls(value=float(text), relative=False)
        except ValueError as exc:
            raise ParameterError(f"cannot parse margin {text!r}") from exc

    def resolve(self, current_tolerance: float) -> float:
        absolute = self.value * current_tolerance if self.relative else self.value
        if not (math.isfinite(absolute) and absolute > 0):
            raise ParameterError(
                f"margin resolves to {absolute!r} for tolerance {current_tolerance!r}"
            )
        return absolute

    def describe(self) -> str:
        return f"{self.value * 100:g}%" if self.relative else f"{self.value:g}"


DEFAULT_MARGIN = SafetyMargin(value=0.01, relative=True)


@dataclass(frozen=True)
class GuardOutcome:
    applied: bool
    max_defect_value: float | None
    safety_margin: float


@dataclass(frozen=True)
class ToleranceProposal:
    key: PartKey
    current_tolerance: float
    percentile_used: float
    candidate_tolerance: float
    final_tolerance: float
    guard: GuardOutcome
    false_calls_before: int
    false_calls_after: int
    defects_total: int
    defects_flagged_after: int
    exceeds_current: bool


def collect_false_call_values(part: PartDataset) -> tuple[float, ...]:
    """The measurements the percentile is computed over (may be empty)."""
    return part.false_call_values


def defect_guard(
    candidate: float,
    defects: Iterable[float],
    margin: float,
) -> tuple[float, GuardOutcome]:
    """Ensure the worst confirmed defect stays flagged.

    No defects: the candidate is retained untouched. Otherwise the maximum
    defect is compared against the candidate -- once the defect closest to
    the tolerance is flagged, every other defect is too. If it would pass,
    the candidate is discarded for (max defect + margin).

    Raises GuardIneffective when the guard must fire with margin = 0:
    under strict comparison the maximum defect itself would still escape.
    """
    if margin < 0 or not math.isfinite(margin):
        raise ParameterError(f"margin must be >= 0, got {margin!r}")
    pool = tuple(defects)
    if not pool:
        return candidate, GuardOutcome(applied=False, max_defect_value=None, safety_margin=margin)
    worst = max(pool)
    if flag(worst, candidate):
        return candidate, GuardOutcome(applied=False, max_defect_value=worst, safety_margin=margin)
    if margin == 0:
        raise GuardIneffective(
            f"guard needed for defect at {worst} but margin is 0; "
            "the defect would sit exactly on the new tolerance and escape"
        )
    return worst + margin, GuardOutcome(applied=True, max_defect_value=worst, safety_margin=margin)


def optimize_part(
    part: PartDataset,
    p: float | PercentileSpec,
    margin: SafetyMargin | float = DEFAULT_MARGIN,
) -> ToleranceProposal:
    """Steps 1-5 for a single part: percentile candidate, then guard.

    With no false calls the current tolerance is retained (no statistical
    basis for change); the guard is still evaluated against the defects,
    which it passes trivially because every defect lies below the current
    tolerance by dataset invariant.
    """
    spec = p if isinstance(p, PercentileSpec) else PercentileSpec(float(p))
    margin_spec = margin if isinstance(margin, SafetyMargin) else SafetyMargin.absolute(margin)
    margin_abs = margin_spec.resolve(part.current_tolerance)

    false_calls = collect_false_call_values(part)
    if false_calls:
        candidate = percentile_value(sort_ascending(false_calls), spec)
    else:
        candidate = part.current_tolerance
    final, guard = defect_guard(candidate, part.defect_values, margin_abs)

    after = sum(1 for x in false_calls if flag(x, final))
    defects_flagged = sum(1 for d in part.defect_values if flag(d, final))
    proposal = ToleranceProposal(
        key=part.key,
        current_tolerance=part.current_tolerance,
        percentile_used=spec.p,
        candidate_tolerance=candidate,
        final_tolerance=final,
        guard=guard,
        false_calls_before=len(false_calls),
        false_calls_after=after,
        defects_total=len(part.defect_values),
        defects_flagged_after=defects_flagged,
        exceeds_current=final > part.current_tolerance,
    )
    if proposal.defects_flagged_after != proposal.defects_total:
        raise AssertionError(
            f"{part.key}: guard failed to retain all defects "
            f"({proposal.defects_flagged_after}/{proposal.defects_total})"
        )
    return proposal


@dataclass(frozen=True)
class PartError:
    key: PartKey
    message: str


def optimize_all(
    datasets: Mapping[PartKey, PartDataset],
    p: float | PercentileSpec,
    margin: SafetyMargin | float = DEFAULT_MARGIN,
) -> tuple[list[ToleranceProposal], list[PartError]]:
    """Optimise every part, key-sorted; per-part errors never abort the batch."""
    proposals: list[ToleranceProposal] = []
    errors: list[PartError] = []
    for key in sorted(datasets):
        try:
            proposals.append(optimize_part(datasets[key], p, margin))
        except (GuardIneffective, ParameterError) as exc:
            errors.append(PartError(key=key, message=str(exc)))
    return proposals, errors


def proposal_to_dict(proposal: ToleranceProposal) -> dict:
    """Canonical wire/export form; field names match the proposal exactly."""
    return {
        "key": {
            "part_number": proposal.key.part_number,
            "inspection_type": proposal.key.inspection_type,
        },
        "current_tolerance": proposal.current_tolerance,
        "percentile_used": proposal.percentile_used,
        "candidate_tolerance": proposal.candidate_tolerance,
        "final_tolerance": proposal.final_tolerance,
        "guard": {
            "applied": proposal.guard.applied,
            "max_defect_value": proposal.guard.max_defect_value,
            "safety_margin": proposal.guard.safety_margin,
        },
        "false_calls_before": proposal.false_calls_before,
        "false_calls_after": proposal.false_calls_after,
        "defects_total": proposal.defects_total,
        "defects_flagged_after": proposal.defects_flagged_after,
        "exceeds_current": proposal.exceeds_current,
    }


def proposal_from_dict(data: Mapping) -> ToleranceProposal:
    guard = data["guard"]
    return ToleranceProposal(
        key=PartKey(data["key"]["part_number"], data["key"]["inspection_type"]),
        current_tolerance=data["current_tolerance"],
        percentile_used=data["percentile_used"],
        candidate_tolerance=data["candidate_tolerance"],
        final_tolerance=data["final_tolerance"],
        guard=GuardOutcome(
            applied=guard["applied"],
            max_defect_value=guard["max_defect_value"],
            safety_margin=guard["safety_margin"],
        ),
        false_calls_before=data["false_calls_before"],
        false_calls_after=data["false_calls_after"],
        defects_total=data["defects_total"],
        defects_flagged_after=data["defects_flagged_after"],
        exceeds_current=data["exceeds_current"],
    )


def proposals_to_jsonl(proposals: Sequence[ToleranceProposal]) -> str:
    """One JSON object per proposal, in input order."""
    return "".join(json.dumps(proposal_to_dict(p)) + "\n" for p in proposals)


def proposals_from_jsonl(text: str) -> list[ToleranceProposal]:
    return [proposal_from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
