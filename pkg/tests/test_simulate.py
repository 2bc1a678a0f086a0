import copy

import pytest

from tolopt.errors import EmptySample, ParameterError, SpecError
from tolopt.ingest import check_dataset_invariants
from tolopt.optimizer import SafetyMargin, optimize_all, optimize_part
from tolopt.simulate import (
    DistributionSpec,
    SyntheticSpec,
    ToleranceMarkers,
    aggregate_report,
    generate_synthetic,
    histogram,
    sweep,
)


class TestSweep:
    def test_decade_example(self, decade_part):
        points = sweep({decade_part.key: decade_part}, [80], SafetyMargin.absolute(1.0))
        assert len(points) == 1
        point = points[0]
        assert point.total_false_calls_before == 10
        assert point.total_false_calls_after == 8
        assert point.reduction_fraction == pytest.approx(0.2)
        assert point.guard_activations == 0

    def test_p100_keeps_all_but_the_maximum(self, decade_part):
        points = sweep({decade_part.key: decade_part}, [100], SafetyMargin.absolute(1.0))
        assert points[0].total_false_calls_after == 9

    def test_empty_percentile_list_rejected(self, decade_part):
        with pytest.raises(ParameterError):
            sweep({decade_part.key: decade_part}, [])

    def test_points_ordered_by_percentile(self, decade_part):
        points = sweep({decade_part.key: decade_part}, [95, 50, 80])
        assert [point.p for point in points] == [50, 80, 95]

    def test_purity_datasets_untouched(self, decade_part):
        datasets = {decade_part.key: decade_part}
        snapshot = copy.deepcopy(datasets)
        sweep(datasets, [50, 80, 99])
        assert datasets == snapshot

    def test_monotone_when_no_guard(self):
        datasets = generate_synthetic(SyntheticSpec(part_count=10, seed=5, defect_rate=0.0))
        points = sweep(datasets, [50, 60, 70, 80, 90, 99])
        assert all(point.guard_activations == 0 for point in points)
        after = [point.total_false_calls_after for point in points]
        assert after == sorted(after)


class TestAggregateReport:
    def test_totals(self):
        datasets = generate_synthetic(SyntheticSpec(part_count=3, seed=2))
        proposals, _ = optimize_all(datasets, 80)
        summary = aggregate_report(proposals, datasets)
        assert summary.total_false_calls_before == sum(p.false_calls_before for p in proposals)
        assert summary.total_false_calls_after == sum(p.false_calls_after for p in proposals)
        assert len(summary.breakdown) == 3
        assert all(row.model for row in summary.breakdown)

    def test_reduction_arithmetic(self):
        datasets = generate_synthetic(SyntheticSpec(part_count=2, seed=3, defect_rate=0.0))
        proposals, _ = optimize_all(datasets, 80)
        summary = aggregate_report(proposals)
        expected = 1 - summary.total_false_calls_after / summary.total_false_calls_before
        assert summary.reduction_fraction == pytest.approx(expected)

    def test_empty_is_all_zero(self):
        summary = aggregate_report([])
        assert summary.total_false_calls_before == 0
        assert summary.reduction_fraction == 0.0
        assert summary.breakdown == ()


class TestHistogram:
    def test_hand_binned_example(self):
        data = histogram([1.0, 2.0, 3.0, 4.0], bin_count=2)
        assert data.bin_edges == (1.0, 2.5, 4.0)
        assert data.counts == (2, 2)

    def test_single_value_widens_to_unit_range(self):
        data = histogram([5.0], bin_count=1)
        assert data.bin_edges == (4.5, 5.5)
        assert data.counts == (1,)

    def test_maximum_lands_in_last_bin(self):
        data = histogram([0.0, 10.0], bin_count=10)
        assert data.counts[-1] == 1

    def test_markers_carried_through(self):
        markers = ToleranceMarkers(current_tolerance=45.0, optimised_tolerance=42.3)
        data = histogram([40.0, 41.0, 44.0], bin_count=4, markers=markers)
        assert data.markers == markers

    def test_conservation(self):
        values = [float(v % 17) for v in range(123)]
        for bins in (1, 2, 7, 30):
            assert sum(histogram(values, bin_count=bins).counts) == len(values)

    def test_empty_rejected(self):
        with pytest.raises(EmptySample):
            histogram([], bin_count=3)

    def test_bad_bin_count_rejected(self):
        with pytest.raises(ParameterError):
            histogram([1.0], bin_count=0)


class TestGenerator:
    def test_deterministic_for_seed(self):
        spec = SyntheticSpec(part_count=5, seed=42)
        assert generate_synthetic(spec) == generate_synthetic(spec)

    def test_different_seed_differs(self):
        a = generate_synthetic(SyntheticSpec(part_count=5, seed=1))
        b = generate_synthetic(SyntheticSpec(part_count=5, seed=2))
        assert a != b

    def test_generated_datasets_pass_invariant_checker(self):
        datasets = generate_synthetic(SyntheticSpec(part_count=30, seed=7))
        assert len(datasets) == 30
        for ds in datasets.values():
            check_dataset_invariants(ds)

    def test_zero_defect_rate(self):
        datasets = generate_synthetic(SyntheticSpec(part_count=10, seed=3, defect_rate=0.0))
        assert all(ds.defect_values == () for ds in datasets.values())

    def test_adversarial_defects_trigger_guard(self):
        spec = SyntheticSpec(
            part_count=6,
            seed=11,
            false_calls_per_part=(30, 60),
            defect_rate=0.2,
            defect_distribution=DistributionSpec("near_tolerance", {"frac": 0.999}),
        )
        datasets = generate_synthetic(spec)
        fired = 0
        for ds in datasets.values():
            if not ds.defect_values:
                continue
            proposal = optimize_part(ds, 80)
            assert proposal.guard.applied is True
            fired += 1
        assert fired > 0

    def test_infeasible_specs_rejected(self):
        with pytest.raises(SpecError):
            SyntheticSpec(part_count=0).validated()
        with pytest.raises(SpecError):
            SyntheticSpec(defect_rate=1.5).validated()
        with pytest.raises(SpecError):
            SyntheticSpec(tolerance_range=(0.0, 10.0)).validated()
        with pytest.raises(SpecError):
            DistributionSpec("uniform", {"low": 0.9, "high": 0.2}).validated()
        with pytest.raises(SpecError):
            DistributionSpec("near_tolerance", {"frac": 1.2}).validated()
        with pytest.raises(SpecError):
            DistributionSpec("unknown").validated()

    def test_spec_json_round_trip(self):
        spec = SyntheticSpec(part_count=4, seed=9, defect_rate=0.05)
        assert SyntheticSpec.from_dict(spec.to_dict()) == spec
