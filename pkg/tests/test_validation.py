from dataclasses import replace
from datetime import datetime, timedelta, timezone

import pytest

from tolopt.errors import EmptySample, ParameterError
from tolopt.ingest import PartDataset, PartKey
from tolopt.optimizer import SafetyMargin, ToleranceProposal, optimize_part
from tolopt.validation import (
    SplitPolicy,
    recall,
    run_validation_protocol,
    select_top_parts,
    split_defects,
    validate_part,
    validation_report_to_csv,
)


def dataset(number: str, defects, false_calls=(50.0, 60.0, 70.0), tolerance=101.0):
    return PartDataset(
        key=PartKey(number, "solder"),
        current_tolerance=tolerance,
        false_call_values=tuple(float(v) for v in false_calls),
        defect_values=tuple(float(d) for d in defects),
    )


# Nine defects, eight benign and one close to the current tolerance. Seed 0
# shuffles the high one into the holdout (escape); seed 1 keeps it in
# training where the guard absorbs it.
PLANT_ESCAPE_SEED = 0
PLANT_GUARDED_SEED = 1


def planted_part() -> PartDataset:
    return PartDataset(
        key=PartKey("PE", "solder"),
        current_tolerance=101.0,
        false_call_values=tuple(float(v) for v in range(10, 101, 10)),
        defect_values=tuple([40.0] * 8 + [97.0]),
    )


class TestSelectTopParts:
    def test_table_counts_order(self):
        counts = {"A": 41, "B": 116, "C": 27, "D": 32, "E": 34, "F": 2}
        datasets = {
            PartKey(name, "solder"): dataset(name, [1.0] * n) for name, n in counts.items()
        }
        top = select_top_parts(datasets, k=5)
        assert [k.part_number for k in top] == ["B", "A", "E", "D", "C"]

    def test_k_one_picks_the_maximum(self):
        datasets = {
            PartKey(n, "solder"): dataset(n, [1.0] * c)
            for n, c in (("A", 41), ("B", 116))
        }
        assert [k.part_number for k in select_top_parts(datasets, k=1)] == ["B"]

    def test_defect_free_parts_never_selected(self):
        datasets = {PartKey("A", "solder"): dataset("A", [])}
        assert select_top_parts(datasets, k=5) == []

    def test_tie_breaks_by_key(self):
        datasets = {
            PartKey(n, "solder"): dataset(n, [1.0] * 3) for n in ("PZ", "PA", "PM")
        }
        assert [k.part_number for k in select_top_parts(datasets, k=3)] == ["PA", "PM", "PZ"]

    def test_k_must_be_positive(self):
        with pytest.raises(ParameterError):
            select_top_parts({}, k=0)


class TestSplitDefects:
    @pytest.mark.parametrize(
        "n,train,holdout",
        [(41, 28, 13), (116, 81, 35), (27, 18, 9), (32, 22, 10), (34, 23, 11), (10, 7, 3)],
    )
    def test_split_sizes(self, n, train, holdout):
        split = split_defects([float(i) for i in range(n)], 0.7, SplitPolicy(seed=3))
        assert (len(split.train_defects), len(split.holdout_defects)) == (train, holdout)

    def test_empty_rejected(self):
        with pytest.raises(EmptySample):
            split_defects([], 0.7)

    def test_bad_ratio_rejected(self):
        with pytest.raises(ParameterError):
            split_defects([1.0], ratio=1.0)

    def test_partition_is_exact(self):
        values = [float(i) for i in range(23)]
        split = split_defects(values, 0.7, SplitPolicy(seed=8))
        assert sorted(split.train_defects + split.holdout_defects) == values

    def test_deterministic_given_seed(self):
        values = [float(i) for i in range(20)]
        a = split_defects(values, 0.7, SplitPolicy(seed=5), key=PartKey("P", "s"))
        b = split_defects(values, 0.7, SplitPolicy(seed=5), key=PartKey("P", "s"))
        assert a == b
        c = split_defects(values, 0.7, SplitPolicy(seed=6), key=PartKey("P", "s"))
        assert (c.train_defects, c.holdout_defects) != (a.train_defects, a.holdout_defects)

    def test_chronological_uses_timestamps(self):
        base = datetime(2024, 1, 1, tzinfo=timezone.utc)
        values = [10.0, 20.0, 30.0, 40.0]
        # Newest first on purpose: chronological order must invert the input.
        stamps = [base + timedelta(days=4 - i) for i in range(4)]
        split = split_defects(values, 0.5, timestamps=stamps)
        assert split.train_defects == (40.0, 30.0)
        assert split.policy == "chronological"

    def test_chronological_without_timestamps_falls_back_to_shuffle(self):
        split = split_defects([1.0, 2.0, 3.0], 0.7, SplitPolicy(seed=4))
        assert split.policy.startswith("chronological-fallback-shuffle")


class TestRecall:
    def test_table_row(self):
        assert recall(13, 0).recall == 1.0

    def test_partial(self):
        assert recall(3, 1).recall == 0.75

    def test_vacuous_convention(self):
        assert recall(0, 0).recall == 1.0

    def test_negative_counts_rejected(self):
        with pytest.raises(ParameterError):
            recall(-1, 0)


class TestValidatePart:
    @staticmethod
    def proposal(final: float) -> ToleranceProposal:
        ds = dataset("P1", [40.0, 41.0], false_calls=(43.0, 44.0), tolerance=45.0)
        base = optimize_part(ds, 80, SafetyMargin.absolute(0.1))
        return replace(base, final_tolerance=final)

    def test_all_flagged_passes(self):
        row = validate_part(self.proposal(44.2), (40.0, 41.0, 43.0))
        assert (row.holdout_flagged, row.holdout_escaped, row.status) == (3, 0, "pass")

    def test_escape_fails(self):
        row = validate_part(self.proposal(44.2), (45.0,))
        assert (row.holdout_flagged, row.holdout_escaped, row.status) == (0, 1, "fail")

    def test_empty_holdout_passes(self):
        row = validate_part(self.proposal(44.2), ())
        assert row.status == "pass" and row.holdout_defect_count == 0


class TestProtocol:
    def test_well_separated_all_pass(self):
        # Every defect sits far below every false call, so any sensible
        # candidate keeps flagging the whole holdout.
        datasets = {}
        for i, n_def in enumerate((12, 9, 8, 7, 6, 5)):
            ds = dataset(
                f"P{i}",
                defects=[5.0 + 0.1 * j for j in range(n_def)],
                false_calls=[50.0 + j for j in range(40)],
            )
            datasets[ds.key] = ds
        report = run_validation_protocol(datasets, 80, k=5, policy=SplitPolicy(seed=7))
        assert len(report.rows) == 5
        assert all(row.status == "pass" for row in report.rows)
        assert report.overall.recall == 1.0

    def test_planted_escape_fails(self):
        ds = planted_part()
        report = run_validation_protocol(
            {ds.key: ds}, 80, k=5, policy=SplitPolicy(seed=PLANT_ESCAPE_SEED)
        )
        row = report.rows[0]
        assert row.status == "fail" and row.holdout_escaped == 1
        assert report.overall.recall < 1.0

    def test_same_plant_guarded_when_high_defect_trains(self):
        ds = planted_part()
        report = run_validation_protocol(
            {ds.key: ds}, 80, k=5, policy=SplitPolicy(seed=PLANT_GUARDED_SEED)
        )
        assert report.rows[0].status == "pass"
        assert report.overall.recall == 1.0

    def test_k_beyond_defective_parts(self):
        datasets = {d.key: d for d in (dataset("PA", [1.0, 2.0]), dataset("PB", []))}
        report = run_validation_protocol(datasets, 80, k=5)
        assert [row.key.part_number for row in report.rows] == ["PA"]

    def test_no_defective_parts_rejected(self):
        datasets = {PartKey("A", "solder"): dataset("A", [])}
        with pytest.raises(EmptySample):
            run_validation_protocol(datasets, 80)

    def test_deterministic_given_seed(self):
        ds = planted_part()
        kwargs = dict(k=5, policy=SplitPolicy(seed=21))
        first = run_validation_protocol({ds.key: ds}, 80, **kwargs)
        second = run_validation_protocol({ds.key: ds}, 80, **kwargs)
        assert first == second

    def test_train_counts_follow_split_rule(self):
        counts = (41, 116, 27, 32, 34)
        datasets = {}
        for i, n in enumerate(counts):
            ds = dataset(f"P{i}", defects=[6.0 + 0.01 * j for j in range(n)])
            datasets[ds.key] = ds
        report = run_validation_protocol(datasets, 80, k=5)
        got = {
            row.key.part_number: (row.train_defect_count, row.holdout_defect_count)
            for row in report.rows
        }
        assert got == {
            "P0": (28, 13),
            "P1": (81, 35),
            "P2": (18, 9),
            "P3": (22, 10),
            "P4": (23, 11),
        }


class TestReportExport:
    def test_csv_shape_and_footer(self):
        ds = planted_part()
        report = run_validation_protocol(
            {ds.key: ds}, 80, k=5, policy=SplitPolicy(seed=PLANT_ESCAPE_SEED)
        )
        text = validation_report_to_csv(report)
        lines = text.strip().splitlines()
        assert lines[0] == (
            "part_number,inspection_type,train_defect_count,holdout_defect_count,"
            "holdout_flagged,holdout_escaped,status"
        )
        assert lines[1] == "PE,solder,6,3,2,1,fail"
        assert lines[-1].startswith("# overall_recall=")
