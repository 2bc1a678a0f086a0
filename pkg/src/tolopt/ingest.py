"""Parsing and grouping of raw AOI inspection exports.

The canonical input is UTF-8 comma-delimited text with a header row and
columns ``model, part_number, inspection_type, value, tolerance,
machine_flagged, disposition[, timestamp]``. Rows that fail validation are
rejected or quarantined individually; only a missing header column aborts
a parse.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Mapping

from .errors import SchemaError

REQUIRED_COLUMNS = (
    "model",
    "part_number",
    "inspection_type",
    "value",
    "tolerance",
    "machine_flagged",
    "disposition",
)
OPTIONAL_COLUMNS = ("timestamp",)

_EXPORT_MODEL_FALLBACK = "NA"


class Disposition(enum.Enum):
    """Human review outcome for a machine-flagged inspection."""

    TRUE_DEFECT = "true_defect"
    FALSE_CALL = "false_call"
    NOT_REVIEWED = "not_reviewed"


class RejectReason(enum.Enum):
    MISSING_FIELD = "missing_field"
    NON_NUMERIC = "non_numeric"
    INCONSISTENT_FLAG = "inconsistent_flag"
    CONFLICTING_TOLERANCE = "conflicting_tolerance"


@dataclass(frozen=True)
class RejectEntry:
    row_index: int
    reason: RejectReason


@dataclass
class RejectLog:
    """Per-row rejection record; each rejected row appears exactly once."""

    entries: list[RejectEntry] = field(default_factory=list)

    def add(self, row_index: int, reason: RejectReason) -> None:
        self.entries.append(RejectEntry(row_index, reason))

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for entry in self.entries:
            out[entry.reason.value] = out.get(entry.reason.value, 0) + 1
        return out

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class InspectionRecord:
    """One measured feature instance on one part.

    ``row_index`` is provenance only: the 0-based position of the source
    row among the data rows (header excluded). It never participates in
    equality-sensitive logic.
    """

    model_id: str
    part_number: str
    inspection_type: str
    measured_value: float
    tolerance_at_inspection: float
    machine_flagged: bool
    disposition: Disposition
    timestamp: datetime | None = None
    row_index: int | None = None


@dataclass(frozen=True, order=True)
class PartKey:
    part_number: str
    inspection_type: str

    def __str__(self) -> str:
        return f"{self.part_number}/{self.inspection_type}"


@dataclass(frozen=True)
class PartDataset:
    """All accepted measurements for one (part number, inspection type) key.

    Value tuples preserve input row order. ``models`` is the sorted set of
    PCB model identifiers seen for the key, carried as metadata only.
    """

    key: PartKey
    current_tolerance: float
    false_call_values: tuple[float, ...] = ()
    defect_values: tuple[float, ...] = ()
    pass_count: int = 0
    quarantined_count: int = 0
    unreviewed_count: int = 0
    models: tuple[str, ...] = ()

    @property
    def record_count(self) -> int:
        return (
            len(self.false_call_values)
            + len(self.defect_values)
            + self.pass_count
            + self.quarantined_count
            + self.unreviewed_count
        )


def _parse_bool(token: str) -> bool:
    lowered = token.strip().lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    raise ValueError(f"not a boolean: {token!r}")


def _parse_timestamp(token: str) -> datetime:
    # Python 3.10 fromisoformat does not accept a trailing 'Z'.
    text = token.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


def parse_records(
    source: Iterable[str] | str,
    mapping: Mapping[str, str] | None = None,
) -> tuple[list[InspectionRecord], RejectLog]:
    """Parse canonical delimited text into validated records.

    ``mapping`` maps canonical column names to the header names actually
    present; omitted canonical names map to themselves. Row order of
    accepted records is preserved. Rows with an empty required field, an
    unparsable typed field, or a human disposition on an unflagged row go
    to the reject log (first failure wins); a header missing a required
    column raises SchemaError.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    column_for = {name: name for name in REQUIRED_COLUMNS + OPTIONAL_COLUMNS}
    if mapping:
        column_for.update(mapping)

    reader = csv.DictReader(source)
    header = reader.fieldnames
    if header is None:
        raise SchemaError("input has no header row")
    missing = [column_for[name] for name in REQUIRED_COLUMNS if column_for[name] not in header]
    if missing:
        raise SchemaError(f"missing required columns: {', '.join(missing)}")
    has_timestamp = column_for["timestamp"] in header

    records: list[InspectionRecord] = []
    rejects = RejectLog()
    for row_index, row in enumerate(reader):
        raw = {name: (row.get(column_for[name]) or "").strip() for name in REQUIRED_COLUMNS}
        if any(not raw[name] for name in REQUIRED_COLUMNS):
            rejects.add(row_index, RejectReason.MISSING_FIELD)
            continue
        try:
            value = float(raw["value"])
            tolerance = float(raw["tolerance"])
            if not (math.isfinite(value) and math.isfinite(tolerance)):
                raise ValueError("non-finite measurement")
            flagged = _parse_bool(raw["machine_flagged"])
            disposition = Disposition(raw["disposition"].lower())
            timestamp = None
            if has_timestamp:
                ts_raw = (row.get(column_for["timestamp"]) or "").strip()
                if ts_raw:
                    timestamp = _parse_timestamp(ts_raw)
        except ValueError:
            rejects.add(row_index, RejectReason.NON_NUMERIC)
            continue
        if disposition is not Disposition.NOT_REVIEWED and not flagged:
            # A human disposition can only exist for rows the machine flagged.
            rejects.add(row_index, RejectReason.INCONSISTENT_FLAG)
            continue
        records.append(
            InspectionRecord(
                model_id=raw["model"],
                part_number=raw["part_number"],
                inspection_type=raw["inspection_type"],
                measured_value=value,
                tolerance_at_inspection=tolerance,
                machine_flagged=flagged,
                disposition=disposition,
                timestamp=timestamp,
                row_index=row_index,
            )
        )
    return records, rejects


def build_part_datasets(
    records: Iterable[InspectionRecord],
) -> tuple[dict[PartKey, PartDataset], RejectLog]:
    """Partition records by part key into immutable datasets.

    Flagged records whose value is not below the tolerance are quarantined
    (InconsistentFlag) rather than silently kept. A key whose records carry
    more than one distinct tolerance is dropped entirely and every one of
    its records quarantined (ConflictingTolerance). Reject-log indices use
    the record's ``row_index`` when present, else its position in
    ``records``.
    """
    grouped: dict[PartKey, list[InspectionRecord]] = {}
    quarantine = RejectLog()
    for position, record in enumerate(records):
        key = PartKey(record.part_number, record.inspection_type)
        grouped.setdefault(key, []).append(
            record if record.row_index is not None
            else InspectionRecord(**{**record.__dict__, "row_index": position})
        )

    datasets: dict[PartKey, PartDataset] = {}
    for key in sorted(grouped):
        members = grouped[key]
        tolerances = {r.tolerance_at_inspection for r in members}
        if len(tolerances) > 1:
            for r in members:
                quarantine.add(r.row_index, RejectReason.CONFLICTING_TOLERANCE)
            continue
        tolerance = members[0].tolerance_at_inspection
        false_calls: list[float] = []
        defects: list[float] = []
        pass_count = 0
        quarantined = 0
        unreviewed = 0
        models: set[str] = set()
        for r in members:
            models.add(r.model_id)
            if not r.machine_flagged:
                pass_count += 1
                continue
            if not r.measured_value < tolerance:
                quarantine.add(r.row_index, RejectReason.INCONSISTENT_FLAG)
                quarantined += 1
                continue
            if r.disposition is Disposition.FALSE_CALL:
                false_calls.append(r.measured_value)
            elif r.disposition is Disposition.TRUE_DEFECT:
                defects.append(r.measured_value)
            else:
                unreviewed += 1
        datasets[key] = PartDataset(
            key=key,
            current_tolerance=tolerance,
            false_call_values=tuple(false_calls),
            defect_values=tuple(defects),
            pass_count=pass_count,
            quarantined_count=quarantined,
            unreviewed_count=unreviewed,
            models=tuple(sorted(models)),
        )
    return datasets, quarantine


def check_dataset_invariants(dataset: PartDataset) -> None:
    """Raise ValueError when a dataset violates its structural invariants."""
    if not dataset.key.part_number or not dataset.key.inspection_type:
        raise ValueError(f"empty key component in {dataset.key!r}")
    if not math.isfinite(dataset.current_tolerance):
        raise ValueError(f"{dataset.key}: non-finite tolerance")
    for label, values in (
        ("false call", dataset.false_call_values),
        ("defect", dataset.defect_values),
    ):
        for v in values:
            if not math.isfinite(v):
                raise ValueError(f"{dataset.key}: non-finite {label} value {v!r}")
            if not v < dataset.current_tolerance:
                raise ValueError(
                    f"{dataset.key}: {label} value {v} not below tolerance "
                    f"{dataset.current_tolerance}"
                )
    for label, count in (
        ("pass_count", dataset.pass_count),
        ("quarantined_count", dataset.quarantined_count),
        ("unreviewed_count", dataset.unreviewed_count),
    ):
        if count < 0:
            raise ValueError(f"{dataset.key}: negative {label}")


def _dataset_rows(dataset: PartDataset) -> list[list[str]]:
    models = dataset.models or (_EXPORT_MODEL_FALLBACK,)
    rows: list[list[str]] = []

    def model_for(i: int) -> str:
        return models[i % len(models)]

    def row(i: int, value: float, flagged: bool, disposition: Disposition) -> list[str]:
        return [
            model_for(i),
            dataset.key.part_number,
            dataset.key.inspection_type,
            repr(value),
            repr(dataset.current_tolerance),
            "true" if flagged else "false",
            disposition.value,
            "",
        ]

    i = 0
    for v in dataset.false_call_values:
        rows.append(row(i, v, True, Disposition.FALSE_CALL))
        i += 1
    for v in dataset.defect_values:
        rows.append(row(i, v, True, Disposition.TRUE_DEFECT))
        i += 1
    # Passes carry no retained value: the tolerance itself is unflagged
    # under strict comparison. Unreviewed flagged rows need any value below
    # tolerance; quarantined rows re-quarantine at exactly the tolerance.
    below = math.nextafter(dataset.current_tolerance, -math.inf)
    for _ in range(dataset.pass_count):
        rows.append(row(i, dataset.current_tolerance, False, Disposition.NOT_REVIEWED))
        i += 1
    for _ in range(dataset.unreviewed_count):
        rows.append(row(i, below, True, Disposition.NOT_REVIEWED))
        i += 1
    for _ in range(dataset.quarantined_count):
        rows.append(row(i, dataset.current_tolerance, True, Disposition.NOT_REVIEWED))
        i += 1
    return rows


def datasets_to_csv(datasets: Mapping[PartKey, PartDataset]) -> str:
    """Serialise datasets to the canonical delimited format.

    Re-parsing the output and rebuilding datasets reproduces the input
    exactly (values round-trip through repr; synthetic rows stand in for
    pass/unreviewed/quarantined counts).
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS + OPTIONAL_COLUMNS)
    for key in sorted(datasets):
        writer.writerows(_dataset_rows(datasets[key]))
    return buffer.getvalue()
