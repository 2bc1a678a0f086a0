"""Append-only persistence for datasets, runs, and decisions.

A single JSONL event log is the source of truth: every state change is
one appended event, and replaying the log reconstructs the store exactly.
Nothing is ever updated in place, which is what makes runs reproducible
and decisions auditable.
"""

from __future__ import annotations

import hashlib
import json
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from ..ingest import PartDataset, PartKey, build_part_datasets, parse_records


def dataset_version_id(canonical_csv: str) -> str:
    """Content hash of the canonical serialisation of a dataset."""
    return hashlib.sha256(canonical_csv.encode("utf-8")).hexdigest()


def run_id_for(params: Mapping[str, Any]) -> str:
    """Deterministic run identifier from the full parameter document."""
    return hashlib.sha256(
        json.dumps(params, sort_keys=True, separators=(",", ":")).encode("utf-8")
    ).hexdigest()


def proposal_id_for(run_id: str, key: PartKey) -> str:
    digest = hashlib.sha256(
        f"{run_id}|{key.part_number}|{key.inspection_type}".encode("utf-8")
    ).hexdigest()
    return digest[:16]


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class EventStore:
    """In-memory state rebuilt from (and persisted to) an event log.

    ``path=None`` keeps the store purely in memory, which the tests use.
    All writes are serialized behind one lock; dataset versions and run
    records are immutable once appended.
    """

    def __init__(self, path: Path | str | None = None):
        self._path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self.datasets: dict[str, dict] = {}
        self.runs: dict[str, dict] = {}
        self.proposals: dict[str, dict] = {}
        self.decisions: dict[str, dict] = {}
        self._dataset_cache: dict[str, dict[PartKey, PartDataset]] = {}
        if self._path is not None and self._path.exists():
            self._replay()

    def _replay(self) -> None:
        assert self._path is not None
        with self._path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(json.loads(line))

    def _append(self, event: dict) -> None:
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, separators=(",", ":")) + "\n")
        self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        if kind == "dataset_added":
            self.datasets[event["version"]] = {
                k: event[k] for k in ("version", "csv_text", "created_at", "source", "counts")
            }
        elif kind == "run_added":
            run = event["run"]
            self.runs[run["run_id"]] = run
            for proposal in run["proposals"]:
                self.proposals[proposal["id"]] = {
                    "proposal_id": proposal["id"],
                    "run_id": run["run_id"],
                    "dataset_version": run["dataset_version"],
                    "part_number": proposal["key"]["part_number"],
                    "inspection_type": proposal["key"]["inspection_type"],
                    "final_tolerance": proposal["final_tolerance"],
                }
        elif kind == "decision_added":
            decision = event["decision"]
            self.decisions[decision["proposal_id"]] = decision
        else:
            raise ValueError(f"unknown event type {kind!r}")

    # -- datasets ----------------------------------------------------------

    def add_dataset(self, version: str, csv_text: str, counts: dict, source: str) -> tuple[dict, bool]:
        """Store a dataset version; returns (record, created)."""
        with self._lock:
            existing = self.datasets.get(version)
            if existing is not None:
                return existing, False
            self._append(
                {
                    "event": "dataset_added",
                    "version": version,
                    "csv_text": csv_text,
                    "created_at": utc_now_iso(),
                    "source": source,
                    "counts": counts,
                }
            )
            return self.datasets[version], True

    def parsed_datasets(self, version: str) -> dict[PartKey, PartDataset]:
        """Parsed form of a stored version (cached; parse is deterministic)."""
        if version not in self._dataset_cache:
            records, _ = parse_records(self.datasets[version]["csv_text"])
            datasets, _ = build_part_datasets(records)
            self._dataset_cache[version] = datasets
        return self._dataset_cache[version]

    # -- runs --------------------------------------------------------------

    def add_run(self, run: dict) -> tuple[dict, bool]:
        with self._lock:
            existing = self.runs.get(run["run_id"])
            if existing is not None:
                return existing, False
            self._append({"event": "run_added", "run": run})
            return run, True

    # -- decisions ---------------------------------------------------------

    def add_decision(self, decision: dict) -> tuple[dict, bool]:
        """Record a decision; returns (record, created). created=False means
        the proposal was already decided (decisions are immutable)."""
        with self._lock:
            proposal_id = decision["proposal_id"]
            existing = self.decisions.get(proposal_id)
            if existing is not None:
                return existing, False
            self._append({"event": "decision_added", "decision": decision})
            return decision, True

    def approved_tolerances(self, version: str) -> list[tuple[str, str, float]]:
        """(part_number, inspection_type, final_tolerance) for approved
        proposals of one dataset version, key-sorted."""
        rows = []
        for proposal_id, proposal in self.proposals.items():
            if proposal["dataset_version"] != version:
                continue
            decision = self.decisions.get(proposal_id)
            if decision is not None and decision["decision"] == "approved":
                rows.append(
                    (
                        proposal["part_number"],
                        proposal["inspection_type"],
                        proposal["final_tolerance"],
                    )
                )
        rows.sort()
        return rows
