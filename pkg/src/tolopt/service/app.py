"""FastAPI application wrapping the optimisation engine.

Uploads are content-addressed, runs are deterministic in (dataset
version, parameters), and proposal decisions are immutable -- re-posting
the same bytes or parameters always lands on the same identifiers.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse

from ..errors import EmptySample, SchemaError
from ..ingest import PartKey, build_part_datasets, datasets_to_csv, parse_records
from ..optimizer import SafetyMargin, optimize_all, optimize_part, proposal_to_dict
from ..simulate import ToleranceMarkers, histogram, sweep, sweep_point_to_dict
from ..validation import SplitPolicy, run_validation_protocol
from .schemas import (
    DatasetVersionOut,
    DecisionOut,
    DecisionRequest,
    HistogramOut,
    PartSummaryOut,
    RunCreated,
    RunOut,
    RunRequest,
    SweepPointOut,
    SweepRequest,
)
from .store import (
    EventStore,
    dataset_version_id,
    proposal_id_for,
    run_id_for,
    utc_now_iso,
)


def _margin(request_margin) -> SafetyMargin:
    return SafetyMargin(value=request_margin.value, relative=request_margin.relative)


def _require_version(store: EventStore, version: str) -> dict:
    record = store.datasets.get(version)
    if record is None:
        raise HTTPException(status_code=404, detail=f"unknown dataset version {version!r}")
    return record


def _execute_run(store: EventStore, request: RunRequest) -> dict:
    params = request.model_dump()
    run_id = run_id_for(params)
    datasets = store.parsed_datasets(request.dataset_version)
    margin = _margin(request.margin)

    proposals, optimizer_errors = optimize_all(datasets, request.percentile, margin)
    errors = [f"optimize {e.key}: {e.message}" for e in optimizer_errors]

    validation: dict
    try:
        report = run_validation_protocol(
            datasets,
            request.percentile,
            margin,
            k=request.split.top_k,
            ratio=request.split.ratio,
            policy=SplitPolicy(kind=request.split.policy, seed=request.split.seed),
        )
        validation = {
            "rows": [
                {
                    "key": {
                        "part_number": row.key.part_number,
                        "inspection_type": row.key.inspection_type,
                    },
                    "train_defect_count": row.train_defect_count,
                    "holdout_defect_count": row.holdout_defect_count,
                    "holdout_flagged": row.holdout_flagged,
                    "holdout_escaped": row.holdout_escaped,
                    "status": row.status,
                }
                for row in report.rows
            ],
            "overall_recall": {
                "tp": report.overall.tp,
                "fn": report.overall.fn,
                "recall": report.overall.recall,
            },
            "errors": errors + list(report.errors),
        }
    except EmptySample as exc:
        validation = {"rows": [], "overall_recall": None, "errors": errors + [str(exc)]}

    return {
        "run_id": run_id,
        "dataset_version": request.dataset_version,
        "parameters": params,
        "proposals": [
            {"id": proposal_id_for(run_id, p.key), **proposal_to_dict(p)} for p in proposals
        ],
        "validation": validation,
    }


def create_app(store: EventStore | None = None, store_path: Path | str | None = None) -> FastAPI:
    if store is None:
        store = EventStore(store_path)

    app = FastAPI(title="tolopt", description="AOI tolerance optimisation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.post("/datasets", response_model=DatasetVersionOut, status_code=201)
    async def upload_dataset(request: Request, response: Response):
        text = (await request.body()).decode("utf-8")
        try:
            records, rejects = parse_records(text)
        except SchemaError as exc:
            raise HTTPException(status_code=400, detail={"message": str(exc)})
        datasets, quarantine = build_part_datasets(records)
        canonical = datasets_to_csv(datasets)
        version = dataset_version_id(canonical)
        counts = {
            "accepted": len(records),
            "rejected": len(rejects),
            "quarantined": len(quarantine),
            "parts": len(datasets),
            "false_calls": sum(len(d.false_call_values) for d in datasets.values()),
            "defects": sum(len(d.defect_values) for d in datasets.values()),
        }
        record, created = store.add_dataset(version, canonical, counts, source="upload")
        if not created:
            response.status_code = 200
        return {k: record[k] for k in ("version", "created_at", "source", "counts")}

    @app.get("/datasets", response_model=list[DatasetVersionOut])
    def list_datasets():
        return [
            {k: record[k] for k in ("version", "created_at", "source", "counts")}
            for record in store.datasets.values()
        ]

    @app.get("/datasets/{version}", response_model=DatasetVersionOut)
    def get_dataset(version: str):
        record = _require_version(store, version)
        return {k: record[k] for k in ("version", "created_at", "source", "counts")}

    @app.get("/datasets/{version}/parts", response_model=list[PartSummaryOut])
    def list_parts(version: str):
        _require_version(store, version)
        datasets = store.parsed_datasets(version)
        return [
            {
                "key": {"part_number": key.part_number, "inspection_type": key.inspection_type},
                "current_tolerance": ds.current_tolerance,
                "false_calls": len(ds.false_call_values),
                "defects": len(ds.defect_values),
                "passes": ds.pass_count,
                "models": list(ds.models),
            }
            for key, ds in sorted(datasets.items())
        ]

    @app.get("/datasets/{version}/histogram", response_model=HistogramOut)
    def part_histogram(
        version: str,
        part_number: str,
        inspection_type: str,
        bins: int = 30,
        percentile: float = 80.0,
        margin_value: float = 0.01,
        margin_relative: bool = True,
    ):
        _require_version(store, version)
        datasets = store.parsed_datasets(version)
        key = PartKey(part_number, inspection_type)
        dataset = datasets.get(key)
        if dataset is None:
            raise HTTPException(status_code=404, detail=f"unknown part {key}")
        if not dataset.false_call_values:
            raise HTTPException(status_code=422, detail=f"{key} has no false calls to bin")
        if not (0 <= percentile <= 100) or margin_value <= 0 or bins < 1:
            raise HTTPException(status_code=422, detail="invalid histogram parameters")
        proposal = optimize_part(
            dataset, percentile, SafetyMargin(value=margin_value, relative=margin_relative)
        )
        data = histogram(
            dataset.false_call_values,
            bin_count=bins,
            markers=ToleranceMarkers(
                current_tolerance=dataset.current_tolerance,
                optimised_tolerance=proposal.final_tolerance,
            ),
        )
        return {
            "bin_edges": list(data.bin_edges),
            "counts": list(data.counts),
            "markers": {
                "current_tolerance": data.markers.current_tolerance,
                "optimised_tolerance": data.markers.optimised_tolerance,
            },
        }

    @app.post("/runs", response_model=RunCreated, status_code=201)
    def create_run(request: RunRequest, response: Response):
        _require_version(store, request.dataset_version)
        run = _execute_run(store, request)
        record, created = store.add_run(run)
        if not created:
            response.status_code = 200
        return {"run_id": record["run_id"], "created": created}

    @app.get("/runs")
    def list_runs():
        return [
            {"run_id": run["run_id"], "dataset_version": run["dataset_version"]}
            for run in store.runs.values()
        ]

    @app.get("/runs/{run_id}", response_model=RunOut)
    def get_run(run_id: str):
        run = store.runs.get(run_id)
        if run is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id!r}")
        return run

    @app.post("/sweeps", response_model=list[SweepPointOut])
    def run_sweep(request: SweepRequest):
        _require_version(store, request.dataset_version)
        datasets = store.parsed_datasets(request.dataset_version)
        points = sweep(datasets, request.percentiles, _margin(request.margin))
        return [sweep_point_to_dict(p) for p in points]

    @app.post("/proposals/{proposal_id}/decision", response_model=DecisionOut, status_code=201)
    def decide_proposal(proposal_id: str, request: DecisionRequest):
        if proposal_id not in store.proposals:
            raise HTTPException(status_code=404, detail=f"unknown proposal {proposal_id!r}")
        decision = {
            "proposal_id": proposal_id,
            "decision": request.decision,
            "decided_by": request.decided_by,
            "decided_at": utc_now_iso(),
            "note": request.note,
        }
        record, created = store.add_decision(decision)
        if not created:
            raise HTTPException(
                status_code=409,
                detail=f"proposal {proposal_id!r} already decided: {record['decision']}",
            )
        return record

    @app.get("/export/tolerances", response_class=PlainTextResponse)
    def export_tolerances(version: str):
        _require_version(store, version)
        lines = ["part_number,inspection_type,final_tolerance"]
        for part_number, inspection_type, final in store.approved_tolerances(version):
            lines.append(f"{part_number},{inspection_type},{final!r}")
        return PlainTextResponse("\n".join(lines) + "\n", media_type="text/csv")

    return app
