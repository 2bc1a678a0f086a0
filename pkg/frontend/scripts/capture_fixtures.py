#!/usr/bin/env python3
"""Regenerate the test fixtures from a real in-process service instance.

The dashboard renders service numbers verbatim, so its tests assert
against actual recorded responses rather than hand-written JSON. Re-run
this after changing the service and commit the diff:

    python scripts/capture_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from tolopt.ingest import PartDataset, PartKey, datasets_to_csv
from tolopt.service import EventStore, create_app
from tolopt.simulate import SyntheticSpec, generate_synthetic

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def planted_escape_dataset() -> dict:
    # Eight benign defects plus one near the current tolerance; shuffle
    # seed 0 places the high one in the holdout, where it escapes.
    key = PartKey("PE", "solder")
    return {
        key: PartDataset(
            key=key,
            current_tolerance=101.0,
            false_call_values=tuple(float(v) for v in range(10, 101, 10)),
            defect_values=tuple([40.0] * 8 + [97.0]),
            models=("M1",),
        )
    }


def save(name: str, payload) -> None:
    path = FIXTURES / name
    if isinstance(payload, (bytes, str)):
        text = payload if isinstance(payload, str) else payload.decode("utf-8")
        path.write_text(text, encoding="utf-8")
    else:
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path.relative_to(FIXTURES.parent.parent)}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app(EventStore()))

    spec = SyntheticSpec(
        part_count=6, seed=42, false_calls_per_part=(30, 80), defect_rate=0.08
    )
    csv_text = datasets_to_csv(generate_synthetic(spec))
    version = client.post("/datasets", content=csv_text.encode("utf-8")).json()["version"]

    sweep = client.post(
        "/sweeps", json={"dataset_version": version, "percentiles": [75, 80]}
    ).json()
    save("sweep_75_80.json", sweep)

    run_id = client.post(
        "/runs", json={"dataset_version": version, "split": {"seed": 0}}
    ).json()["run_id"]
    run = client.get(f"/runs/{run_id}").json()
    save("run_ok.json", run)

    parts = client.get(f"/datasets/{version}/parts").json()
    save("parts.json", parts)
    first = parts[0]["key"]
    histogram = client.get(
        f"/datasets/{version}/histogram",
        params={
            "part_number": first["part_number"],
            "inspection_type": first["inspection_type"],
            "bins": 12,
            "percentile": 80,
        },
    ).json()
    save("histogram.json", histogram)

    save("export_before.txt", client.get("/export/tolerances", params={"version": version}).text)
    approved = run["proposals"][0]
    client.post(
        f"/proposals/{approved['id']}/decision",
        json={"decision": "approved", "decided_by": "fixture"},
    )
    save("export_after.txt", client.get("/export/tolerances", params={"version": version}).text)

    escape_csv = datasets_to_csv(planted_escape_dataset())
    escape_version = client.post("/datasets", content=escape_csv.encode("utf-8")).json()[
        "version"
    ]
    escape_run_id = client.post(
        "/runs", json={"dataset_version": escape_version, "split": {"seed": 0}}
    ).json()["run_id"]
    save("run_escape.json", client.get(f"/runs/{escape_run_id}").json())


if __name__ == "__main__":
    main()
