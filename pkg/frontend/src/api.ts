import type {
  DatasetVersion,
  Decision,
  DecisionChoice,
  Histogram,
  PartSummary,
  Run,
  SweepPoint,
} from "./types.js";

export const API_BASE =
  (globalThis as { TOLOPT_API_BASE?: string }).TOLOPT_API_BASE ?? "http://127.0.0.1:8000";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(`${API_BASE}${path}`, init);
  if (!res.ok) {
    throw new ApiError(res.status, `${init?.method ?? "GET"} ${path}: ${res.status} ${await res.text()}`);
  }
  return res.json() as Promise<T>;
}

function postJson<T>(path: string, body: unknown): Promise<T> {
  return request<T>(path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}

/** Everything the dashboard needs from the service; swap in a fake for tests. */
export interface ApiClient {
  listDatasets(): Promise<DatasetVersion[]>;
  listParts(version: string): Promise<PartSummary[]>;
  sweep(version: string, percentiles: number[]): Promise<SweepPoint[]>;
  histogram(version: string, partNumber: string, inspectionType: string, percentile: number): Promise<Histogram>;
  createRun(version: string, percentile: number, seed: number): Promise<{ run_id: string }>;
  getRun(runId: string): Promise<Run>;
  decide(proposalId: string, decision: DecisionChoice, decidedBy: string): Promise<Decision>;
  exportTolerances(version: string): Promise<string>;
}

export class HttpApiClient implements ApiClient {
  listDatasets(): Promise<DatasetVersion[]> {
    return request("/datasets");
  }

  listParts(version: string): Promise<PartSummary[]> {
    return request(`/datasets/${version}/parts`);
  }

  sweep(version: string, percentiles: number[]): Promise<SweepPoint[]> {
    return postJson("/sweeps", { dataset_version: version, percentiles });
  }

  histogram(
    version: string,
    partNumber: string,
    inspectionType: string,
    percentile: number,
  ): Promise<Histogram> {
    const query = new URLSearchParams({
      part_number: partNumber,
      inspection_type: inspectionType,
      percentile: String(percentile),
    });
    return request(`/datasets/${version}/histogram?${query}`);
  }

  createRun(version: string, percentile: number, seed: number): Promise<{ run_id: string }> {
    return postJson("/runs", {
      dataset_version: version,
      percentile,
      split: { seed },
    });
  }

  getRun(runId: string): Promise<Run> {
    return request(`/runs/${runId}`);
  }

  decide(proposalId: string, decision: DecisionChoice, decidedBy: string): Promise<Decision> {
    return postJson(`/proposals/${proposalId}/decision`, {
      decision,
      decided_by: decidedBy,
    });
  }

  async exportTolerances(version: string): Promise<string> {
    const res = await fetch(`${API_BASE}/export/tolerances?version=${version}`);
    if (!res.ok) {
      throw new ApiError(res.status, `export failed: ${res.status}`);
    }
    return res.text();
  }
}
