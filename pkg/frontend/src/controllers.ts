// State controllers wiring the API to the view-models; DOM-free so the
// behaviour (debouncing, stale views, idempotent decisions) is testable.

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import type { Decision, DecisionChoice, Run, SweepPoint } from "./types.js";

export const SLIDER_DEBOUNCE_MS = 250;

export class SweepController {
  points: SweepPoint[] | null = null;
  percentile: number;
  stale = false;
  banner: string | null = null;
  private readonly scheduleFetch: Debounced<[number]>;
  private generation = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly version: string,
    initialPercentile: number,
    private readonly onChange: () => void,
    debounceMs: number = SLIDER_DEBOUNCE_MS,
  ) {
    this.percentile = initialPercentile;
    this.scheduleFetch = debounce((p: number) => void this.fetch(p), debounceMs);
  }

  /** Rapid drags coalesce; only the resting percentile hits the service. */
  sliderChanged(p: number): void {
    this.percentile = p;
    this.scheduleFetch(p);
  }

  async fetch(p: number): Promise<void> {
    const generation = ++this.generation;
    try {
      const points = await this.api.sweep(this.version, [p]);
      if (generation !== this.generation) return; // a newer drag won
      this.points = points;
      this.stale = false;
      this.banner = null;
    } catch (err) {
      // Keep the last good view; just say it is no longer live.
      this.stale = this.points !== null;
      this.banner = err instanceof Error ? err.message : String(err);
    }
    this.onChange();
  }
}

export class ApprovalController {
  readonly decisions = new Map<string, Decision>();
  exportPreview = "";
  banner: string | null = null;
  private readonly inFlight = new Set<string>();

  constructor(
    private readonly api: ApiClient,
    private readonly version: string,
    private readonly decidedBy: string,
    private readonly onChange: () => void,
  ) {}

  /** One decision per proposal: repeat clicks while a request is in
   * flight, or after a decision landed, are ignored. */
  async decide(proposalId: string, choice: DecisionChoice): Promise<void> {
    if (this.inFlight.has(proposalId) || this.decisions.has(proposalId)) return;
    this.inFlight.add(proposalId);
    try {
      const decision = await this.api.decide(proposalId, choice, this.decidedBy);
      this.decisions.set(proposalId, decision);
      this.banner = null;
      await this.refreshExport();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.banner = "already decided elsewhere -- refresh to see the latest state";
      } else {
        this.banner = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.inFlight.delete(proposalId);
      this.onChange();
    }
  }

  async refreshExport(): Promise<void> {
    this.exportPreview = await this.api.exportTolerances(this.version);
  }
}

export class ValidationController {
  run: Run | null = null;
  missing = false;

  constructor(private readonly api: ApiClient, private readonly onChange: () => void) {}

  async load(runId: string): Promise<void> {
    try {
      this.run = await this.api.getRun(runId);
      this.missing = false;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.run = null;
        this.missing = true;
      } else {
        throw err;
      }
    }
    this.onChange();
  }
}
