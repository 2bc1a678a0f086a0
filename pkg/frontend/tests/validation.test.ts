import { describe, expect, it } from "vitest";

import { histogramView, validationView } from "../src/viewmodel.js";
import type { Histogram, Run } from "../src/types.js";
import { fixture } from "./helpers.js";

describe("validationView", () => {
  it("renders a planted-escape run with a highlighted fail row", () => {
    const run = fixture<Run>("run_escape.json");
    const view = validationView(run);
    const fails = view.rows.filter((row) => row.status === "fail");
    expect(fails).toHaveLength(1);
    expect(fails[0]!.escaped).toBeGreaterThan(0);
    expect(fails[0]!.highlight).toBe(true);
    expect(view.allPassed).toBe(false);
    expect(view.overallRecall).not.toBe("100.0%");
    expect(view).toMatchSnapshot();
  });

  it("renders an all-pass run with 100% recall", () => {
    const run = fixture<Run>("run_ok.json");
    const view = validationView(run);
    expect(view.rows.length).toBeGreaterThan(0);
    expect(view.allPassed).toBe(true);
    expect(view.overallRecall).toBe("100.0%");
    // Row counts come straight off the wire.
    run.validation.rows.forEach((row, i) => {
      expect(view.rows[i]!.flagged).toBe(row.holdout_flagged);
      expect(view.rows[i]!.escaped).toBe(row.holdout_escaped);
    });
  });

  it("handles a run without a validation report", () => {
    const run = fixture<Run>("run_ok.json");
    const bare: Run = {
      ...run,
      validation: { rows: [], overall_recall: null, errors: ["no defects"] },
    };
    const view = validationView(bare);
    expect(view.overallRecall).toBe("n/a");
    expect(view.allPassed).toBe(false);
    expect(view.errors).toEqual(["no defects"]);
  });
});

describe("histogramView", () => {
  it("keeps counts and markers from the service", () => {
    const data = fixture<Histogram>("histogram.json");
    const view = histogramView(data);
    expect(view.bars.map((bar) => bar.count)).toEqual(data.counts);
    expect(view.currentMarker).toBe(data.markers.current_tolerance);
    expect(view.optimisedMarker).toBe(data.markers.optimised_tolerance);
    const peak = Math.max(...data.counts);
    view.bars.forEach((bar) => {
      expect(bar.height).toBeGreaterThanOrEqual(0);
      expect(bar.height).toBeLessThanOrEqual(1);
      expect(bar.height).toBe(bar.count / peak);
    });
  });
});
