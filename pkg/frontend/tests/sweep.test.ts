// The slider view must show exactly the service's sweep numbers. The
// fixture is a recorded /sweeps response for percentiles 75 and 80
// (regenerate with scripts/capture_fixtures.py).

import { describe, expect, it } from "vitest";

import { formatPercent, sweepView } from "../src/viewmodel.js";
import type { SweepPoint } from "../src/types.js";
import { fixture } from "./helpers.js";

const points = fixture<SweepPoint[]>("sweep_75_80.json");

describe("sweepView", () => {
  it("renders the service's numbers verbatim for p in {75, 80}", () => {
    const rows = sweepView(points);
    expect(rows).toHaveLength(2);
    points.forEach((point, i) => {
      const row = rows[i]!;
      expect(row.falseCallsBefore).toBe(point.total_false_calls_before);
      expect(row.falseCallsAfter).toBe(point.total_false_calls_after);
      expect(row.reduction).toBe(formatPercent(point.reduction_fraction));
      expect(row.defectsRetained).toBe(`${point.defects_flagged}/${point.defects_total}`);
      expect(row.guardActivations).toBe(point.guard_activations);
    });
  });

  it("matches the recorded service response (snapshot)", () => {
    expect(sweepView(points)).toMatchSnapshot();
  });

  it("shows the lower percentile reducing at least as much", () => {
    // Property of the recorded data, not something the UI computes.
    const [p75, p80] = points;
    expect(p75!.p).toBe(75);
    expect(p80!.p).toBe(80);
    expect(p75!.reduction_fraction).toBeGreaterThanOrEqual(p80!.reduction_fraction);
    expect(p75!.defects_flagged).toBe(p75!.defects_total);
    expect(p80!.defects_flagged).toBe(p80!.defects_total);
  });
});
