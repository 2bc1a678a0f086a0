// DOM wiring. All state handling lives in the controllers; this file only
// renders view-models into tables and forwards input events.

import { HttpApiClient } from "./api.js";
import { ApprovalController, SweepController, ValidationController } from "./controllers.js";
import type { Run } from "./types.js";
import {
  exportPreviewView,
  histogramView,
  proposalQueueView,
  sweepView,
  validationView,
} from "./viewmodel.js";

const api = new HttpApiClient();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}

function table(headers: string[], rows: (string | number)[][]): string {
  const head = headers.map((h) => `<th>${escapeHtml(h)}</th>`).join("");
  const body = rows
    .map((row) => `<tr>${row.map((cell) => `<td>${escapeHtml(String(cell))}</td>`).join("")}</tr>`)
    .join("");
  return `<table><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

function renderBanner(message: string | null, stale: boolean): void {
  const banner = el<HTMLDivElement>("banner");
  if (message) {
    banner.textContent = stale ? `${message} (showing last good data)` : message;
    banner.hidden = false;
  } else {
    banner.hidden = true;
  }
}

async function main(): Promise<void> {
  const datasets = await api.listDatasets();
  const picker = el<HTMLSelectElement>("dataset");
  picker.innerHTML = datasets
    .map((d) => `<option value="${d.version}">${d.version.slice(0, 12)} (${d.counts.parts} parts)</option>`)
    .join("");
  if (datasets.length === 0) {
    renderBanner("no datasets uploaded yet -- POST a CSV to /datasets", false);
    return;
  }
  const version = picker.value;

  const sweeps = new SweepController(api, version, 80, renderSweep);
  const approvals = new ApprovalController(api, version, "dashboard", renderRun);
  const validation = new ValidationController(api, renderRun);
  let currentRun: Run | null = null;

  const slider = el<HTMLInputElement>("percentile");
  const sliderLabel = el<HTMLSpanElement>("percentile-label");
  slider.addEventListener("input", () => {
    sliderLabel.textContent = slider.value;
    sweeps.sliderChanged(Number(slider.value));
    void refreshHistograms(Number(slider.value));
  });

  el<HTMLButtonElement>("run").addEventListener("click", () => {
    void (async () => {
      const { run_id } = await api.createRun(version, Number(slider.value), 0);
      await validation.load(run_id);
      currentRun = validation.run;
      renderRun();
    })();
  });

  function renderSweep(): void {
    renderBanner(sweeps.banner, sweeps.stale);
    const points = sweeps.points;
    if (!points) return;
    const rows = sweepView(points).map((row) => [
      row.percentile,
      row.falseCallsBefore,
      row.falseCallsAfter,
      row.reduction,
      row.defectsRetained,
      row.guardActivations,
    ]);
    el("sweep").innerHTML = table(
      ["percentile", "false calls before", "after", "reduction", "defects retained", "guards"],
      rows,
    );
  }

  async function refreshHistograms(percentile: number): Promise<void> {
    const parts = await api.listParts(version);
    const blocks = await Promise.all(
      parts.slice(0, 6).map(async (part) => {
        const data = await api.histogram(
          version,
          part.key.part_number,
          part.key.inspection_type,
          percentile,
        );
        const view = histogramView(data);
        const bars = view.bars
          .map(
            (bar) =>
              `<div class="bar" style="height:${Math.round(bar.height * 80)}px" title="${bar.label}: ${bar.count}"></div>`,
          )
          .join("");
        return (
          `<figure><figcaption>${escapeHtml(part.key.part_number)} ` +
          `(current ${view.currentMarker}, candidate ${view.optimisedMarker})</figcaption>` +
          `<div class="bars">${bars}</div></figure>`
        );
      }),
    );
    el("histograms").innerHTML = blocks.join("");
  }

  function renderRun(): void {
    if (validation.missing) {
      el("validation").innerHTML = "<p>run not found</p>";
      return;
    }
    if (!currentRun) return;
    const run = currentRun;
    const vv = validationView(run);
    el("validation").innerHTML =
      table(
        ["part", "train defects", "holdout", "flagged", "escaped", "status"],
        vv.rows.map((row) => [
          row.part,
          row.trainDefects,
          row.holdoutDefects,
          row.flagged,
          row.escaped,
          row.status.toUpperCase(),
        ]),
      ) + `<p class="${vv.allPassed ? "ok" : "bad"}">overall recall ${vv.overallRecall}</p>`;

    const queue = proposalQueueView(run.proposals, approvals.decisions);
    el("queue").innerHTML = queue.pending
      .map(
        (row) =>
          `<div class="proposal" data-id="${row.id}">` +
          `<span>${escapeHtml(row.part)}: ${row.currentTolerance} -> ${row.finalTolerance} ` +
          `(${row.falseCalls}${row.guardApplied ? ", guarded" : ""})</span>` +
          `<button data-decide="approved" data-id="${row.id}">approve</button>` +
          `<button data-decide="rejected" data-id="${row.id}">reject</button></div>`,
      )
      .join("");
    el("decided").innerHTML = queue.decided
      .map((row) => `<div class="proposal done">${escapeHtml(row.part)}: ${row.decision?.decision}</div>`)
      .join("");
    const preview = exportPreviewView(approvals.exportPreview);
    el("export").textContent = [preview.header, ...preview.rows].join("\n");
    renderBanner(approvals.banner, false);
  }

  el("queue").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const choice = target.dataset["decide"];
    const id = target.dataset["id"];
    if (choice === "approved" || choice === "rejected") {
      if (id) void approvals.decide(id, choice);
    }
  });

  sweeps.sliderChanged(Number(slider.value));
  await approvals.refreshExport();
  await refreshHistograms(Number(slider.value));
}

void main();
