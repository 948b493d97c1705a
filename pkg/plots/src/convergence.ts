/** Convergence figure: per-solver mean objective trace and mean best-so-far
 * with a +-std band, baseline drawn as a horizontal dashed line. */

import * as fs from "node:fs";
import * as path from "node:path";

import { numericColumn, parseCsv, requireColumns } from "./csv.js";
import { PALETTE, SvgBuilder, linearScale, logScale, niceTicks, Scale } from "./svg.js";

export interface SolverSeries {
  label: string;
  meanF: number[];
  meanG: number[];
  stdG: number[];
}

export interface ConvergenceData {
  solvers: SolverSeries[];
  baseline: number | null;
}

export function loadConvergenceData(campaignDir: string): ConvergenceData {
  const files = fs.readdirSync(campaignDir).filter((name) => /_run\d+\.csv$/.test(name));
  if (files.length === 0) {
    throw new Error(`no run logs (*_runNN.csv) in ${campaignDir}`);
  }
  const byLabel = new Map<string, string[]>();
  for (const name of files.sort()) {
    const label = name.replace(/_run\d+\.csv$/, "");
    byLabel.set(label, [...(byLabel.get(label) ?? []), name]);
  }

  const solvers: SolverSeries[] = [];
  for (const [label, names] of byLabel) {
    const fRuns: number[][] = [];
    const gRuns: number[][] = [];
    for (const name of names) {
      const table = parseCsv(fs.readFileSync(path.join(campaignDir, name), "utf-8"));
      requireColumns(table, ["t", "f", "g", "genes"], name);
      fRuns.push(numericColumn(table, "f"));
      gRuns.push(numericColumn(table, "g"));
    }
    const length = Math.min(...fRuns.map((run) => run.length));
    const meanF: number[] = [];
    const meanG: number[] = [];
    const stdG: number[] = [];
    for (let t = 0; t < length; t++) {
      const fs_ = fRuns.map((run) => run[t]);
      const gs = gRuns.map((run) => run[t]);
      const mf = fs_.reduce((a, b) => a + b, 0) / fs_.length;
      const mg = gs.reduce((a, b) => a + b, 0) / gs.length;
      const vg = gs.reduce((a, b) => a + (b - mg) * (b - mg), 0) / gs.length;
      meanF.push(mf);
      meanG.push(mg);
      stdG.push(Math.sqrt(vg));
    }
    solvers.push({ label, meanF, meanG, stdG });
  }

  let baseline: number | null = null;
  const baselinePath = path.join(campaignDir, "baseline.json");
  if (fs.existsSync(baselinePath)) {
    const doc = JSON.parse(fs.readFileSync(baselinePath, "utf-8"));
    if (typeof doc.estimate === "number") {
      baseline = doc.estimate;
    }
  }
  return { solvers, baseline };
}

interface Panel {
  x: Scale;
  y: Scale;
  log: boolean;
}

function makePanel(svg: SvgBuilder, data: ConvergenceData, values: (s: SolverSeries) => number[],
                   xRange: [number, number], yLabel: string): Panel {
  const maxT = Math.max(...data.solvers.map((s) => values(s).length));
  let lo = Infinity;
  let hi = -Infinity;
  for (const solver of data.solvers) {
    for (const v of values(solver)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (data.baseline !== null) {
    lo = Math.min(lo, data.baseline);
    hi = Math.max(hi, data.baseline);
  }
  const useLog = lo > 0 && hi / lo > 50;
  const y = useLog
    ? logScale([lo, hi], [330, 40])
    : linearScale([lo - 0.05 * (hi - lo || 1), hi + 0.05 * (hi - lo || 1)], [330, 40]);
  const x = linearScale([1, maxT], xRange);
  const yTicks = useLog
    ? logTicks(lo, hi)
    : niceTicks(y.domain[0], y.domain[1]);
  svg.axes(x, y, "evaluations", yLabel, yTicks);
  return { x, y, log: useLog };
}

function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); e <= Math.floor(Math.log10(hi)); e++) {
    out.push(Math.pow(10, e));
  }
  return out.length > 0 ? out : [lo, hi];
}

export function renderConvergence(data: ConvergenceData): string {
  const svg = new SvgBuilder(980, 420);
  const left = makePanel(svg, data, (s) => s.meanF, [80, 450], "mean objective");
  const right = makePanel(svg, data, (s) => s.meanG, [570, 940], "mean best-so-far");

  data.solvers.forEach((solver, i) => {
    const color = PALETTE[i % PALETTE.length];
    svg.polyline(solver.meanF.map((v, t) => [left.x(t + 1), left.y(v)]), color, 1.2, "trace-f");

    const band: [number, number][] = [];
    const floor = right.log ? right.y.domain[0] : -Infinity;
    solver.meanG.forEach((v, t) => band.push([right.x(t + 1), right.y(Math.max(v + solver.stdG[t], floor))]));
    for (let t = solver.meanG.length - 1; t >= 0; t--) {
      const lower = Math.max(solver.meanG[t] - solver.stdG[t], right.log ? right.y.domain[0] : -Infinity);
      band.push([right.x(t + 1), right.y(lower)]);
    }
    svg.polygon(band, color);
    svg.polyline(solver.meanG.map((v, t) => [right.x(t + 1), right.y(v)]), color, 1.5, "trace-g");

    svg.rect(570, 14 + i * 14, 10, 10, color);
    svg.text(584, 23 + i * 14, solver.label, 11);
  });

  if (data.baseline !== null) {
    for (const panel of [left, right]) {
      const py = panel.y(data.baseline);
      svg.line(panel.x.range[0], py, panel.x.range[1], py, "#000", 1, "6,4");
    }
    svg.text(84, left.y(data.baseline) - 4, "baseline", 10);
  }
  return svg.render();
}

export function plotConvergence(campaignDir: string, outPath: string): void {
  fs.writeFileSync(outPath, renderConvergence(loadConvergenceData(campaignDir)));
}
