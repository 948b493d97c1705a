/** Two-color n-by-n grid of neighborhood Welch p-values: cells rejected
 * under the Bonferroni threshold versus the rest. */

import * as fs from "node:fs";

import { numericColumn, parseCsv, requireColumns } from "./csv.js";
import { SvgBuilder } from "./svg.js";

export interface PGridData {
  n: number;
  threshold: number;
  rejectionFraction: number;
  metricChoice: string;
  matrix: number[][];
}

export function loadPGrid(csvPath: string): PGridData {
  const table = parseCsv(fs.readFileSync(csvPath, "utf-8"));
  requireColumns(table, ["i", "j", "p"], csvPath);
  const summary = JSON.parse(fs.readFileSync(csvPath.replace(/\.csv$/, ".json"), "utf-8"));
  const n: number = summary.n;
  const matrix = Array.from({ length: n }, () => new Array<number>(n).fill(NaN));
  const is = numericColumn(table, "i");
  const js = numericColumn(table, "j");
  const ps = numericColumn(table, "p");
  for (let k = 0; k < ps.length; k++) {
    matrix[is[k]][js[k]] = ps[k];
  }
  for (const row of matrix) {
    if (row.some((v) => Number.isNaN(v))) {
      throw new Error(`${csvPath}: incomplete ${n}x${n} p-value grid`);
    }
  }
  return {
    n,
    threshold: summary.threshold,
    rejectionFraction: summary.rejection_fraction,
    metricChoice: summary.metric_choice,
    matrix,
  };
}

const REJECTED_COLOR = "#2166ac";
const ACCEPTED_COLOR = "#b2182b";

export function renderPGrid(data: PGridData): string {
  const size = 420;
  const margin = 60;
  const svg = new SvgBuilder(size + margin * 2, size + margin * 2);
  const cell = size / data.n;
  for (let i = 0; i < data.n; i++) {
    for (let j = 0; j < data.n; j++) {
      const rejected = data.matrix[i][j] < data.threshold;
      svg.rect(margin + j * cell, margin + i * cell, cell, cell,
               rejected ? REJECTED_COLOR : ACCEPTED_COLOR, "#ffffff",
               rejected ? "cell-rejected" : "cell-accepted");
    }
  }
  svg.text(margin + size / 2, margin - 24,
           `distinct neighbors under ${data.metricChoice} mutation`, 13, "middle");
  svg.text(margin + size / 2, margin - 8,
           `rejected ${(100 * data.rejectionFraction).toFixed(1)}% of cells at p < ${data.threshold.toExponential(2)}`,
           11, "middle");
  svg.text(margin + size / 2, margin + size + 28, "mutant j", 12, "middle");
  svg.text(margin - 28, margin + size / 2, "parent i", 12, "middle", -90);
  return svg.render();
}

export function plotPGrid(csvPath: string, outPath: string): void {
  fs.writeFileSync(outPath, renderPGrid(loadPGrid(csvPath)));
}
