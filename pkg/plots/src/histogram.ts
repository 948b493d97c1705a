/** Deviation histogram (60 equal bins) with a maximum-likelihood Gaussian
 * overlay; a second overlay compares against the baseline's fit. */

import * as fs from "node:fs";

import { fitGaussian, gaussianPdf } from "./gaussian.js";
import { SvgBuilder, linearScale, niceTicks } from "./svg.js";

export const BIN_COUNT = 60;

export interface HistogramInput {
  samples: number[];
  baselineSamples?: number[];
}

export function loadSamples(path: string): HistogramInput {
  const doc = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (!Array.isArray(doc.samples)) {
    throw new Error(`${path}: missing 'samples' array`);
  }
  return {
    samples: doc.samples,
    baselineSamples: Array.isArray(doc.baseline_samples) ? doc.baseline_samples : undefined,
  };
}

export interface Bins {
  edges: number[];
  counts: number[];
}

export function binSamples(samples: number[], binCount = BIN_COUNT): Bins {
  if (samples.length < 2) {
    throw new Error("need at least 2 samples");
  }
  let lo = Math.min(...samples);
  let hi = Math.max(...samples);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const width = (hi - lo) / binCount;
  const counts = new Array<number>(binCount).fill(0);
  for (const v of samples) {
    const bin = Math.min(binCount - 1, Math.floor((v - lo) / width));
    counts[bin] += 1;
  }
  const edges = Array.from({ length: binCount + 1 }, (_, i) => lo + i * width);
  return { edges, counts };
}

export function renderHistogram(input: HistogramInput, fit = true): string {
  const svg = new SvgBuilder(640, 420);
  const bins = binSamples(input.samples);
  const lo = bins.edges[0];
  const hi = bins.edges[bins.edges.length - 1];
  const binWidth = bins.edges[1] - bins.edges[0];
  const maxCount = Math.max(...bins.counts);

  const x = linearScale([lo, hi], [70, 610]);
  const y = linearScale([0, maxCount * 1.1], [370, 40]);
  svg.axes(x, y, "relative retrieval deviation", "count", niceTicks(0, maxCount * 1.1));

  bins.counts.forEach((count, i) => {
    if (count > 0) {
      svg.rect(x(bins.edges[i]), y(count), x(bins.edges[i + 1]) - x(bins.edges[i]),
               y(0) - y(count), "#9ecae1", "#6baed6", "hist-bar");
    }
  });

  if (fit) {
    const overlays: { samples: number[]; color: string; label: string }[] = [
      { samples: input.samples, color: "#d62728", label: "candidate fit" },
    ];
    if (input.baselineSamples && input.baselineSamples.length >= 2) {
      overlays.push({ samples: input.baselineSamples, color: "#444444", label: "baseline fit" });
    }
    overlays.forEach((overlay, idx) => {
      const g = fitGaussian(overlay.samples);
      const points: [number, number][] = [];
      for (let i = 0; i <= 240; i++) {
        const v = lo + ((hi - lo) * i) / 240;
        const density = gaussianPdf(v, g) * input.samples.length * binWidth;
        points.push([x(v), y(Math.min(density, y.domain[1]))]);
      }
      svg.polyline(points, overlay.color, 1.8, "gaussian-fit");
      svg.rect(480, 14 + idx * 16, 10, 3, overlay.color);
      svg.text(494, 20 + idx * 16,
               `${overlay.label}: mean ${g.mean.toExponential(2)}, std ${g.std.toExponential(2)}`, 10);
    });
  }
  return svg.render();
}

export function plotHistogram(samplesPath: string, outPath: string, fit = true): void {
  fs.writeFileSync(outPath, renderHistogram(loadSamples(samplesPath), fit));
}
