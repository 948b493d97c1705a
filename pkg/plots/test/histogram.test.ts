import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { fitGaussian } from "../src/gaussian.js";
import { binSamples, loadSamples, renderHistogram } from "../src/histogram.js";
import { assertParseableSvg, countMatches, normalSamples } from "./helpers.js";

const fixtures = path.join(path.dirname(fileURLToPath(import.meta.url)), "fixtures");

describe("deviation histogram", () => {
  it("renders the golden fixture with candidate and baseline overlays", () => {
    const input = loadSamples(path.join(fixtures, "samples.json"));
    const svg = renderHistogram(input);
    assertParseableSvg(svg);
    expect(countMatches(svg, /class="gaussian-fit"/g)).toBe(2);
    expect(countMatches(svg, /class="hist-bar"/g)).toBeGreaterThan(5);
  });

  it("recovers mean and std of 10^4 standard-normal samples within 3 sigma", () => {
    const n = 10_000;
    const samples = normalSamples(n, 42);
    const fit = fitGaussian(samples);
    expect(Math.abs(fit.mean - 0)).toBeLessThan(3 / Math.sqrt(n));
    expect(Math.abs(fit.std - 1)).toBeLessThan(3 / Math.sqrt(2 * n));
    assertParseableSvg(renderHistogram({ samples }));
  });

  it("uses 60 bins", () => {
    const bins = binSamples(normalSamples(1000, 7));
    expect(bins.counts).toHaveLength(60);
    expect(bins.edges).toHaveLength(61);
    expect(bins.counts.reduce((a, b) => a + b, 0)).toBe(1000);
  });

  it("puts constant samples in a single occupied bin with fit disabled", () => {
    const svg = renderHistogram({ samples: new Array(50).fill(0.25) }, false);
    assertParseableSvg(svg);
    expect(countMatches(svg, /class="hist-bar"/g)).toBe(1);
    expect(countMatches(svg, /class="gaussian-fit"/g)).toBe(0);
  });

  it("draws exactly two curves in overlay mode", () => {
    const svg = renderHistogram({
      samples: normalSamples(500, 1),
      baselineSamples: normalSamples(500, 2).map((v) => v * 2),
    });
    expect(countMatches(svg, /class="gaussian-fit"/g)).toBe(2);
  });
});
