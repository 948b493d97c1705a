import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { loadConvergenceData, renderConvergence } from "../src/convergence.js";
import { assertParseableSvg, countMatches } from "./helpers.js";

const fixtures = path.join(path.dirname(fileURLToPath(import.meta.url)), "fixtures");
const campaign = path.join(fixtures, "campaign");

describe("convergence figure", () => {
  it("loads per-solver series with the baseline", () => {
    const data = loadConvergenceData(campaign);
    expect(data.solvers.map((s) => s.label).sort()).toEqual(
      ["ea_plus", "umda_u_pls_dist_d1"]);
    expect(data.baseline).toBeGreaterThan(0);
    for (const solver of data.solvers) {
      expect(solver.meanF).toHaveLength(60);
      expect(solver.meanG).toHaveLength(60);
      // best-so-far means inherit monotonicity from every run
      for (let t = 1; t < solver.meanG.length; t++) {
        expect(solver.meanG[t]).toBeLessThanOrEqual(solver.meanG[t - 1] + 1e-15);
      }
    }
  });

  it("renders a parseable SVG with one f-trace and one g-trace per solver", () => {
    const svg = renderConvergence(loadConvergenceData(campaign));
    assertParseableSvg(svg);
    expect(countMatches(svg, /class="trace-f"/g)).toBe(2);
    expect(countMatches(svg, /class="trace-g"/g)).toBe(2);
    expect(svg).toContain("baseline");
  });

  it("rejects directories without run logs", () => {
    expect(() => loadConvergenceData(fixtures)).toThrow(/no run logs/);
  });

  it("names the offending column on schema mismatch", () => {
    const fs = require("node:fs");
    const os = require("node:os");
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "plots-"));
    fs.writeFileSync(path.join(dir, "x_run00.csv"), "t,value\n1,2\n");
    expect(() => loadConvergenceData(dir)).toThrow(/missing column 'f'/);
  });
});
