import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { loadCandidate, loadLibrary, renderProfiles } from "../src/profiles.js";
import { assertParseableSvg, countMatches } from "./helpers.js";

const fixtures = path.join(path.dirname(fileURLToPath(import.meta.url)), "fixtures");
const libraryPath = path.join(fixtures, "campaign", "library.json");

describe("profile panels", () => {
  it("renders the top diverse candidate as one panel per gene", () => {
    const library = loadLibrary(libraryPath);
    const { genes, value } = loadCandidate(path.join(fixtures, "diverse_reeval.json"));
    const svg = renderProfiles(library, genes, value);
    assertParseableSvg(svg);
    expect(countMatches(svg, /class="profile"/g)).toBe(genes.length);
    expect(genes).toHaveLength(8);
  });

  it("accepts a run-log footer as the candidate source", () => {
    const library = loadLibrary(libraryPath);
    const footer = path.join(fixtures, "campaign", "umda_u_pls_dist_d1_run00.json");
    const { genes } = loadCandidate(footer);
    const svg = renderProfiles(library, genes, 1.0);
    assertParseableSvg(svg);
    expect(countMatches(svg, /class="profile"/g)).toBe(8);
  });

  it("bounds the diverse-set rank", () => {
    expect(() => loadCandidate(path.join(fixtures, "diverse.json"), 10_000)).toThrow(/rank/);
  });

  it("rejects non-library documents", () => {
    expect(() => loadLibrary(path.join(fixtures, "diverse.json"))).toThrow(/missing 'Q'/);
  });
});
