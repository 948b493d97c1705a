/** Transmission-profile panels for one selected candidate: one subpanel
 * per gene, drawn against the wavelength grid of the pinned library. */

import * as fs from "node:fs";

import { PALETTE, SvgBuilder, linearScale } from "./svg.js";

interface Library {
  Q: number;
  lo: number;
  hi: number;
  filters: number[][];
}

export function loadLibrary(path: string): Library {
  const doc = JSON.parse(fs.readFileSync(path, "utf-8"));
  for (const key of ["Q", "lo", "hi", "filters"]) {
    if (!(key in doc)) {
      throw new Error(`${path}: not a library document (missing '${key}')`);
    }
  }
  return doc as Library;
}

/** Accepts either a diverse-set document ({members: [{genes, value}]})
 * or a run-log footer ({best: {genes, value}}). */
export function loadCandidate(path: string, rank = 0): { genes: number[]; value: number } {
  const doc = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (Array.isArray(doc.members)) {
    if (rank < 0 || rank >= doc.members.length) {
      throw new Error(`${path}: rank ${rank} outside 0..${doc.members.length - 1}`);
    }
    return { genes: doc.members[rank].genes, value: doc.members[rank].value };
  }
  if (doc.best && Array.isArray(doc.best.genes)) {
    return { genes: doc.best.genes, value: doc.best.value };
  }
  throw new Error(`${path}: neither a diverse set nor a run-log footer`);
}

export function renderProfiles(library: Library, genes: number[], value: number): string {
  const cols = 2;
  const rows = Math.ceil(genes.length / cols);
  const panelW = 340;
  const panelH = 120;
  const margin = 54;
  const svg = new SvgBuilder(cols * (panelW + margin) + 40, rows * (panelH + 42) + 70);
  svg.text((cols * (panelW + margin) + 40) / 2, 24,
           `transmission profiles of the selected candidate (objective ${value.toExponential(3)})`,
           13, "middle");

  const wavelengths = Array.from({ length: library.Q },
    (_, q) => library.lo + (q * (library.hi - library.lo)) / (library.Q - 1));

  genes.forEach((filterId, idx) => {
    const profile = library.filters[filterId];
    if (!profile) {
      throw new Error(`filter ${filterId} not in library`);
    }
    const col = idx % cols;
    const row = Math.floor(idx / cols);
    const x0 = 40 + col * (panelW + margin);
    const y0 = 50 + row * (panelH + 42);
    const x = linearScale([library.lo, library.hi], [x0, x0 + panelW]);
    const y = linearScale([0, 1], [y0 + panelH, y0]);
    svg.line(x0, y0 + panelH, x0 + panelW, y0 + panelH);
    svg.line(x0, y0 + panelH, x0, y0);
    svg.text(x0 - 6, y0 + 4, "1", 9, "end");
    svg.text(x0 - 6, y0 + panelH + 3, "0", 9, "end");
    svg.polyline(profile.map((v, q) => [x(wavelengths[q]), y(v)] as [number, number]),
                 PALETTE[idx % PALETTE.length], 1.0, "profile");
    svg.text(x0 + panelW / 2, y0 + panelH + 16, `filter ${filterId}`, 10, "middle");
  });
  return svg.render();
}

export function plotProfiles(candidatePath: string, libraryPath: string, outPath: string,
                             rank = 0): void {
  const library = loadLibrary(libraryPath);
  const { genes, value } = loadCandidate(candidatePath, rank);
  fs.writeFileSync(outPath, renderProfiles(library, genes, value));
}
