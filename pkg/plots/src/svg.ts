/** Hand-rolled SVG assembly: scales, ticks and a small element builder. */

export type Point = [number, number];

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const lo = Math.log10(domain[0]);
  const hi = Math.log10(domain[1]);
  const inner = linearScale([lo, hi], range);
  const scale = ((value: number) => inner(Math.log10(value))) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

/** Round ticks covering [lo, hi] at a 1/2/5 step. */
export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const rawStep = (hi - lo) / Math.max(1, count);
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 5, 10].map((m) => m * power);
  const step = candidates.find((c) => c >= rawStep) ?? candidates[3];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

export function formatTick(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1e4 || abs < 1e-3) return value.toExponential(1);
  return String(Number(value.toPrecision(4)));
}

const escapeText = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
];

export class SvgBuilder {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  private push(fragment: string): void {
    this.parts.push(fragment);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#333", strokeWidth = 1, dash = ""): void {
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.push(`<line x1="${r(x1)}" y1="${r(y1)}" x2="${r(x2)}" y2="${r(y2)}" stroke="${stroke}" stroke-width="${strokeWidth}"${dashAttr}/>`);
  }

  polyline(points: Point[], stroke: string, strokeWidth = 1.5, className = ""): void {
    const pts = points.map(([x, y]) => `${r(x)},${r(y)}`).join(" ");
    const cls = className ? ` class="${className}"` : "";
    this.push(`<polyline${cls} points="${pts}" fill="none" stroke="${stroke}" stroke-width="${strokeWidth}"/>`);
  }

  polygon(points: Point[], fill: string, opacity = 0.25): void {
    const pts = points.map(([x, y]) => `${r(x)},${r(y)}`).join(" ");
    this.push(`<polygon points="${pts}" fill="${fill}" fill-opacity="${opacity}" stroke="none"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = "none", className = ""): void {
    const cls = className ? ` class="${className}"` : "";
    this.push(`<rect${cls} x="${r(x)}" y="${r(y)}" width="${r(Math.max(w, 0))}" height="${r(Math.max(h, 0))}" fill="${fill}" stroke="${stroke}"/>`);
  }

  text(x: number, y: number, content: string, size = 11, anchor: "start" | "middle" | "end" = "start", rotate = 0): void {
    const transform = rotate ? ` transform="rotate(${rotate} ${r(x)} ${r(y)})"` : "";
    this.push(`<text x="${r(x)}" y="${r(y)}" font-size="${size}" font-family="sans-serif" text-anchor="${anchor}"${transform}>${escapeText(content)}</text>`);
  }

  /** Axis frame with ticks and labels for one panel. */
  axes(x: Scale, y: Scale, xLabel: string, yLabel: string, yTickValues?: number[]): void {
    const [x0, x1] = x.range;
    const [y0, y1] = y.range;
    this.line(x0, y0, x1, y0);
    this.line(x0, y0, x0, y1);
    for (const t of niceTicks(x.domain[0], x.domain[1])) {
      const px = x(t);
      this.line(px, y0, px, y0 + 4);
      this.text(px, y0 + 16, formatTick(t), 10, "middle");
    }
    const yTicks = yTickValues ?? niceTicks(y.domain[0], y.domain[1]);
    for (const t of yTicks) {
      const py = y(t);
      this.line(x0 - 4, py, x0, py);
      this.text(x0 - 6, py + 3, formatTick(t), 10, "end");
    }
    this.text((x0 + x1) / 2, y0 + 32, xLabel, 12, "middle");
    this.text(x0 - 52, (y0 + y1) / 2, yLabel, 12, "middle", -90);
  }

  render(): string {
    return [
      `<?xml version="1.0" encoding="UTF-8"?>`,
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      `</svg>`,
    ].join("\n");
  }
}

function r(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(2);
}
