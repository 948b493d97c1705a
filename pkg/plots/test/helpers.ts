import { expect } from "vitest";

/** Shallow XML well-formedness check: balanced tags, quoted attributes,
 * no stray '<' in text. Enough to guarantee an SVG viewer can parse it. */
export function assertParseableSvg(svg: string): void {
  const withoutDecl = svg.replace(/^<\?xml[^>]*\?>\s*/, "");
  const tag = /<(\/?)([A-Za-z][\w:-]*)((?:\s+[\w:-]+="[^"<>]*")*)\s*(\/?)>/g;
  const stack: string[] = [];
  let cursor = 0;
  let match: RegExpExecArray | null;
  while ((match = tag.exec(withoutDecl)) !== null) {
    const between = withoutDecl.slice(cursor, match.index);
    expect(between.includes("<"), `stray '<' in text: ${between}`).toBe(false);
    cursor = tag.lastIndex;
    const [, closing, name, , selfClosing] = match;
    if (closing) {
      expect(stack.pop(), `closing </${name}> without opener`).toBe(name);
    } else if (!selfClosing) {
      stack.push(name);
    }
  }
  expect(withoutDecl.slice(cursor).trim()).toBe("");
  expect(stack).toEqual([]);
  expect(withoutDecl.startsWith("<svg ")).toBe(true);
}

export function countMatches(svg: string, pattern: RegExp): number {
  return (svg.match(pattern) ?? []).length;
}

/** Deterministic standard-normal stream (mulberry32 + Box-Muller). */
export function normalSamples(n: number, seed: number): number[] {
  let state = seed >>> 0;
  const uniform = () => {
    state |= 0;
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
  const out: number[] = [];
  while (out.length < n) {
    const u1 = Math.max(uniform(), 1e-12);
    const u2 = uniform();
    const r = Math.sqrt(-2 * Math.log(u1));
    out.push(r * Math.cos(2 * Math.PI * u2));
    if (out.length < n) {
      out.push(r * Math.sin(2 * Math.PI * u2));
    }
  }
  return out;
}
