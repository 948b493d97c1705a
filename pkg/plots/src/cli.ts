/** CLI: one command per figure kind, each reading the documented artifact
 * schemas and writing one SVG.
 *
 *   plot convergence --in <campaign_dir> --out fig.svg
 *   plot pgrid       --in <report.csv> --out fig.svg
 *   plot profiles    --in <diverse.json|run.json> --library <library.json> --out fig.svg [--rank N]
 *   plot histogram   --in <samples.json> --out fig.svg [--no-fit]
 */

import { plotConvergence } from "./convergence.js";
import { plotHistogram } from "./histogram.js";
import { plotPGrid } from "./pgrid.js";
import { plotProfiles } from "./profiles.js";

interface Args {
  flags: Map<string, string>;
  switches: Set<string>;
}

function parseArgs(argv: string[]): Args {
  const flags = new Map<string, string>();
  const switches = new Set<string>();
  for (let i = 0; i < argv.length; i++) {
    const token = argv[i];
    if (!token.startsWith("--")) {
      throw new Error(`unexpected argument '${token}'`);
    }
    const name = token.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      flags.set(name, argv[++i]);
    } else {
      switches.add(name);
    }
  }
  return { flags, switches };
}

function required(args: Args, name: string): string {
  const value = args.flags.get(name);
  if (value === undefined) {
    throw new Error(`missing required flag --${name}`);
  }
  return value;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (!command) {
    console.error("usage: plot <convergence|pgrid|profiles|histogram> --in ... --out ...");
    return 2;
  }
  try {
    const args = parseArgs(rest);
    const input = required(args, "in");
    const out = required(args, "out");
    switch (command) {
      case "convergence":
        plotConvergence(input, out);
        break;
      case "pgrid":
        plotPGrid(input, out);
        break;
      case "profiles":
        plotProfiles(input, required(args, "library"), out,
                     Number(args.flags.get("rank") ?? "0"));
        break;
      case "histogram":
        plotHistogram(input, out, !args.switches.has("no-fit"));
        break;
      default:
        console.error(`unknown figure kind '${command}'`);
        return 2;
    }
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
