#!/usr/bin/env node
/**
 * Batch figure generation from stored simulation files.
 *
 *   ontosim-figures flash_scatter   run.flashes.jsonl  out.svg
 *   ontosim-figures density_heatmap run.mdens          out.svg
 *   ontosim-figures trajectories    run.traj.csv       out.svg
 *   ontosim-figures report_table    report.json        out.svg|out.md
 *
 * Optional axis ranges: --x-min --x-max --t-min --t-max.
 */

import { writeFileSync } from "node:fs";
import process from "node:process";

import {
  readDensityFile,
  readFlashFile,
  readReportFile,
  readTrajectoryFile,
} from "./formats.js";
import {
  plotDensity,
  plotFlashes,
  plotTrajectories,
  renderReportMarkdown,
  renderReportTable,
  type AxisRanges,
} from "./figures.js";

const KINDS = ["flash_scatter", "density_heatmap", "trajectories", "report_table"] as const;
type Kind = (typeof KINDS)[number];

interface Args {
  kind: Kind;
  input: string;
  output: string;
  ranges: AxisRanges;
}

export function parseArgs(argv: string[]): Args {
  const positional: string[] = [];
  const ranges: AxisRanges = {};
  const flagMap: Record<string, keyof AxisRanges> = {
    "--x-min": "xMin",
    "--x-max": "xMax",
    "--t-min": "tMin",
    "--t-max": "tMax",
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg in flagMap) {
      const value = Number(argv[++i]);
      if (Number.isNaN(value)) throw new Error(`${arg} needs a numeric value`);
      ranges[flagMap[arg]] = value;
    } else if (arg.startsWith("--")) {
      throw new Error(`unknown flag ${arg}`);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 3) {
    throw new Error("usage: ontosim-figures <kind> <input> <output> [--x-min ...]");
  }
  const [kind, input, output] = positional;
  if (!KINDS.includes(kind as Kind)) {
    throw new Error(`unknown figure kind ${kind}; choose from ${KINDS.join(", ")}`);
  }
  return { kind: kind as Kind, input, output, ranges };
}

export function runFigure(args: Args): { drawn: number; output: string } {
  switch (args.kind) {
    case "flash_scatter": {
      const data = readFlashFile(args.input);
      const fig = plotFlashes(data, args.ranges);
      writeFileSync(args.output, fig.svg);
      return { drawn: fig.drawn, output: args.output };
    }
    case "density_heatmap": {
      const fig = plotDensity(readDensityFile(args.input), args.ranges);
      writeFileSync(args.output, fig.svg);
      return { drawn: fig.drawn, output: args.output };
    }
    case "trajectories": {
      const fig = plotTrajectories(readTrajectoryFile(args.input), args.ranges);
      writeFileSync(args.output, fig.svg);
      return { drawn: fig.drawn, output: args.output };
    }
    case "report_table": {
      const report = readReportFile(args.input);
      if (args.output.endsWith(".md")) {
        writeFileSync(args.output, renderReportMarkdown(report));
        return { drawn: report.reports.length, output: args.output };
      }
      const fig = renderReportTable(report);
      writeFileSync(args.output, fig.svg);
      return { drawn: fig.drawn, output: args.output };
    }
  }
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const { drawn, output } = runFigure(args);
    console.log(`${output}: ${drawn} elements drawn`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
