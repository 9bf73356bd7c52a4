#!/usr/bin/env node
/**
 * rdx3-plot: figures from simulator CSV logs and feasibility sweeps.
 *
 *   rdx3-plot trajectory --csv run.csv --cols energy,mass --out fig.svg [--log]
 *   rdx3-plot feasibility --json sweep.json --out fig.svg
 *
 * With several --cols the column name is inserted before the extension
 * (fig_energy.svg, fig_mass.svg).  Inputs are never modified.  Exit 0 on
 * success, 1 on any error (usage, I/O, malformed input, missing column).
 */

import { readFileSync, writeFileSync } from "fs";
import { CsvError, parseTrajectoryCsv, seriesOf } from "./csv.js";
import { SweepError, parseFeasibilitySweep } from "./feasibility.js";
import { buildFeasibilityChart, buildLineChart } from "./svg.js";

interface Flags {
  [key: string]: string | boolean;
}

function parseFlags(args: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < args.length; i++) {
    const arg = args[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument: ${arg}`);
    }
    const name = arg.slice(2);
    if (i + 1 < args.length && !args[i + 1].startsWith("--")) {
      flags[name] = args[++i];
    } else {
      flags[name] = true;
    }
  }
  return flags;
}

function requireString(flags: Flags, name: string): string {
  const v = flags[name];
  if (typeof v !== "string" || v.length === 0) {
    throw new Error(`missing required option --${name}`);
  }
  return v;
}

function outPathFor(base: string, column: string, multi: boolean): string {
  if (!multi) return base;
  const dot = base.lastIndexOf(".");
  if (dot <= 0) return `${base}_${column}`;
  return `${base.slice(0, dot)}_${column}${base.slice(dot)}`;
}

export function cmdTrajectory(flags: Flags): string[] {
  const csvPath = requireString(flags, "csv");
  const outBase = requireString(flags, "out");
  const cols = requireString(flags, "cols").split(",").map((c) => c.trim()).filter(Boolean);
  if (cols.length === 0) {
    throw new Error("no columns selected");
  }
  const logY = flags["log"] === true;
  const traj = parseTrajectoryCsv(readFileSync(csvPath, "utf-8"));
  const written: string[] = [];
  for (const col of cols) {
    const points = seriesOf(traj, col);
    const svg = buildLineChart({
      title: `${col} over time`,
      yLabel: col,
      points,
      logY,
      markerT: traj.truncatedAt,
      markerLabel: traj.truncatedAt == null ? undefined : `truncated at t=${traj.truncatedAt.toPrecision(6)}`,
    });
    const path = outPathFor(outBase, col, cols.length > 1);
    writeFileSync(path, svg);
    written.push(path);
  }
  return written;
}

export function cmdFeasibility(flags: Flags): string[] {
  const jsonPath = requireString(flags, "json");
  const outPath = requireString(flags, "out");
  const sweep = parseFeasibilitySweep(readFileSync(jsonPath, "utf-8"));
  const svg = buildFeasibilityChart(sweep, "feasible (theta, sigma) region");
  writeFileSync(outPath, svg);
  return [outPath];
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "trajectory") {
      for (const path of cmdTrajectory(parseFlags(rest))) {
        console.log(`wrote ${path}`);
      }
      return 0;
    }
    if (command === "feasibility") {
      for (const path of cmdFeasibility(parseFlags(rest))) {
        console.log(`wrote ${path}`);
      }
      return 0;
    }
    console.error("usage: rdx3-plot <trajectory|feasibility> [options]");
    return 1;
  } catch (e) {
    if (e instanceof CsvError || e instanceof SweepError) {
      console.error(`error: ${e.message}`);
    } else if (e instanceof Error) {
      console.error(`error: ${e.message}`);
    } else {
      console.error(`error: ${String(e)}`);
    }
    return 1;
  }
}

const isDirect =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirect) {
  process.exit(main(process.argv.slice(2)));
}
