/**
 * Parser for the simulator's trajectory CSV logs.
 *
 * Schema (fixed column order, written by the simulator):
 *   t,linf_u,linf_v,linf_w,lp_sum,mass,energy,dt,flags
 *
 * A nonempty flags cell marks the record where the run stopped (blow-up
 * suspected); the numeric series is considered truncated there.
 */

export const TRAJECTORY_COLUMNS = [
  "t",
  "linf_u",
  "linf_v",
  "linf_w",
  "lp_sum",
  "mass",
  "energy",
  "dt",
] as const;

export type TrajectoryColumn = (typeof TRAJECTORY_COLUMNS)[number];

export interface TrajectoryRow {
  t: number;
  linf_u: number;
  linf_v: number;
  linf_w: number;
  lp_sum: number;
  mass: number;
  energy: number;
  dt: number;
  flags: string;
}

export interface Trajectory {
  rows: TrajectoryRow[];
  /** header columns as found in the file */
  columns: string[];
  /** time of the first flagged record, if any */
  truncatedAt: number | null;
}

export class CsvError extends Error {}

export function parseTrajectoryCsv(text: string): Trajectory {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty file: no header line");
  }
  const columns = lines[0].split(",");
  for (const required of [...TRAJECTORY_COLUMNS, "flags"]) {
    if (!columns.includes(required)) {
      throw new CsvError(`missing column: ${required}`);
    }
  }
  if (lines.length === 1) {
    throw new CsvError("empty CSV: header only, no data rows");
  }
  const idx = new Map(columns.map((c, i) => [c, i]));
  const rows: TrajectoryRow[] = [];
  let truncatedAt: number | null = null;
  for (let k = 1; k < lines.length; k++) {
    const cells = lines[k].split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(`row ${k}: expected ${columns.length} cells, got ${cells.length}`);
    }
    const num = (name: string): number => {
      const raw = cells[idx.get(name)!];
      const value = Number(raw);
      if (raw === "" || Number.isNaN(value)) {
        throw new CsvError(`row ${k}: cannot parse ${name}=${JSON.stringify(raw)}`);
      }
      return value;
    };
    const row: TrajectoryRow = {
      t: num("t"),
      linf_u: num("linf_u"),
      linf_v: num("linf_v"),
      linf_w: num("linf_w"),
      lp_sum: num("lp_sum"),
      mass: num("mass"),
      energy: num("energy"),
      dt: num("dt"),
      flags: cells[idx.get("flags")!],
    };
    if (row.flags !== "" && truncatedAt === null) {
      truncatedAt = row.t;
    }
    rows.push(row);
  }
  return { rows, columns, truncatedAt };
}

/**
 * Extract one quantity as (t, value) pairs, stopping before the first
 * flagged record (its values are the ones that tripped the blow-up guard).
 */
export function seriesOf(traj: Trajectory, column: string): Array<[number, number]> {
  if (!(TRAJECTORY_COLUMNS as readonly string[]).includes(column)) {
    throw new CsvError(`missing column: ${column}`);
  }
  const out: Array<[number, number]> = [];
  for (const row of traj.rows) {
    if (row.flags !== "") break;
    out.push([row.t, row[column as TrajectoryColumn]]);
  }
  if (out.length === 0) {
    throw new CsvError(`no unflagged data rows for column ${column}`);
  }
  return out;
}
