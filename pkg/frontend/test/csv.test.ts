import { readFileSync } from "fs";
import { describe, expect, it } from "vitest";

import { CsvError, parseTrajectoryCsv, seriesOf } from "../src/csv.js";

const FIXTURES = new URL("../fixtures/", import.meta.url).pathname;

function fixture(name: string): string {
  return readFileSync(FIXTURES + name, "utf-8");
}

describe("parseTrajectoryCsv", () => {
  it("parses a clean run and keeps every record", () => {
    const traj = parseTrajectoryCsv(fixture("lv_trajectory.csv"));
    expect(traj.rows.length).toBe(101);
    expect(traj.truncatedAt).toBeNull();
    expect(traj.rows[0].t).toBe(0);
    expect(traj.rows[0].mass).toBeGreaterThan(0);
  });

  it("records the truncation time of a flagged run", () => {
    const traj = parseTrajectoryCsv(fixture("blowup_trajectory.csv"));
    expect(traj.truncatedAt).not.toBeNull();
    expect(traj.truncatedAt!).toBeGreaterThan(0.1);
    expect(traj.truncatedAt!).toBeLessThan(0.14);
    const last = traj.rows[traj.rows.length - 1];
    expect(last.flags).toBe("BlowUpSuspected");
  });

  it("rejects a header-only file", () => {
    expect(() => parseTrajectoryCsv(fixture("empty.csv"))).toThrow(CsvError);
    expect(() => parseTrajectoryCsv(fixture("empty.csv"))).toThrow(/header only/);
  });

  it("rejects a missing schema column", () => {
    expect(() => parseTrajectoryCsv("t,mass\n0,1\n")).toThrow(/missing column: linf_u/);
  });

  it("rejects ragged rows", () => {
    const good = fixture("lv_trajectory.csv").split("\n");
    const bad = [good[0], "0,1,2", ""].join("\n");
    expect(() => parseTrajectoryCsv(bad)).toThrow(CsvError);
  });
});

describe("seriesOf", () => {
  it("extracts (t, value) pairs", () => {
    const traj = parseTrajectoryCsv(fixture("lv_trajectory.csv"));
    const energy = seriesOf(traj, "energy");
    expect(energy.length).toBe(101);
    // this fixture is a dissipative run: the energy never increases
    for (let i = 1; i < energy.length; i++) {
      expect(energy[i][1]).toBeLessThanOrEqual(energy[i - 1][1] * (1 + 1e-8));
    }
  });

  it("stops before the flagged record", () => {
    const traj = parseTrajectoryCsv(fixture("blowup_trajectory.csv"));
    const series = seriesOf(traj, "linf_u");
    expect(series.length).toBe(traj.rows.length - 1);
    expect(Math.max(...series.map((p) => p[1]))).toBeLessThan(1e8);
  });

  it("names the unknown column in its error", () => {
    const traj = parseTrajectoryCsv(fixture("lv_trajectory.csv"));
    expect(() => seriesOf(traj, "entropy")).toThrow(/missing column: entropy/);
  });
});
