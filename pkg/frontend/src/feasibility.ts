/** Parser for the parameter-feasibility sweep JSON emitted by the CLI. */

export interface FeasibilitySweep {
  theta: number[];
  sigma: number[];
  /** feasible[si][ti] is the verdict at (theta[ti], sigma[si]) */
  feasible: boolean[][];
  dLabel: string;
}

export class SweepError extends Error {}

export function parseFeasibilitySweep(text: string): FeasibilitySweep {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (e) {
    throw new SweepError(`malformed JSON: ${(e as Error).message}`);
  }
  const rec = obj as Record<string, unknown>;
  const theta = rec["theta"];
  const sigma = rec["sigma"];
  const feasible = rec["feasible"];
  if (!Array.isArray(theta) || !Array.isArray(sigma) || !Array.isArray(feasible)) {
    throw new SweepError("sweep must contain 'theta', 'sigma' and 'feasible' arrays");
  }
  if (theta.length === 0 || sigma.length === 0 || feasible.length === 0) {
    throw new SweepError("empty sweep: no grid points");
  }
  if (feasible.length !== sigma.length) {
    throw new SweepError("feasible row count must match the sigma grid");
  }
  for (const row of feasible) {
    if (!Array.isArray(row) || row.length !== theta.length) {
      throw new SweepError("feasible column count must match the theta grid");
    }
  }
  let dLabel = "";
  const d = rec["d"] as Record<string, unknown> | undefined;
  if (d && Array.isArray(d["d"])) {
    dLabel = `d = (${(d["d"] as number[]).join(", ")})`;
  }
  return {
    theta: theta.map(Number),
    sigma: sigma.map(Number),
    feasible: feasible.map((row) => (row as unknown[]).map(Boolean)),
    dLabel,
  };
}
