/**
 * Schema of the JSON path artifacts written by the solver CLI, plus a
 * structural validator. Coefficients are serialized with shortest exact
 * decimals, so JSON.parse reproduces every double bit for bit.
 */

export interface ModelRecord {
  lambda: number;
  beta0: number;
  indices: number[];
  values: number[];
  objective: number;
  support_size: number;
  sweeps: number;
  converged: boolean;
  termination: string;
}

export interface PathBlock {
  gamma: number;
  termination: string;
  models: ModelRecord[];
}

export interface CvRow {
  gamma: number;
  lambda: number;
  mean_loss: number;
  se_loss: number;
}

export interface CvBlock {
  n_folds: number;
  seed: number;
  best_gamma: number;
  best_lambda: number;
  table: CvRow[];
}

export interface PathArtifact {
  schema_version: number;
  kind: "fit" | "cvfit";
  loss: string;
  penalty: string;
  gammas: number[];
  paths: PathBlock[];
  options: Record<string, unknown>;
  seeds: Record<string, unknown>;
  cv?: CvBlock;
}

export const SCHEMA_VERSION = 1;

function fail(msg: string): never {
  throw new Error(`malformed artifact: ${msg}`);
}

function isNum(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

/** Validate the parts of a parsed document this client relies on. */
export function validateArtifact(doc: unknown): PathArtifact {
  if (typeof doc !== "object" || doc === null) fail("not an object");
  const d = doc as Record<string, unknown>;
  if (d.schema_version !== SCHEMA_VERSION) {
    fail(`unsupported schema_version ${String(d.schema_version)}`);
  }
  if (d.kind !== "fit" && d.kind !== "cvfit") fail("bad kind");
  if (!Array.isArray(d.gammas) || !d.gammas.every(isNum)) fail("bad gammas");
  if (!Array.isArray(d.paths)) fail("bad paths");
  for (const block of d.paths as unknown[]) {
    const b = block as Record<string, unknown>;
    if (!isNum(b.gamma) || !Array.isArray(b.models)) fail("bad path block");
    for (const m of b.models as unknown[]) {
      const r = m as Record<string, unknown>;
      if (!isNum(r.lambda) || !isNum(r.beta0) || !isNum(r.objective)) {
        fail("bad model record");
      }
      if (!Array.isArray(r.indices) || !Array.isArray(r.values) ||
          r.indices.length !== r.values.length) {
        fail("ragged coefficient arrays");
      }
    }
  }
  if (d.kind === "cvfit") {
    const cv = d.cv as Record<string, unknown> | undefined;
    if (!cv || !isNum(cv.best_gamma) || !isNum(cv.best_lambda) ||
        !Array.isArray(cv.table)) {
      fail("cvfit artifact missing cv block");
    }
  }
  return d as unknown as PathArtifact;
}

/** Relative float match mirroring the CLI's model lookup. */
export function closeTo(a: number, b: number): boolean {
  return Math.abs(a - b) <= 1e-12 * Math.max(1, Math.abs(a), Math.abs(b));
}
