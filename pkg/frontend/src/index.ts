/**
 * Typed client for the l0path sparse-learning CLI.
 *
 * The solver is consumed strictly through its external interfaces: data is
 * handed over as CSV files, fits come back as schema-versioned JSON path
 * artifacts, predictions as CSV. Every number round-trips exactly (shortest
 * decimal serialization on both sides), so results obtained through this
 * client are digit-for-digit the CLI's results.
 *
 * @example
 * ```ts
 * import { fit, cvfit } from "l0path-client";
 * const handle = fit(x, y, { penalty: "L0" });
 * const { indices, values } = handle.coef(0, handle.lambdas(0)[3]);
 * const cv = cvfit(x, y, { penalty: "L0", nFolds: 5, seed: 1 });
 * const yhat = cv.predict(xNew, "best");
 * ```
 */
import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";

import {
  CvBlock,
  ModelRecord,
  PathArtifact,
  closeTo,
  validateArtifact,
} from "./artifact.js";
import {
  DataFileError,
  UsageError,
  makeWorkdir,
  parseCsvColumn,
  removeWorkdir,
  runCli,
  writeMatrixCsv,
  writeVectorCsv,
} from "./runner.js";

export { PathArtifact, ModelRecord, CvBlock } from "./artifact.js";
export { UsageError, DataFileError } from "./runner.js";

export type Penalty = "L0" | "L0L1" | "L0L2";
export type Loss = "squared" | "logistic" | "squared-hinge";

export interface FitConfig {
  penalty?: Penalty;
  loss?: Loss;
  /** Geometric gamma grid bounds and size; forbidden for penalty "L0". */
  gammaMin?: number;
  gammaMax?: number;
  nGamma?: number;
  nLambda?: number;
  maxSupport?: number;
  screenSize?: number;
  localSearch?: boolean;
  tol?: number;
  threads?: number;
}

export interface CvFitConfig extends FitConfig {
  nFolds?: number;
  seed?: number;
}

export type Selector = "best" | { gamma?: number; lambda: number };

export interface Coefficients {
  beta0: number;
  indices: number[];
  values: number[];
  lambda: number;
  gamma: number;
  objective: number;
  supportSize: number;
}

function flagArgs(cfg: FitConfig): string[] {
  const args: string[] = [];
  args.push("--penalty", cfg.penalty ?? "L0");
  if (cfg.loss) args.push("--loss", cfg.loss);
  if (cfg.gammaMin !== undefined) args.push("--gamma-min", String(cfg.gammaMin));
  if (cfg.gammaMax !== undefined) args.push("--gamma-max", String(cfg.gammaMax));
  if (cfg.nGamma !== undefined) args.push("--n-gamma", String(cfg.nGamma));
  if (cfg.nLambda !== undefined) args.push("--n-lambda", String(cfg.nLambda));
  if (cfg.maxSupport !== undefined) args.push("--max-support", String(cfg.maxSupport));
  if (cfg.screenSize !== undefined) args.push("--screen-size", String(cfg.screenSize));
  if (cfg.localSearch === false) args.push("--no-local-search");
  if (cfg.tol !== undefined) args.push("--tol", String(cfg.tol));
  if (cfg.threads !== undefined) args.push("--threads", String(cfg.threads));
  return args;
}

/**
 * Handle over a fitted path artifact. Holds the on-disk workspace so that
 * predictions can be served by the CLI against the same artifact; call
 * dispose() when done.
 */
export class FitHandle {
  constructor(
    readonly artifact: PathArtifact,
    readonly artifactPath: string,
    private readonly workdir: string,
  ) {}

  gammas(): number[] {
    return [...this.artifact.gammas];
  }

  lambdas(gamma: number): number[] {
    const block = this.artifact.paths.find((b) => closeTo(b.gamma, gamma));
    if (!block) throw new UsageError(`gamma ${gamma} not in artifact`);
    return block.models.map((m) => m.lambda);
  }

  /** Coefficients of the stored model at (gamma, lambda). */
  coef(gamma: number, lambda: number): Coefficients {
    const block = this.artifact.paths.find((b) => closeTo(b.gamma, gamma));
    if (!block) throw new UsageError(`gamma ${gamma} not in artifact`);
    const m = block.models.find((r) => closeTo(r.lambda, lambda));
    if (!m) throw new UsageError(`lambda ${lambda} not in artifact`);
    return toCoefficients(m, block.gamma);
  }

  /** Linear predictions for new rows, served by the CLI for exact parity. */
  predict(xNew: readonly (readonly number[])[], sel: Selector): number[] {
    const xPath = join(this.workdir, `predict_x_${Date.now()}.csv`);
    const outPath = join(this.workdir, `predict_out_${Date.now()}.csv`);
    writeMatrixCsv(xPath, xNew);
    runCli([
      "predict", "--model", this.artifactPath,
      "--select", selectorArg(sel),
      "--x", xPath, "--out", outPath,
    ]);
    return parseCsvColumn(readFileSync(outPath, "utf-8"), 0, true);
  }

  dispose(): void {
    removeWorkdir(this.workdir);
  }
}

export class CvFitHandle extends FitHandle {
  get cv(): CvBlock {
    // presence is guaranteed by validateArtifact for kind "cvfit"
    return this.artifact.cv as CvBlock;
  }

  best(): Coefficients {
    return this.coef(this.cv.best_gamma, this.cv.best_lambda);
  }
}

function toCoefficients(m: ModelRecord, gamma: number): Coefficients {
  return {
    beta0: m.beta0,
    indices: [...m.indices],
    values: [...m.values],
    lambda: m.lambda,
    gamma,
    objective: m.objective,
    supportSize: m.support_size,
  };
}

function selectorArg(sel: Selector): string {
  if (sel === "best") return "best";
  if (sel.gamma !== undefined) return `gamma=${sel.gamma},lambda=${sel.lambda}`;
  return `lambda=${sel.lambda}`;
}

function runFitLike(
  command: "fit" | "cvfit",
  x: readonly (readonly number[])[],
  y: readonly number[],
  cfg: FitConfig,
  extra: string[],
): { artifact: PathArtifact; artifactPath: string; workdir: string } {
  if (x.length !== y.length) {
    throw new RangeError(`x has ${x.length} rows but y has ${y.length}`);
  }
  const workdir = makeWorkdir();
  try {
    const xPath = join(workdir, "x.csv");
    const yPath = join(workdir, "y.csv");
    const outPath = join(workdir, `${command}.json`);
    writeMatrixCsv(xPath, x);
    writeVectorCsv(yPath, y);
    runCli([
      command, "--x", xPath, "--y", yPath, "--out", outPath,
      ...flagArgs(cfg), ...extra,
    ]);
    if (!existsSync(outPath)) throw new Error("solver produced no artifact");
    const artifact = validateArtifact(JSON.parse(readFileSync(outPath, "utf-8")));
    return { artifact, artifactPath: outPath, workdir };
  } catch (err) {
    removeWorkdir(workdir);
    throw err;
  }
}

/** Fit a regularization path; numerically identical to `l0path fit`. */
export function fit(
  x: readonly (readonly number[])[],
  y: readonly number[],
  cfg: FitConfig = {},
): FitHandle {
  const r = runFitLike("fit", x, y, cfg, []);
  return new FitHandle(r.artifact, r.artifactPath, r.workdir);
}

/** Cross-validated fit; numerically identical to `l0path cvfit`. */
export function cvfit(
  x: readonly (readonly number[])[],
  y: readonly number[],
  cfg: CvFitConfig = {},
): CvFitHandle {
  const extra: string[] = [];
  if (cfg.nFolds !== undefined) extra.push("--folds", String(cfg.nFolds));
  if (cfg.seed !== undefined) extra.push("--cv-seed", String(cfg.seed));
  const r = runFitLike("cvfit", x, y, cfg, extra);
  return new CvFitHandle(r.artifact, r.artifactPath, r.workdir);
}

/** Predictions from a stored handle at a chosen grid point. */
export function predict(
  handle: FitHandle,
  xNew: readonly (readonly number[])[],
  sel: Selector,
): number[] {
  return handle.predict(xNew, sel);
}
