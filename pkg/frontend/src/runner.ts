/**
 * Process plumbing: temp workspaces, full-precision CSV writing, and
 * invocation of the solver CLI with exit-code-aware error mapping.
 */
import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Override with the L0PATH_BIN environment variable when the CLI is not
 * on PATH. */
export function solverBinary(): string {
  return process.env.L0PATH_BIN ?? "l0path";
}

export class UsageError extends Error {}
export class DataFileError extends Error {}

export function runCli(args: string[], cwd?: string): string {
  const res = spawnSync(solverBinary(), args, {
    cwd,
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (res.error) {
    throw new Error(`failed to launch ${solverBinary()}: ${res.error.message}`);
  }
  if (res.status === 0) return res.stdout;
  const detail = (res.stderr || res.stdout || "").trim();
  if (res.status === 2) throw new UsageError(detail);
  if (res.status === 3) throw new DataFileError(detail);
  throw new Error(`solver failed (exit ${res.status}): ${detail}`);
}

export function makeWorkdir(): string {
  return mkdtempSync(join(tmpdir(), "l0path-client-"));
}

export function removeWorkdir(dir: string): void {
  rmSync(dir, { recursive: true, force: true });
}

/** Number.toString emits the shortest decimal that parses back to the same
 * double, matching the precision contract of the solver's own CSV output. */
function fmt(v: number): string {
  if (!Number.isFinite(v)) throw new RangeError(`non-finite value ${v}`);
  return v.toString();
}

export function writeMatrixCsv(path: string, x: readonly (readonly number[])[]): void {
  if (x.length === 0 || x[0].length === 0) {
    throw new RangeError("matrix must be nonempty");
  }
  const width = x[0].length;
  const lines = x.map((row) => {
    if (row.length !== width) throw new RangeError("ragged matrix");
    return row.map(fmt).join(",");
  });
  writeFileSync(path, lines.join("\n") + "\n");
}

export function writeVectorCsv(path: string, y: readonly number[]): void {
  if (y.length === 0) throw new RangeError("response must be nonempty");
  writeFileSync(path, y.map(fmt).join("\n") + "\n");
}

export function parseCsvColumn(text: string, column: number, skipHeader: boolean): number[] {
  const out: number[] = [];
  for (const line of text.split("\n")) {
    if (!line.trim()) continue;
    if (skipHeader) {
      skipHeader = false;
      continue;
    }
    const cells = line.split(",");
    out.push(Number(cells[column]));
  }
  return out;
}
