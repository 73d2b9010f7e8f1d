import { readFileSync } from "node:fs";
import { join } from "node:path";

import { invoke } from "./cli.js";
import { readVault } from "./vault.js";
import type { BoundDataset } from "./vault.js";

export { invoke } from "./cli.js";
export { DataError, IOFailure, TrajvaultError, UsageError, errorForExit } from "./errors.js";
export { readVault } from "./vault.js";
export type { BoundDataset, Column, ColumnArray } from "./vault.js";

/**
 * These bindings contain no analytics: vault files are parsed natively and
 * every computation is delegated to the core CLI in JSON mode, so numeric
 * results are the core's results verbatim.
 */

/** A loaded vault or the path of one on disk. */
export type VaultRef = BoundDataset | string;

function pathOf(ref: VaultRef): string {
  return typeof ref === "string" ? ref : ref.path;
}

/** The seeded, replayable record a resampling operation leaves beside its output. */
export interface SelectionPlan {
  source: string;
  seed: number;
  indices: number[];
  achieved: Record<string, unknown>;
}

/** A resampling result: the new vault, loaded, plus its selection plan. */
export interface ResampleResult {
  dataset: BoundDataset;
  plan: SelectionPlan;
  report: Record<string, unknown>;
}

function loadPlan(outDir: string): SelectionPlan {
  return JSON.parse(readFileSync(join(outDir, "selection_plan.json"), "utf8")) as SelectionPlan;
}

/** Load a vault directory into typed arrays. */
export function load(path: string): BoundDataset {
  return readVault(path);
}

/** Per-vault statistics rows, exactly as the CLI summary reports them. */
export function summary(...vaults: VaultRef[]): Record<string, unknown> {
  return invoke(["summary", ...vaults.map(pathOf)]) as Record<string, unknown>;
}

/** Unique-pair coverage ratios and count-frequency spectrum for one vault. */
export function coverage(vault: VaultRef, opts: { exact?: boolean } = {}): Record<string, unknown> {
  const args = ["describe-coverage", pathOf(vault)];
  if (opts.exact) {
    args.push("--exact");
  }
  return invoke(args) as Record<string, unknown>;
}

export interface SubsampleOptions {
  out: string;
  transitions?: number;
  seed?: number;
  replayPlan?: string;
}

/** Subsample whole episodes to a transition budget (or replay a saved plan). */
export function subsample(vault: VaultRef, opts: SubsampleOptions): ResampleResult {
  const args = ["subsample", pathOf(vault), "--out", opts.out];
  if (opts.transitions !== undefined) {
    args.push("--transitions", String(opts.transitions));
  }
  if (opts.seed !== undefined) {
    args.push("--seed", String(opts.seed));
  }
  if (opts.replayPlan !== undefined) {
    args.push("--replay-plan", opts.replayPlan);
  }
  const report = invoke(args) as Record<string, unknown>;
  return { dataset: readVault(opts.out), plan: loadPlan(opts.out), report };
}

/** Concatenate several vaults into one. */
export function combine(vaults: VaultRef[], opts: { out: string }): ResampleResult {
  const report = invoke(["combine", ...vaults.map(pathOf), "--out", opts.out]) as Record<
    string,
    unknown
  >;
  return { dataset: readVault(opts.out), plan: loadPlan(opts.out), report };
}

export interface MatchOptions {
  outA: string;
  outB: string;
  budget: number;
  bins?: number;
  seed?: number;
}

/** Subsample two vaults to bin-for-bin identical return histograms. */
export function match(
  a: VaultRef,
  b: VaultRef,
  opts: MatchOptions,
): { datasets: [BoundDataset, BoundDataset]; plans: [SelectionPlan, SelectionPlan]; report: Record<string, unknown> } {
  const args = [
    "match",
    pathOf(a),
    pathOf(b),
    "--budget",
    String(opts.budget),
    "--out-a",
    opts.outA,
    "--out-b",
    opts.outB,
  ];
  if (opts.bins !== undefined) {
    args.push("--bins", String(opts.bins));
  }
  if (opts.seed !== undefined) {
    args.push("--seed", String(opts.seed));
  }
  const report = invoke(args) as Record<string, unknown>;
  return {
    datasets: [readVault(opts.outA), readVault(opts.outB)],
    plans: [loadPlan(opts.outA), loadPlan(opts.outB)],
    report,
  };
}
