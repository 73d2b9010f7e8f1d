import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { DataError, IOFailure, load } from "../src/index.js";

const PYTHON = process.env.TRAJVAULT_PYTHON ?? "python3";

function cli(args: string[]): unknown {
  const res = spawnSync(PYTHON, ["-m", "trajvault", ...args, "--format", "json"], {
    encoding: "utf8",
  });
  expect(res.status, res.stderr).toBe(0);
  return JSON.parse(res.stdout);
}

let work: string;
let vault: string;

beforeAll(() => {
  work = mkdtempSync(join(tmpdir(), "tvb-vault-"));
  vault = join(work, "demo");
  cli(["synth", "--episodes", "40", "--quality", "0.6", "--seed", "11", "--out", vault]);
});

afterAll(() => {
  rmSync(work, { recursive: true, force: true });
});

describe("readVault", () => {
  it("exposes columns with the shapes the core reports", () => {
    const d = load(vault);
    const structure = cli(["describe-structure", vault]) as {
      n_transitions: number;
      n_trajectories: number;
      columns: Array<{ name: string; dtype: string; shape: number[] }>;
    };
    expect(d.nTransitions).toBe(structure.n_transitions);
    expect(d.episodeStarts.length).toBe(structure.n_trajectories);
    const byName = new Map(structure.columns.map((c) => [c.name, c]));
    expect(d.observations.shape).toEqual(byName.get("observations")!.shape);
    expect(d.actions.shape).toEqual(byName.get("actions")!.shape);
    expect(d.rewards.shape).toEqual(byName.get("rewards")!.shape);
    expect(d.terminals.shape).toEqual(byName.get("terminals")!.shape);
    expect(d.state).not.toBeNull();
    expect(d.state!.shape).toEqual(byName.get("state")!.shape);
  });

  it("uses the dtypes of the container format", () => {
    const d = load(vault);
    expect(d.observations.data).toBeInstanceOf(Float32Array);
    expect(d.actions.data).toBeInstanceOf(Int32Array);
    expect(d.rewards.data).toBeInstanceOf(Float32Array);
    expect(d.terminals.data).toBeInstanceOf(Uint8Array);
    expect(d.observations.data.length).toBe(
      d.observations.shape.reduce((a, b) => a * b, 1),
    );
  });

  it("reads episode starts that begin at zero and strictly increase", () => {
    const d = load(vault);
    expect(d.episodeStarts[0]).toBe(0);
    for (let e = 1; e < d.episodeStarts.length; e++) {
      expect(d.episodeStarts[e]!).toBeGreaterThan(d.episodeStarts[e - 1]!);
    }
    // One terminal per episode, at each episode's last transition.
    const total = d.terminals.data.reduce((a, b) => a + b, 0);
    expect(total).toBe(d.episodeStarts.length);
  });

  it("rejects a missing path with the data-error class", () => {
    const missing = join(work, "nope");
    expect(() => load(missing)).toThrowError(DataError);
    try {
      load(missing);
    } catch (err) {
      expect((err as DataError).exitCode).toBe(2);
      expect((err as DataError).message).toContain("not a vault");
    }
  });

  it("rejects a flipped magic byte", () => {
    const broken = join(work, "broken-magic");
    cli(["synth", "--episodes", "5", "--seed", "1", "--out", broken]);
    rmSync(join(broken, "vault.sha256"));
    const blob = readFileSync(join(broken, "data.bin"));
    blob[0] ^= 0xff;
    writeFileSync(join(broken, "data.bin"), blob);
    expect(() => load(broken)).toThrowError(IOFailure);
    expect(() => load(broken)).toThrowError(/bad magic/);
  });

  it("rejects a payload that disagrees with the checksum sidecar", () => {
    const broken = join(work, "broken-sum");
    cli(["synth", "--episodes", "5", "--seed", "2", "--out", broken]);
    const path = join(broken, "data.bin");
    const blob = readFileSync(path);
    blob[blob.length - 1] ^= 0x01;
    writeFileSync(path, blob);
    expect(() => load(broken)).toThrowError(/checksum mismatch/);
    try {
      load(broken);
    } catch (err) {
      expect((err as IOFailure).exitCode).toBe(3);
    }
  });
});
