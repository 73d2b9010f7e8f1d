import { spawnSync } from "node:child_process";

import { IOFailure, errorForExit } from "./errors.js";

/**
 * Interpreter used to run the core package. Override with TRAJVAULT_PYTHON
 * when the core lives in a non-default environment.
 */
const PYTHON = process.env.TRAJVAULT_PYTHON ?? "python3";

// Reports on large vaults stay well under this, but leave headroom: a
// truncated stdout would otherwise surface as a confusing JSON parse error.
const MAX_STDOUT_BYTES = 1 << 28;

/**
 * Run one trajvault subcommand in JSON mode and parse its stdout.
 *
 * All analytics happen in the core process; this layer only marshals
 * arguments and results. Non-zero exits become UsageError / DataError /
 * IOFailure according to the exit code, carrying the core's own message.
 */
export function invoke(args: string[]): unknown {
  const res = spawnSync(PYTHON, ["-m", "trajvault", ...args, "--format", "json"], {
    encoding: "utf8",
    maxBuffer: MAX_STDOUT_BYTES,
  });
  if (res.error) {
    throw new IOFailure(`failed to launch ${PYTHON}: ${res.error.message}`);
  }
  if (res.status !== 0) {
    const stderr = (res.stderr ?? "").trim();
    const message = stderr.replace(/^error:\s*/, "") || `exit status ${res.status}`;
    throw errorForExit(res.status ?? 3, message);
  }
  return JSON.parse(res.stdout);
}
