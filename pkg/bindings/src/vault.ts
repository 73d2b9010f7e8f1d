import { createHash } from "node:crypto";
import { existsSync, readFileSync, statSync } from "node:fs";
import { join } from "node:path";

import { DataError, IOFailure } from "./errors.js";

/**
 * Native reader for the vault container.
 *
 * Layout of data.bin (all integers little-endian):
 *   magic "OGMV1\0", then u32 format_version, u64 n_transitions,
 *   u32 n_agents, u32 section_count; then section_count 74-byte entries
 *   (32-byte zero-padded ASCII name, u8 dtype code {0=f32, 1=i32, 2=u8},
 *   u8 rank, 3x u64 dims, u64 payload offset, u64 payload byte length);
 *   then the raw row-major payloads.
 * episodes.idx is a u64 count followed by that many u64 episode starts.
 * vault.sha256 holds "<hex>  <filename>" lines for both binary files.
 */

const MAGIC = "OGMV1\0";
const HEADER_AT = 6;
const TABLE_AT = 26;
const ENTRY_SIZE = 74;
const FORMAT_VERSION = 1;

export type ColumnArray = Float32Array | Int32Array | Uint8Array;

/** One stored column: a flat typed array plus its row-major shape. */
export interface Column {
  readonly data: ColumnArray;
  readonly shape: readonly number[];
}

/**
 * An immutable loaded vault. Columns are zero-copy views over the read
 * buffer when their file offsets are element-aligned, otherwise copies;
 * treat the arrays as read-only either way.
 */
export interface BoundDataset {
  readonly path: string;
  readonly formatVersion: number;
  readonly nTransitions: number;
  readonly nAgents: number;
  readonly meta: Record<string, unknown>;
  readonly agents: ReadonlyArray<Record<string, unknown>>;
  readonly observations: Column;
  readonly actions: Column;
  readonly rewards: Column;
  readonly terminals: Column;
  readonly state: Column | null;
  readonly episodeStarts: readonly number[];
}

type Ctor = Float32ArrayConstructor | Int32ArrayConstructor | Uint8ArrayConstructor;

const DTYPE_CTORS: Record<number, Ctor> = {
  0: Float32Array,
  1: Int32Array,
  2: Uint8Array,
};

function toCount(value: bigint, what: string): number {
  if (value > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new IOFailure(`${what} too large for this reader: ${value}`);
  }
  return Number(value);
}

/** Typed view over buf[offset, offset+byteLength), copying when unaligned. */
function columnArray(buf: Buffer, offset: number, byteLength: number, ctor: Ctor): ColumnArray {
  const absolute = buf.byteOffset + offset;
  if (absolute % ctor.BYTES_PER_ELEMENT === 0) {
    // readFileSync buffers are plain ArrayBuffer-backed; never shared memory.
    return new ctor(buf.buffer as ArrayBuffer, absolute, byteLength / ctor.BYTES_PER_ELEMENT);
  }
  const aligned = new ArrayBuffer(byteLength);
  new Uint8Array(aligned).set(buf.subarray(offset, offset + byteLength));
  return new ctor(aligned);
}

function verifySidecar(path: string): void {
  const sidecar = join(path, "vault.sha256");
  if (!existsSync(sidecar)) {
    return;
  }
  for (const rawLine of readFileSync(sidecar, "utf8").split("\n")) {
    const line = rawLine.trim();
    if (!line) {
      continue;
    }
    const parsed = /^(\S+)\s+(.+)$/.exec(line);
    if (!parsed) {
      throw new IOFailure(`malformed checksum line: '${line}'`);
    }
    const [, digest, name] = parsed;
    const target = join(path, name!);
    if (!existsSync(target)) {
      throw new IOFailure(`checksummed file missing: ${name}`);
    }
    const actual = createHash("sha256").update(readFileSync(target)).digest("hex");
    if (actual !== digest!.toLowerCase()) {
      throw new IOFailure(`checksum mismatch for ${name}: expected ${digest}, got ${actual}`);
    }
  }
}

interface DataBin {
  version: number;
  nTransitions: number;
  nAgents: number;
  columns: Map<string, Column>;
}

function parseDataBin(path: string, blob: Buffer): DataBin {
  if (blob.length < TABLE_AT || blob.toString("latin1", 0, MAGIC.length) !== MAGIC) {
    throw new IOFailure(`bad magic in ${path}/data.bin`);
  }
  const view = new DataView(blob.buffer, blob.byteOffset, blob.byteLength);
  const version = view.getUint32(HEADER_AT, true);
  if (version > FORMAT_VERSION) {
    throw new IOFailure(`format version ${version} is newer than this reader (${FORMAT_VERSION})`);
  }
  const nTransitions = toCount(view.getBigUint64(HEADER_AT + 4, true), "transition count");
  const nAgents = view.getUint32(HEADER_AT + 12, true);
  const nSections = view.getUint32(HEADER_AT + 16, true);

  const columns = new Map<string, Column>();
  let entryAt = TABLE_AT;
  for (let i = 0; i < nSections; i++) {
    if (entryAt + ENTRY_SIZE > blob.length) {
      throw new IOFailure("truncated section table");
    }
    const name = blob.toString("ascii", entryAt, entryAt + 32).replace(/\0+$/, "");
    const code = blob[entryAt + 32]!;
    const rank = blob[entryAt + 33]!;
    const ctor = DTYPE_CTORS[code];
    if (!ctor || rank < 1 || rank > 3) {
      throw new IOFailure(`bad section descriptor for '${name}'`);
    }
    const dims: number[] = [];
    for (let d = 0; d < rank; d++) {
      dims.push(toCount(view.getBigUint64(entryAt + 34 + 8 * d, true), `dim of '${name}'`));
    }
    const offset = toCount(view.getBigUint64(entryAt + 58, true), `offset of '${name}'`);
    const length = toCount(view.getBigUint64(entryAt + 66, true), `length of '${name}'`);
    const expect = dims.reduce((a, b) => a * b, 1) * ctor.BYTES_PER_ELEMENT;
    if (offset + length > blob.length || length !== expect) {
      throw new IOFailure(`truncated section '${name}'`);
    }
    columns.set(name, { data: columnArray(blob, offset, length, ctor), shape: dims });
    entryAt += ENTRY_SIZE;
  }

  for (const required of ["observations", "actions", "rewards", "terminals"]) {
    if (!columns.has(required)) {
      throw new IOFailure(`missing section '${required}'`);
    }
  }
  return { version, nTransitions, nAgents, columns };
}

function parseEpisodesIdx(blob: Buffer): number[] {
  if (blob.length < 8) {
    throw new IOFailure("truncated episodes.idx");
  }
  const view = new DataView(blob.buffer, blob.byteOffset, blob.byteLength);
  const count = toCount(view.getBigUint64(0, true), "episode count");
  if (blob.length !== 8 + 8 * count) {
    throw new IOFailure("episodes.idx length does not match its count");
  }
  const starts: number[] = [];
  for (let e = 0; e < count; e++) {
    starts.push(toCount(view.getBigUint64(8 + 8 * e, true), "episode start"));
  }
  return starts;
}

/** Load a vault directory; verifies the checksum sidecar when present. */
export function readVault(path: string): BoundDataset {
  const metaPath = join(path, "metadata.json");
  let isDir = false;
  try {
    isDir = statSync(path).isDirectory();
  } catch {
    isDir = false;
  }
  if (!isDir || !existsSync(metaPath)) {
    throw new DataError(`${path} is not a vault (no metadata.json)`);
  }
  verifySidecar(path);

  const doc = JSON.parse(readFileSync(metaPath, "utf8")) as {
    meta: Record<string, unknown>;
    agents: Array<Record<string, unknown>>;
  };
  const bin = parseDataBin(path, readFileSync(join(path, "data.bin")));
  const starts = parseEpisodesIdx(readFileSync(join(path, "episodes.idx")));

  return Object.freeze({
    path,
    formatVersion: bin.version,
    nTransitions: bin.nTransitions,
    nAgents: bin.nAgents,
    meta: doc.meta,
    agents: doc.agents,
    observations: bin.columns.get("observations")!,
    actions: bin.columns.get("actions")!,
    rewards: bin.columns.get("rewards")!,
    terminals: bin.columns.get("terminals")!,
    state: bin.columns.get("state") ?? null,
    episodeStarts: starts,
  });
}
