"""On-disk vault format, archive fetching, and foreign-data import.

A vault is a directory of three files plus a checksum sidecar:

  metadata.json  UTF-8 JSON: dataset metadata and agent specs
  data.bin       magic "OGMV1\\0", little-endian header (u32 format_version,
                 u64 T, u32 n_agents, u32 section_count), a section table
                 (32-byte zero-padded ASCII name, u8 dtype code {0=f32, 1=i32,
                 2=u8}, u8 rank, 3xu64 dims, u64 offset, u64 length), then raw
                 row-major little-endian payloads at the stated offsets
  episodes.idx   u64 episode count, then ascending u64 start offsets
  vault.sha256   "<hex>  <filename>" lines for data.bin and episodes.idx

Writes are deterministic: equal datasets serialize to identical bytes, with
no timestamps in any payload file.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import struct
import tarfile
import tempfile
import urllib.error
import urllib.parse
import urllib.request
from typing import Optional

import numpy as np

from .core import (FORMAT_VERSION, AgentSpec, TrajectoryDataset, VaultMeta, validate)
from .errors import (ChecksumError, FetchError, ImportError_, InvalidDatasetError,
                     UserError, VaultFormatError, VaultLockedError, VaultNotFoundError)

MAGIC = b"OGMV1\x00"
_HEADER = struct.Struct("<IQII")
_ENTRY = struct.Struct("<32sBB3QQQ")
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.int32): 1, np.dtype(np.uint8): 2}
_CODE_DTYPES = {0: np.dtype(np.float32), 1: np.dtype(np.int32), 2: np.dtype(np.uint8)}


def _sections(dataset: TrajectoryDataset) -> list:
    cols = [
        ("observations", dataset.observations),
        ("actions", dataset.actions),
        ("rewards", dataset.rewards),
        ("terminals", dataset.terminals.astype(np.uint8)),
    ]
    if dataset.state is not None:
        cols.append(("state", dataset.state))
    return cols


def _encode_data_bin(dataset: TrajectoryDataset) -> bytes:
    cols = _sections(dataset)
    table_at = len(MAGIC) + _HEADER.size
    payload_at = table_at + _ENTRY.size * len(cols)

    entries = []
    payloads = []
    offset = payload_at
    for name, arr in cols:
        raw = np.ascontiguousarray(arr)
        if raw.dtype.byteorder == ">":
            raw = raw.astype(raw.dtype.newbyteorder("<"))
        body = raw.tobytes()
        dims = list(arr.shape) + [0] * (3 - arr.ndim)
        entries.append(_ENTRY.pack(name.encode("ascii").ljust(32, b"\x00"),
                                   _DTYPE_CODES[raw.dtype], arr.ndim,
                                   dims[0], dims[1], dims[2], offset, len(body)))
        payloads.append(body)
        offset += len(body)

    head = MAGIC + _HEADER.pack(dataset.meta.format_version, dataset.n_transitions,
                                dataset.n_agents, len(cols))
    return head + b"".join(entries) + b"".join(payloads)


def _encode_episodes_idx(dataset: TrajectoryDataset) -> bytes:
    starts = dataset.episode_starts.astype("<u8")
    return struct.pack("<Q", starts.size) + starts.tobytes()


def _metadata_text(dataset: TrajectoryDataset) -> str:
    doc = {"meta": dataset.meta.to_json(),
           "agents": [a.to_json() for a in dataset.agents]}
    return json.dumps(doc, indent=2) + "\n"


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_vault(dataset: TrajectoryDataset, path: str) -> None:
    """Write a vault directory; holds an advisory lock for the duration."""
    violations = validate(dataset)
    if violations:
        raise InvalidDatasetError(violations)

    os.makedirs(path, exist_ok=True)
    lock_path = os.path.join(path, "vault.lock")
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise VaultLockedError(f"vault at {path} is locked (vault.lock exists)") from None
    try:
        with open(os.path.join(path, "metadata.json"), "w", encoding="utf-8") as f:
            f.write(_metadata_text(dataset))
        with open(os.path.join(path, "data.bin"), "wb") as f:
            f.write(_encode_data_bin(dataset))
        with open(os.path.join(path, "episodes.idx"), "wb") as f:
            f.write(_encode_episodes_idx(dataset))
        lines = [f"{_sha256_file(os.path.join(path, name))}  {name}\n"
                 for name in ("data.bin", "episodes.idx")]
        with open(os.path.join(path, "vault.sha256"), "w", encoding="utf-8") as f:
            f.write("".join(lines))
    finally:
        os.close(fd)
        os.unlink(lock_path)


def _verify_sidecar(path: str) -> None:
    sidecar = os.path.join(path, "vault.sha256")
    if not os.path.exists(sidecar):
        return
    with open(sidecar, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            try:
                digest, name = line.split(None, 1)
            except ValueError:
                raise ChecksumError(f"malformed checksum line: {line!r}") from None
            target = os.path.join(path, name)
            if not os.path.exists(target):
                raise ChecksumError(f"checksummed file missing: {name}")
            actual = _sha256_file(target)
            if actual != digest.lower():
                raise ChecksumError(
                    f"checksum mismatch for {name}: expected {digest}, got {actual}")


def read_vault(path: str) -> TrajectoryDataset:
    """Load a vault; verifies the checksum sidecar when present."""
    meta_path = os.path.join(path, "metadata.json")
    if not os.path.isdir(path) or not os.path.exists(meta_path):
        raise VaultNotFoundError(f"{path} is not a vault (no metadata.json)")
    _verify_sidecar(path)

    with open(meta_path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    meta = VaultMeta.from_json(doc["meta"])
    agents = tuple(AgentSpec.from_json(a) for a in doc["agents"])

    with open(os.path.join(path, "data.bin"), "rb") as f:
        blob = f.read()
    if blob[:len(MAGIC)] != MAGIC:
        raise VaultFormatError(f"bad magic in {path}/data.bin")
    version, t_count, n_agents, n_sections = _HEADER.unpack_from(blob, len(MAGIC))
    if version > FORMAT_VERSION:
        raise VaultFormatError(
            f"format version {version} is newer than this reader ({FORMAT_VERSION})")

    columns = {}
    entry_at = len(MAGIC) + _HEADER.size
    for i in range(n_sections):
        if entry_at + _ENTRY.size > len(blob):
            raise VaultFormatError("truncated section table")
        raw_name, code, rank, d0, d1, d2, offset, length = _ENTRY.unpack_from(blob, entry_at)
        entry_at += _ENTRY.size
        name = raw_name.rstrip(b"\x00").decode("ascii")
        if code not in _CODE_DTYPES or not 1 <= rank <= 3:
            raise VaultFormatError(f"bad section descriptor for {name!r}")
        dims = (d0, d1, d2)[:rank]
        dtype = _CODE_DTYPES[code]
        expect = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
        if offset + length > len(blob) or length != expect:
            raise VaultFormatError(f"truncated section {name!r}")
        arr = np.frombuffer(blob, dtype=dtype.newbyteorder("<"), count=int(np.prod(
            dims, dtype=np.int64)), offset=offset).astype(dtype, copy=False).reshape(dims)
        columns[name] = arr

    for required in ("observations", "actions", "rewards", "terminals"):
        if required not in columns:
            raise VaultFormatError(f"missing section {required!r}")

    with open(os.path.join(path, "episodes.idx"), "rb") as f:
        idx_blob = f.read()
    if len(idx_blob) < 8:
        raise VaultFormatError("truncated episodes.idx")
    (n_episodes,) = struct.unpack_from("<Q", idx_blob, 0)
    if len(idx_blob) != 8 + 8 * n_episodes:
        raise VaultFormatError("episodes.idx length does not match its count")
    starts = np.frombuffer(idx_blob, dtype="<u8", count=n_episodes, offset=8).astype(np.int64)

    return TrajectoryDataset(
        agents=agents,
        observations=columns["observations"],
        actions=columns["actions"],
        rewards=columns["rewards"],
        terminals=columns["terminals"].astype(np.bool_),
        state=columns.get("state"),
        episode_starts=starts,
        meta=meta,
    )


def pack_vault(vault_dir: str, archive_path: str) -> None:
    """Bundle a vault directory into a gzip tar archive for distribution."""
    if not os.path.exists(os.path.join(vault_dir, "metadata.json")):
        raise VaultNotFoundError(f"{vault_dir} is not a vault (no metadata.json)")
    root = os.path.basename(os.path.normpath(vault_dir))
    with tarfile.open(archive_path, "w:gz") as tar:
        for name in sorted(os.listdir(vault_dir)):
            tar.add(os.path.join(vault_dir, name), arcname=f"{root}/{name}")


class _LimitedRedirects(urllib.request.HTTPRedirectHandler):
    max_redirections = 5


def _download(url: str, dest_file: str) -> None:
    req = urllib.request.Request(url, headers={"Accept-Encoding": "identity"})
    opener = urllib.request.build_opener(_LimitedRedirects())
    try:
        with opener.open(req) as resp, open(dest_file, "wb") as out:
            shutil.copyfileobj(resp, out)
    except urllib.error.URLError as e:
        raise FetchError(f"download failed for {url}: {e}") from None


def fetch_vault(url: str, destination: str,
                cache_dir: Optional[str] = None) -> TrajectoryDataset:
    """Download a vault archive, verify checksums, extract, and load.

    The archive must be a gzip tar containing exactly one vault with its
    checksum sidecar. Extraction happens in a temporary directory that is
    renamed to the destination only after verification, so no partial vault
    is ever left behind.
    """
    scheme = urllib.parse.urlparse(url).scheme
    if scheme not in ("http", "https", "file"):
        raise UserError(f"unsupported URL scheme: {scheme or '(none)'}")

    destination = os.path.abspath(destination)
    if os.path.exists(destination) and (not os.path.isdir(destination)
                                        or os.listdir(destination)):
        raise FetchError(f"destination {destination} already exists")
    parent = os.path.dirname(destination) or "."
    os.makedirs(parent, exist_ok=True)

    staging = tempfile.mkdtemp(prefix=".fetch-", dir=parent)
    try:
        def acquire(target: str) -> None:
            if scheme == "file":
                src = urllib.request.url2pathname(urllib.parse.urlparse(url).path)
                if not os.path.exists(src):
                    raise FetchError(f"no such file: {src}")
                shutil.copyfile(src, target)
            else:
                _download(url, target)

        if cache_dir:
            os.makedirs(cache_dir, exist_ok=True)
            key = hashlib.sha256(url.encode("utf-8")).hexdigest()
            archive = os.path.join(cache_dir, f"{key}.tar.gz")
            if not os.path.exists(archive):
                partial = os.path.join(staging, "download.tar.gz")
                acquire(partial)
                os.replace(partial, archive)
        else:
            archive = os.path.join(staging, "download.tar.gz")
            acquire(archive)

        extract_dir = os.path.join(staging, "extract")
        os.makedirs(extract_dir)
        try:
            with tarfile.open(archive, "r:gz") as tar:
                tar.extractall(extract_dir, filter="data")
        except (tarfile.TarError, EOFError, OSError) as e:
            raise FetchError(f"cannot extract archive: {e}") from None

        roots = []
        for dirpath, _dirnames, filenames in os.walk(extract_dir):
            if "metadata.json" in filenames:
                roots.append(dirpath)
        if not roots:
            raise VaultFormatError("archive without metadata.json")
        if len(roots) > 1:
            raise VaultFormatError("archive contains more than one vault")
        root = roots[0]
        if not os.path.exists(os.path.join(root, "vault.sha256")):
            raise ChecksumError("fetched archive lacks the vault.sha256 sidecar")

        dataset = read_vault(root)
        if os.path.isdir(destination):
            os.rmdir(destination)
        os.replace(root, destination)
        return dataset
    finally:
        shutil.rmtree(staging, ignore_errors=True)


_DEFAULT_MAPPING = {"episode": "episode", "obs": "obs", "act": "act",
                    "rew": "rew", "state": "state", "terminal": "terminal"}


def export_foreign(dataset: TrajectoryDataset, path: str) -> None:
    """Write a dataset as JSON-lines in the import format (one transition per line)."""
    discrete = dataset.actions.ndim == 2
    lengths = dataset.episode_lengths()
    episode_of = np.repeat(np.arange(dataset.n_episodes), lengths)
    with open(path, "w", encoding="utf-8") as f:
        for t in range(dataset.n_transitions):
            rec = {
                "episode": int(episode_of[t]),
                "obs": [[float(v) for v in row] for row in dataset.observations[t]],
                "act": ([int(v) for v in dataset.actions[t]] if discrete
                        else [[float(v) for v in row] for row in dataset.actions[t]]),
                "rew": [float(v) for v in dataset.rewards[t]],
                "terminal": bool(dataset.terminals[t]),
            }
            if dataset.state is not None:
                rec["state"] = [float(v) for v in dataset.state[t]]
            f.write(json.dumps(rec) + "\n")


def import_foreign(path: str, agents, mapping: Optional[dict] = None,
                   name: Optional[str] = None) -> TrajectoryDataset:
    """Import a JSON-lines transition file, one transition per line.

    Each line holds {"episode": int, "obs": [[...] per agent], "act": [...],
    "rew": [...], "state": [...] optional, "terminal": bool}; key names may
    be remapped. Episodes must form contiguous id runs. All structural errors
    name the offending line.
    """
    agents = tuple(agents)
    if not agents:
        raise ValueError("need at least one AgentSpec")
    keys = dict(_DEFAULT_MAPPING)
    if mapping:
        keys.update(mapping)
    n = len(agents)
    discrete = agents[0].actions.kind == "discrete"

    obs_rows, act_rows, rew_rows, term_rows, state_rows = [], [], [], [], []
    episode_ids = []
    linenos = []
    has_state: Optional[bool] = None

    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ImportError_(f"line {lineno}: invalid JSON: {e}") from None
            for field in ("episode", "obs", "act", "rew", "terminal"):
                if keys[field] not in rec:
                    raise ImportError_(f"line {lineno}: missing key {keys[field]!r}")

            obs = rec[keys["obs"]]
            if len(obs) != n:
                raise ImportError_(
                    f"line {lineno}: expected {n} per-agent observations, got {len(obs)}")
            for i, (o, spec) in enumerate(zip(obs, agents)):
                if len(o) != spec.observation_dim:
                    raise ImportError_(
                        f"line {lineno}: agent {spec.agent_id} observation has "
                        f"{len(o)} values, expected {spec.observation_dim}")

            act = rec[keys["act"]]
            if len(act) != n:
                raise ImportError_(
                    f"line {lineno}: expected {n} per-agent actions, got {len(act)}")
            rew = rec[keys["rew"]]
            if len(rew) != n:
                raise ImportError_(
                    f"line {lineno}: expected {n} per-agent rewards, got {len(rew)}")

            state = rec.get(keys["state"])
            if has_state is None:
                has_state = state is not None
            elif (state is not None) != has_state:
                raise ImportError_(
                    f"line {lineno}: state present on some lines but not others")
            if state is not None:
                if state_rows and len(state) != len(state_rows[0]):
                    raise ImportError_(f"line {lineno}: state length changed")
                state_rows.append(state)

            episode_ids.append(rec[keys["episode"]])
            linenos.append(lineno)
            obs_rows.append(obs)
            act_rows.append(act)
            rew_rows.append(rew)
            term_rows.append(bool(rec[keys["terminal"]]))

    if not obs_rows:
        raise ImportError_(f"{path}: no transitions found")

    starts = [0]
    seen = {episode_ids[0]}
    for t in range(1, len(episode_ids)):
        if episode_ids[t] != episode_ids[t - 1]:
            if episode_ids[t] in seen:
                raise ImportError_(
                    f"line {linenos[t]}: episode id {episode_ids[t]!r} is not contiguous")
            seen.add(episode_ids[t])
            starts.append(t)

    meta = VaultMeta(
        name=name or os.path.splitext(os.path.basename(path))[0],
        extras={"imported_from": os.path.basename(path)},
    )
    dataset = TrajectoryDataset(
        agents=agents,
        observations=np.asarray(obs_rows, np.float32),
        actions=np.asarray(act_rows, np.int32 if discrete else np.float32),
        rewards=np.asarray(rew_rows, np.float32),
        terminals=np.asarray(term_rows, np.bool_),
        state=np.asarray(state_rows, np.float32) if has_state else None,
        episode_starts=np.asarray(starts, np.int64),
        meta=meta,
    )
    violations = validate(dataset)
    if violations:
        raise InvalidDatasetError(violations)
    return dataset
