"""Coverage metrics: unique-pair ratios and the count-frequency spectrum.

Three ratios over the T transitions of a dataset:
  joint state-action coverage   unique (state, joint-action) / T, needs state
  joint obs-action coverage     unique (all observations, joint-action) / T
  per-agent obs-action coverage unique (obs_i, act_i) / T for each agent

Uniqueness is exact bitwise equality of the serialized pair: raw little-endian
IEEE-754 bits, NaN payloads preserved, no rounding. Keys are counted either
through 128-bit digests (default) or on the full serialized bytes (exact
mode, memory-heavy, for validation). Joint action order is agent-spec order.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from math import log
from typing import Optional

import numpy as np

from .core import TrajectoryDataset
from .errors import DataError, EmptyDatasetError


@dataclass(frozen=True)
class CoverageReport:
    total_transitions: int
    unique_state_action: Optional[int]
    unique_joint_obs_action: int
    unique_per_agent: dict
    joint_saco: Optional[float]
    jojaco: float
    decoaco: dict
    count_frequency: dict
    exact_mode: bool

    def to_json(self) -> dict:
        return {
            "total_transitions": self.total_transitions,
            "unique_state_action": self.unique_state_action,
            "unique_joint_obs_action": self.unique_joint_obs_action,
            "unique_per_agent": dict(self.unique_per_agent),
            "joint_saco": self.joint_saco,
            "jojaco": self.jojaco,
            "decoaco": dict(self.decoaco),
            "count_frequency": {str(c): f for c, f in sorted(self.count_frequency.items())},
            "exact_mode": self.exact_mode,
        }

    @staticmethod
    def from_json(d: dict) -> "CoverageReport":
        return CoverageReport(
            total_transitions=int(d["total_transitions"]),
            unique_state_action=(None if d.get("unique_state_action") is None
                                 else int(d["unique_state_action"])),
            unique_joint_obs_action=int(d["unique_joint_obs_action"]),
            unique_per_agent={k: int(v) for k, v in d["unique_per_agent"].items()},
            joint_saco=None if d.get("joint_saco") is None else float(d["joint_saco"]),
            jojaco=float(d["jojaco"]),
            decoaco={k: float(v) for k, v in d["decoaco"].items()},
            count_frequency={int(c): int(f) for c, f in d["count_frequency"].items()},
            exact_mode=bool(d["exact_mode"]),
        )


def _row_bytes(arr: np.ndarray, quantize: Optional[int]) -> np.ndarray:
    """[T, ...] array -> [T, width] uint8 view of its raw little-endian bytes."""
    if quantize is not None and arr.dtype == np.float32:
        arr = np.round(arr, quantize).astype(np.float32)
    if arr.dtype == np.bool_:
        arr = arr.astype(np.uint8)
    flat = np.ascontiguousarray(arr).reshape(arr.shape[0], -1)
    return flat.view(np.uint8)


def _digest_rows(rows: np.ndarray) -> np.ndarray:
    """128-bit digest per row; equal bytes give equal digests by construction."""
    t, w = rows.shape
    data = memoryview(np.ascontiguousarray(rows).tobytes())
    out = bytearray(t * 16)
    for i in range(t):
        out[i * 16:(i + 1) * 16] = hashlib.blake2b(data[i * w:(i + 1) * w],
                                                   digest_size=16).digest()
    return np.frombuffer(bytes(out), np.uint8).reshape(t, 16)


def _unique_counts(rows: np.ndarray) -> np.ndarray:
    """Multiplicity of each distinct row, order irrelevant."""
    t, w = rows.shape
    if w == 0:
        return np.asarray([t], np.int64)
    voids = np.ascontiguousarray(rows).view(f"V{w}").ravel()
    _, counts = np.unique(voids, return_counts=True)
    return counts


def _key_counts(parts: list, exact: bool, quantize: Optional[int]) -> np.ndarray:
    rows = np.concatenate([_row_bytes(p, quantize) for p in parts], axis=1)
    if not exact:
        rows = _digest_rows(rows)
    return _unique_counts(rows)


def coverage_report(dataset: TrajectoryDataset, exact: bool = False,
                    quantize: Optional[int] = None) -> CoverageReport:
    """All coverage ratios plus the count-frequency spectrum.

    When the state column is absent, state-based coverage is reported absent
    (not substituted) and the spectrum is taken over the joint
    observation-action keys instead. `quantize` rounds float columns to that
    many decimals before serialization; default is no rounding.
    """
    T = dataset.n_transitions
    if T == 0:
        raise EmptyDatasetError("coverage of an empty dataset")

    act = dataset.actions
    obs = dataset.observations

    unique_sa: Optional[int] = None
    sa_counts: Optional[np.ndarray] = None
    if dataset.state is not None:
        sa_counts = _key_counts([dataset.state, act], exact, quantize)
        unique_sa = int(sa_counts.size)

    joja_counts = _key_counts([obs, act], exact, quantize)
    unique_joja = int(joja_counts.size)

    unique_per_agent = {}
    for i, agent in enumerate(dataset.agents):
        act_i = act[:, i] if act.ndim == 2 else act[:, i, :]
        counts_i = _key_counts([obs[:, i, :], act_i], exact, quantize)
        unique_per_agent[agent.agent_id] = int(counts_i.size)

    spectrum_counts = sa_counts if sa_counts is not None else joja_counts
    count_frequency = dict(Counter(spectrum_counts.tolist()))

    return CoverageReport(
        total_transitions=T,
        unique_state_action=unique_sa,
        unique_joint_obs_action=unique_joja,
        unique_per_agent=unique_per_agent,
        joint_saco=None if unique_sa is None else unique_sa / T,
        jojaco=unique_joja / T,
        decoaco={aid: u / T for aid, u in unique_per_agent.items()},
        count_frequency=count_frequency,
        exact_mode=bool(exact),
    )


def coverage_spectrum_points(report: CoverageReport) -> list:
    """(ln multiplicity, ln frequency) points, ascending in multiplicity."""
    if not report.count_frequency:
        raise DataError("empty count-frequency spectrum")
    return [(log(c), log(f)) for c, f in sorted(report.count_frequency.items())]
