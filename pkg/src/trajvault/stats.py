"""Episode returns, summary statistics, histograms, and density curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import TrajectoryDataset
from .errors import DataError, EmptyDatasetError


@dataclass(frozen=True)
class EpisodeReturnSummary:
    mean: float
    std: float
    min: float
    max: float
    n_transitions: int
    n_trajectories: int

    def to_json(self) -> dict:
        return {"mean": self.mean, "std": self.std, "min": self.min, "max": self.max,
                "n_transitions": self.n_transitions, "n_trajectories": self.n_trajectories}

    @staticmethod
    def from_json(d: dict) -> "EpisodeReturnSummary":
        return EpisodeReturnSummary(float(d["mean"]), float(d["std"]), float(d["min"]),
                                    float(d["max"]), int(d["n_transitions"]),
                                    int(d["n_trajectories"]))


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bin_edges", np.asarray(self.bin_edges, np.float64))
        object.__setattr__(self, "counts", np.asarray(self.counts, np.int64))
        if self.bin_edges.ndim != 1 or self.counts.ndim != 1:
            raise ValueError("bin_edges and counts must be 1-d")
        if self.bin_edges.size != self.counts.size + 1:
            raise ValueError("need len(bin_edges) == len(counts) + 1")
        if np.any(np.diff(self.bin_edges) <= 0):
            raise ValueError("bin_edges must be strictly ascending")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    def to_json(self) -> dict:
        return {"bin_edges": self.bin_edges.tolist(), "counts": self.counts.tolist()}


@dataclass(frozen=True)
class DensityCurve:
    xs: np.ndarray
    ys: np.ndarray
    bandwidth: float

    def to_json(self) -> dict:
        return {"xs": self.xs.tolist(), "ys": self.ys.tolist(), "bandwidth": self.bandwidth}


def episode_returns(dataset: TrajectoryDataset, gamma: float = 1.0) -> np.ndarray:
    """Per-episode return G_e = sum_t gamma^(t-start) * mean_over_agents(r_t).

    Accumulates in 64-bit; an empty dataset yields an empty array. The
    per-timestep agent reduction is the mean, so shared-reward datasets that
    replicate the scalar report the scalar itself.
    """
    if not (0.0 < gamma <= 1.0):
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    T = dataset.n_transitions
    if T == 0:
        return np.zeros(0, np.float64)
    per_step = dataset.rewards.mean(axis=1, dtype=np.float64)
    starts = dataset.episode_starts
    if gamma != 1.0:
        lengths = dataset.episode_lengths()
        offsets = np.arange(T, dtype=np.float64) - np.repeat(starts, lengths)
        per_step = per_step * np.power(gamma, offsets)
    return np.add.reduceat(per_step, starts)


def summarize(returns: np.ndarray, n_transitions: int = 0) -> EpisodeReturnSummary:
    """Population statistics of a return vector; n_transitions is caller-supplied."""
    r = np.asarray(returns, np.float64)
    if r.size == 0:
        raise EmptyDatasetError("no episodes")
    return EpisodeReturnSummary(
        mean=float(np.mean(r)), std=float(np.std(r)),
        min=float(np.min(r)), max=float(np.max(r)),
        n_transitions=int(n_transitions), n_trajectories=int(r.size),
    )


def summarize_dataset(dataset: TrajectoryDataset, gamma: float = 1.0) -> EpisodeReturnSummary:
    return summarize(episode_returns(dataset, gamma), n_transitions=dataset.n_transitions)


def histogram(returns: np.ndarray, bins: int = 30,
              range: Optional[tuple] = None) -> Histogram:
    """Equal-width histogram; interior-edge values go right, the max goes last."""
    r = np.asarray(returns, np.float64)
    if r.size == 0:
        raise EmptyDatasetError("no episodes")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if range is not None and not (float(range[0]) < float(range[1])):
        raise ValueError(f"need lo < hi, got {range}")
    counts, edges = np.histogram(r, bins=bins, range=range)
    return Histogram(bin_edges=edges, counts=counts)


def density(returns: np.ndarray, bandwidth: Optional[float] = None) -> DensityCurve:
    """Gaussian-kernel density on 256 points over [min-3h, max+3h].

    Default bandwidth is Silverman's 1.06*sigma*n^(-1/5) with floor 1e-6.
    The curve is normalized so its trapezoid integral is 1, compensating for
    kernel mass outside the 3h window.
    """
    r = np.asarray(returns, np.float64)
    if r.size < 2:
        raise DataError(f"density needs >= 2 samples, got {r.size}")
    sigma = float(np.std(r))
    if bandwidth is not None:
        h = float(bandwidth)
        if h <= 0:
            raise ValueError("bandwidth must be positive")
    else:
        if sigma == 0.0:
            raise DataError("degenerate density")
        h = max(1.06 * sigma * r.size ** (-1 / 5), 1e-6)

    xs = np.linspace(float(np.min(r)) - 3 * h, float(np.max(r)) + 3 * h, 256)
    ys = np.zeros(256, np.float64)
    norm = 1.0 / (r.size * h * np.sqrt(2 * np.pi))
    for chunk_start in range(0, r.size, 65536):
        chunk = r[chunk_start:chunk_start + 65536]
        z = (xs[None, :] - chunk[:, None]) / h
        ys += np.exp(-0.5 * z * z).sum(axis=0)
    ys *= norm
    integral = float(np.trapezoid(ys, xs))
    if integral <= 0:
        raise DataError("degenerate density")
    ys /= integral
    return DensityCurve(xs=xs, ys=ys, bandwidth=h)
