"""Episode-level resampling operations.

Every operation selects whole episodes, never split ones: episode returns are
the controlled quantity, and splitting would corrupt terminals and returns.
Each operation is a pure function of (inputs, seed) and returns a
SelectionPlan; replaying a plan against the same source reconstructs the
output bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import TrajectoryDataset
from .errors import EmptyDatasetError, InfeasibleTargetError, SchemaMismatchError
from .seeds import OP_CONSTRUCT, OP_MATCH, OP_SUBSAMPLE, OP_TARGET, op_rng
from .stats import EpisodeReturnSummary, episode_returns, summarize


@dataclass(frozen=True)
class TargetDistribution:
    """Desired episode-return distribution as a binned histogram."""

    bin_edges: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bin_edges", np.asarray(self.bin_edges, np.float64))
        object.__setattr__(self, "probabilities", np.asarray(self.probabilities, np.float64))
        if self.bin_edges.ndim != 1 or self.probabilities.ndim != 1:
            raise ValueError("edges and probabilities must be 1-d")
        if self.bin_edges.size != self.probabilities.size + 1:
            raise ValueError("need len(edges) == len(probabilities) + 1")
        if np.any(np.diff(self.bin_edges) <= 0):
            raise ValueError("bin edges must be strictly ascending")
        if np.any(self.probabilities < 0):
            raise ValueError("probabilities must be >= 0")
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1 within 1e-9")

    def to_json(self) -> dict:
        return {"edges": self.bin_edges.tolist(), "probs": self.probabilities.tolist()}

    @staticmethod
    def from_json(d: dict) -> "TargetDistribution":
        return TargetDistribution(np.asarray(d["edges"], np.float64),
                                  np.asarray(d["probs"], np.float64))

    @staticmethod
    def from_json_file(path: str) -> "TargetDistribution":
        with open(path, "r", encoding="utf-8") as f:
            return TargetDistribution.from_json(json.load(f))


@dataclass(frozen=True)
class SelectionPlan:
    """Replayable record of one selection: source, seed, chosen episodes."""

    source_dataset_name: str
    selected_episode_indices: np.ndarray
    rng_seed: int
    achieved: EpisodeReturnSummary
    feasibility: Optional[dict] = None

    def __post_init__(self):
        idx = np.asarray(self.selected_episode_indices, np.int64)
        object.__setattr__(self, "selected_episode_indices", idx)
        if idx.ndim != 1:
            raise ValueError("indices must be 1-d")
        if np.unique(idx).size != idx.size:
            raise ValueError("duplicate episode indices in plan")

    def to_json(self) -> dict:
        d = {
            "source": self.source_dataset_name,
            "seed": int(self.rng_seed),
            "indices": self.selected_episode_indices.tolist(),
            "achieved": self.achieved.to_json(),
        }
        if self.feasibility is not None:
            d["feasibility"] = self.feasibility
        return d

    @staticmethod
    def from_json(d: dict) -> "SelectionPlan":
        return SelectionPlan(
            source_dataset_name=str(d["source"]),
            selected_episode_indices=np.asarray(d["indices"], np.int64),
            rng_seed=int(d["seed"]),
            achieved=EpisodeReturnSummary.from_json(d["achieved"]),
            feasibility=d.get("feasibility"),
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, indent=2)
            f.write("\n")

    @staticmethod
    def load(path: str) -> "SelectionPlan":
        with open(path, "r", encoding="utf-8") as f:
            return SelectionPlan.from_json(json.load(f))


def _ranges(lengths: np.ndarray) -> np.ndarray:
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, np.int64)
    ends = np.cumsum(lengths)
    return np.arange(total, dtype=np.int64) - np.repeat(ends - lengths, lengths)


def take_episodes(dataset: TrajectoryDataset, indices, seed: int = 0) -> TrajectoryDataset:
    """New dataset holding the given episodes, in the given order, bit-for-bit.

    Output metadata depends only on (source meta, indices, seed), so a saved
    plan reconstructs identical bytes.
    """
    idx = np.asarray(indices, np.int64)
    if idx.ndim != 1:
        raise ValueError("indices must be 1-d")
    if idx.size and (idx.min() < 0 or idx.max() >= dataset.n_episodes):
        raise IndexError(f"episode index out of range [0, {dataset.n_episodes})")
    if np.unique(idx).size != idx.size:
        raise ValueError("duplicate episode indices")

    lengths = dataset.episode_lengths()
    sel_len = lengths[idx]
    rows = np.repeat(dataset.episode_starts[idx], sel_len) + _ranges(sel_len)
    new_starts = (np.concatenate(([0], np.cumsum(sel_len)[:-1])).astype(np.int64)
                  if idx.size else np.zeros(0, np.int64))

    meta = dataset.meta.with_extras(
        selection_source=dataset.meta.name,
        selection_seed=str(int(seed)),
        selection_count=str(int(idx.size)),
    )
    return TrajectoryDataset(
        agents=dataset.agents,
        observations=dataset.observations[rows],
        actions=dataset.actions[rows],
        rewards=dataset.rewards[rows],
        terminals=dataset.terminals[rows],
        state=dataset.state[rows] if dataset.state is not None else None,
        episode_starts=new_starts,
        meta=meta,
    )


def replay(plan: SelectionPlan, source: TrajectoryDataset) -> TrajectoryDataset:
    if source.meta.name != plan.source_dataset_name:
        raise SchemaMismatchError(
            f"plan was recorded against {plan.source_dataset_name!r}, "
            f"got {source.meta.name!r}")
    return take_episodes(source, plan.selected_episode_indices, plan.rng_seed)


def _plan_for(dataset: TrajectoryDataset, result: TrajectoryDataset, indices: np.ndarray,
              seed: int, feasibility: Optional[dict] = None) -> SelectionPlan:
    achieved = summarize(episode_returns(result, 1.0), n_transitions=result.n_transitions)
    return SelectionPlan(
        source_dataset_name=dataset.meta.name,
        selected_episode_indices=indices,
        rng_seed=int(seed),
        achieved=achieved,
        feasibility=feasibility,
    )


def subsample_transitions(dataset: TrajectoryDataset, budget: int, seed: int):
    """Uniform whole-episode draw, without replacement, until >= budget transitions.

    When the source holds at least `budget` transitions the result is within
    one maximum episode length of the budget. A budget at or above the total
    returns the entire dataset.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if dataset.n_episodes == 0:
        raise EmptyDatasetError("cannot subsample an empty dataset")
    rng = op_rng(seed, OP_SUBSAMPLE)
    perm = rng.permutation(dataset.n_episodes)
    cum = np.cumsum(dataset.episode_lengths()[perm])
    k = min(int(np.searchsorted(cum, budget, side="left")) + 1, dataset.n_episodes)
    chosen = np.sort(perm[:k])
    result = take_episodes(dataset, chosen, seed)
    return result, _plan_for(dataset, result, chosen, seed)


def combine(datasets: list) -> TrajectoryDataset:
    """Concatenate datasets in order; episode offsets rebuilt, lineage recorded."""
    if len(datasets) == 0:
        raise ValueError("combine needs at least one dataset")
    first = datasets[0]
    for d in datasets[1:]:
        if d.agents != first.agents:
            raise SchemaMismatchError("agent specs differ across inputs")
        if (d.state is None) != (first.state is None):
            raise SchemaMismatchError("state presence differs across inputs")

    starts = []
    offset = 0
    for d in datasets:
        starts.append(d.episode_starts + offset)
        offset += d.n_transitions

    names = [d.meta.name for d in datasets]
    meta = first.meta.with_extras(lineage=json.dumps(names))
    meta = replace(meta, name="+".join(names))
    return TrajectoryDataset(
        agents=first.agents,
        observations=np.concatenate([d.observations for d in datasets]),
        actions=np.concatenate([d.actions for d in datasets]),
        rewards=np.concatenate([d.rewards for d in datasets]),
        terminals=np.concatenate([d.terminals for d in datasets]),
        state=(np.concatenate([d.state for d in datasets])
               if first.state is not None else None),
        episode_starts=np.concatenate(starts),
        meta=meta,
    )


def _bin_of(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Bin index per value; interior edges go right, top edge closed, outside -1."""
    idx = np.searchsorted(edges, values, side="right") - 1
    idx[values == edges[-1]] = edges.size - 2
    idx[(values < edges[0]) | (values > edges[-1])] = -1
    return idx


def _apportion(raw: np.ndarray, caps: np.ndarray) -> np.ndarray:
    """Largest-remainder rounding of per-bin quotas, respecting per-bin caps."""
    capped = np.minimum(raw, caps.astype(np.float64))
    base = np.floor(capped).astype(np.int64)
    want = int(round(float(capped.sum())))
    frac = capped - base
    order = np.argsort(-frac, kind="stable")
    short = want - int(base.sum())
    for j in order:
        if short <= 0:
            break
        if base[j] + 1 <= caps[j]:
            base[j] += 1
            short -= 1
    return base


def subsample_to_target(dataset: TrajectoryDataset, target: TargetDistribution,
                        budget: int, seed: int):
    """Draw episodes so the return histogram approaches the target distribution.

    Episodes are bucketed by return; per-bin quotas are proportional to the
    target probabilities, scaled to the largest multiple feasible under both
    the transition budget and per-bin availability, then filled by uniform
    draws without replacement. When availability forces the achieved
    histogram further than total-variation 0.05 from the target, the plan
    carries a feasibility report.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    returns = episode_returns(dataset, 1.0)
    if returns.size == 0:
        raise EmptyDatasetError("cannot subsample an empty dataset")

    edges = target.bin_edges
    probs = target.probabilities
    k = probs.size
    bin_idx = _bin_of(returns, edges)
    members = [np.flatnonzero(bin_idx == j) for j in range(k)]
    avail = np.asarray([m.size for m in members], np.int64)

    positive = probs > 0
    if not np.any(avail[positive] > 0):
        raise InfeasibleTargetError(
            "infeasible target: no episodes fall in any positive-probability bin")

    lengths = dataset.episode_lengths()
    overall_meanlen = float(lengths.mean())
    meanlen = np.asarray(
        [float(lengths[m].mean()) if m.size else overall_meanlen for m in members])

    s_budget = budget / float((probs * meanlen).sum())
    nonempty = positive & (avail > 0)
    s_avail = float(np.min(avail[nonempty] / probs[nonempty]))
    s = min(s_budget, s_avail)

    quotas = _apportion(s * probs, avail)
    if quotas.sum() == 0:
        # budget below one mean episode length; emit the single likeliest episode
        j = int(np.argmax(np.where(avail > 0, probs, -1.0)))
        quotas[j] = 1
    rng = op_rng(seed, OP_TARGET)
    picks = []
    for j in range(k):
        if quotas[j] > 0:
            picks.append(rng.choice(members[j], size=int(quotas[j]), replace=False))
    chosen = np.sort(np.concatenate(picks).astype(np.int64))

    result = take_episodes(dataset, chosen, seed)
    got = np.bincount(bin_idx[chosen], minlength=k).astype(np.float64)
    tv = 0.5 * float(np.abs(got / got.sum() - probs).sum())
    feasibility = None
    if tv > 0.05:
        feasibility = {
            "tv_distance": tv,
            "target_probabilities": probs.tolist(),
            "achieved_counts": got.astype(int).tolist(),
            "available_per_bin": avail.tolist(),
            "note": "per-bin availability capped the quotas",
        }
    return result, _plan_for(dataset, result, chosen, seed, feasibility)


def match_distributions(a: TrajectoryDataset, b: TrajectoryDataset, bins: int,
                        budget: int, seed: int):
    """Subsample both datasets to bin-for-bin identical return histograms.

    Common equal-width edges span the union of both supports; the per-bin
    quota is min(count_a, count_b), scaled down so each side's transition
    total stays near the budget. Both sides then draw their quota uniformly
    without replacement, so achieved per-bin episode counts are equal by
    construction.
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    ra = episode_returns(a, 1.0)
    rb = episode_returns(b, 1.0)
    if ra.size == 0 or rb.size == 0:
        raise EmptyDatasetError("cannot match an empty dataset")
    if max(float(ra.min()), float(rb.min())) > min(float(ra.max()), float(rb.max())):
        raise InfeasibleTargetError("disjoint return supports")

    lo = min(float(ra.min()), float(rb.min()))
    hi = max(float(ra.max()), float(rb.max()))
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)

    ia = _bin_of(ra, edges)
    ib = _bin_of(rb, edges)
    ca = np.bincount(ia, minlength=bins)
    cb = np.bincount(ib, minlength=bins)
    base = np.minimum(ca, cb)
    if base.sum() == 0:
        raise InfeasibleTargetError("no return bin is populated on both sides")

    len_a = a.episode_lengths()
    len_b = b.episode_lengths()
    members_a = [np.flatnonzero(ia == j) for j in range(bins)]
    members_b = [np.flatnonzero(ib == j) for j in range(bins)]
    est_a = sum(float(len_a[members_a[j]].mean()) * base[j] for j in range(bins) if base[j])
    est_b = sum(float(len_b[members_b[j]].mean()) * base[j] for j in range(bins) if base[j])
    s = min(1.0, budget / est_a, budget / est_b)

    quotas = _apportion(s * base, base)
    if quotas.sum() == 0:
        raise InfeasibleTargetError("budget smaller than one episode")

    rng_a = op_rng(seed, OP_MATCH, 0)
    rng_b = op_rng(seed, OP_MATCH, 1)
    picks_a, picks_b = [], []
    for j in range(bins):
        if quotas[j] > 0:
            picks_a.append(rng_a.choice(members_a[j], size=int(quotas[j]), replace=False))
            picks_b.append(rng_b.choice(members_b[j], size=int(quotas[j]), replace=False))
    chosen_a = np.sort(np.concatenate(picks_a).astype(np.int64))
    chosen_b = np.sort(np.concatenate(picks_b).astype(np.int64))

    out_a = take_episodes(a, chosen_a, seed)
    out_b = take_episodes(b, chosen_b, seed)
    plan_a = _plan_for(a, out_a, chosen_a, seed)
    plan_b = _plan_for(b, out_b, chosen_b, seed)
    return (out_a, out_b), (plan_a, plan_b)


def construct_mean_std(pool: TrajectoryDataset, target_mean: float, target_std: float,
                       n_episodes: int, tolerance: tuple = (0.1, 0.1), seed: int = 0,
                       max_iters: int = 200_000):
    """Select exactly n_episodes whose return mean and std hit the targets.

    Stochastic local search: start from the episodes with returns nearest the
    target mean, hill-climb with single-episode swaps on
    cost = |mean-target|/tol_mean + |std-target|/tol_std, accept strict
    improvements only, restart from a perturbed init up to 10 times. Success
    is declared only after recomputing the statistics from scratch.
    """
    if n_episodes < 1:
        raise ValueError(f"n_episodes must be >= 1, got {n_episodes}")
    tol_mu, tol_sigma = float(tolerance[0]), float(tolerance[1])
    if tol_mu <= 0 or tol_sigma <= 0:
        raise ValueError("tolerances must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if target_std < 0:
        raise ValueError("target_std must be >= 0")

    returns = episode_returns(pool, 1.0)
    pool_n = int(returns.size)
    if pool_n < n_episodes:
        raise InfeasibleTargetError(
            f"pool has {pool_n} episodes, need {n_episodes}")

    r = returns.tolist()
    mu, sigma = float(target_mean), float(target_std)
    n = int(n_episodes)
    rng = op_rng(seed, OP_CONSTRUCT)
    nearest = np.argsort(np.abs(returns - mu), kind="stable")[:n].astype(np.int64)

    best_cost = math.inf
    best_stats = (math.nan, math.nan)
    stall_limit = 10_000
    chunk = 4096

    for restart in range(10):
        if restart == 0:
            sel = nearest.copy()
        else:
            sel = nearest.copy()
            k_perturb = max(1, n // 10)
            victim_pos = rng.choice(n, size=k_perturb, replace=False)
            in_sel = np.zeros(pool_n, np.bool_)
            in_sel[sel] = True
            outsiders = np.flatnonzero(~in_sel)
            if outsiders.size:
                swaps = rng.choice(outsiders, size=min(k_perturb, outsiders.size),
                                   replace=False)
                sel[victim_pos[:swaps.size]] = swaps

        sel_list = sel.tolist()
        selected = bytearray(pool_n)
        for e in sel_list:
            selected[e] = 1
        s1 = float(np.sum(returns[sel]))
        s2 = float(np.sum(returns[sel] * returns[sel]))
        mean = s1 / n
        var = s2 / n - mean * mean
        std = math.sqrt(var) if var > 0 else 0.0
        cost = abs(mean - mu) / tol_mu + abs(std - sigma) / tol_sigma
        stall = 0
        it = 0
        done = False

        while it < max_iters:
            take = min(chunk, max_iters - it)
            pos_draw = rng.integers(0, n, size=take).tolist()
            cand_draw = rng.integers(0, pool_n, size=take).tolist()
            for p, c in zip(pos_draw, cand_draw):
                it += 1
                if selected[c]:
                    stall += 1
                    if stall > stall_limit:
                        break
                    continue
                out_e = sel_list[p]
                r_out = r[out_e]
                r_in = r[c]
                ns1 = s1 - r_out + r_in
                ns2 = s2 - r_out * r_out + r_in * r_in
                nmean = ns1 / n
                nvar = ns2 / n - nmean * nmean
                nstd = math.sqrt(nvar) if nvar > 0 else 0.0
                ncost = abs(nmean - mu) / tol_mu + abs(nstd - sigma) / tol_sigma
                if ncost < cost - 1e-12:
                    selected[out_e] = 0
                    selected[c] = 1
                    sel_list[p] = c
                    s1, s2, mean, std, cost = ns1, ns2, nmean, nstd, ncost
                    stall = 0
                    if abs(mean - mu) <= tol_mu and abs(std - sigma) <= tol_sigma:
                        rr = returns[np.asarray(sel_list, np.int64)]
                        emean = float(np.mean(rr))
                        estd = float(np.std(rr))
                        if abs(emean - mu) <= tol_mu and abs(estd - sigma) <= tol_sigma:
                            done = True
                            break
                        # drifted incremental sums; resynchronize and continue
                        s1 = float(rr.sum())
                        s2 = float((rr * rr).sum())
                        mean, std = emean, estd
                        cost = abs(mean - mu) / tol_mu + abs(std - sigma) / tol_sigma
                else:
                    stall += 1
                    if stall > stall_limit:
                        break
            if done or stall > stall_limit:
                break

        if done:
            chosen = np.sort(np.asarray(sel_list, np.int64))
            result = take_episodes(pool, chosen, seed)
            return result, _plan_for(pool, result, chosen, seed)
        if cost < best_cost:
            best_cost = cost
            best_stats = (mean, std)

    raise InfeasibleTargetError(
        f"infeasible target: best achieved mean {best_stats[0]:.6g}, "
        f"std {best_stats[1]:.6g} after 10 restarts",
        achieved=best_stats)
