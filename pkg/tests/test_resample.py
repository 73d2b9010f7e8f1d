"""Resampling operations: budgets, targets, matching, construction, replay."""

import json

import numpy as np
import pytest

from trajvault import (EmptyDatasetError, InfeasibleTargetError,
                       SchemaMismatchError, SelectionPlan, TargetDistribution,
                       TrajectoryDataset, combine, construct_mean_std,
                       episode_returns, match_distributions, replay,
                       subsample_to_target, subsample_transitions,
                       take_episodes, validate)

from conftest import (exact_pool_returns, make_continuous_dataset,
                      make_dataset, pool_with_returns)


def episode_bytes(dataset, e):
    s = int(dataset.episode_starts[e])
    t = int(dataset.episode_starts[e + 1]) if e + 1 < dataset.n_episodes \
        else dataset.n_transitions
    parts = [dataset.observations[s:t].tobytes(), dataset.actions[s:t].tobytes(),
             dataset.rewards[s:t].tobytes(), dataset.terminals[s:t].tobytes()]
    if dataset.state is not None:
        parts.append(dataset.state[s:t].tobytes())
    return b"".join(parts)


def ks_statistic(a, b):
    """Two-sample Kolmogorov-Smirnov statistic, straight from the definition."""
    a, b = np.sort(a), np.sort(b)
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def test_take_episodes_copies_whole_episodes():
    d = make_dataset(episode_lengths=(4, 6, 5, 3), state_dim=2, seed=1)
    out = take_episodes(d, np.array([2, 0]))
    assert validate(out) == []
    assert out.n_episodes == 2
    assert episode_bytes(out, 0) == episode_bytes(d, 2)
    assert episode_bytes(out, 1) == episode_bytes(d, 0)


def test_take_episodes_rejects_duplicates_and_oob():
    d = make_dataset()
    with pytest.raises(ValueError):
        take_episodes(d, np.array([0, 0]))
    with pytest.raises(IndexError):
        take_episodes(d, np.array([3]))


def test_budget_exceeding_total_returns_everything():
    d = make_dataset(episode_lengths=(3, 4, 3))
    out, plan = subsample_transitions(d, budget=10_000, seed=0)
    assert out.n_transitions == d.n_transitions
    assert sorted(plan.selected_episode_indices.tolist()) == [0, 1, 2]


def test_budget_subsampling_within_one_episode_length():
    pool = pool_with_returns(np.linspace(0, 20, 400), length=25)
    lengths = pool.episode_lengths()
    for seed in range(5):
        budget = 2_000 + 117 * seed
        out, plan = subsample_transitions(pool, budget, seed)
        assert abs(out.n_transitions - budget) < lengths.max()
        assert validate(out) == []
        # Membership oracle: every selected episode matches its source bytes.
        for k, e in enumerate(plan.selected_episode_indices.tolist()):
            assert episode_bytes(out, k) == episode_bytes(pool, e)


def test_budget_subsampling_deterministic():
    pool = pool_with_returns(np.linspace(0, 10, 100))
    _, p1 = subsample_transitions(pool, 300, seed=9)
    _, p2 = subsample_transitions(pool, 300, seed=9)
    np.testing.assert_array_equal(p1.selected_episode_indices,
                                  p2.selected_episode_indices)
    assert p1.to_json() == p2.to_json()
    _, p3 = subsample_transitions(pool, 300, seed=10)
    assert p1.selected_episode_indices.tolist() != p3.selected_episode_indices.tolist()


def test_budget_rejects_nonpositive():
    with pytest.raises(ValueError):
        subsample_transitions(make_dataset(), 0, seed=0)


def test_replay_reproduces_bytes():
    pool = pool_with_returns(np.linspace(0, 10, 200), length=8, seed=2)
    out, plan = subsample_transitions(pool, 400, seed=4)
    again = replay(plan, pool)
    assert again.meta.to_json() == out.meta.to_json()
    for name in ("observations", "actions", "rewards", "terminals",
                 "episode_starts"):
        np.testing.assert_array_equal(getattr(again, name), getattr(out, name))


def test_replay_refuses_wrong_source():
    pool = pool_with_returns(np.linspace(0, 10, 50))
    other = pool_with_returns(np.linspace(0, 10, 50), name="other")
    _, plan = subsample_transitions(pool, 100, seed=0)
    with pytest.raises(SchemaMismatchError):
        replay(plan, other)


def test_plan_json_round_trip(tmp_path):
    pool = pool_with_returns(np.linspace(0, 10, 60))
    _, plan = subsample_transitions(pool, 150, seed=3)
    path = tmp_path / "plan.json"
    plan.save(str(path))
    loaded = SelectionPlan.load(str(path))
    assert loaded.to_json() == plan.to_json()
    doc = json.loads(path.read_text())
    assert set(doc) >= {"source", "seed", "indices", "achieved"}


def test_combine_identity_up_to_lineage():
    d = make_dataset(state_dim=2, seed=6)
    out = combine([d])
    for name in ("observations", "actions", "rewards", "terminals", "state",
                 "episode_starts"):
        np.testing.assert_array_equal(getattr(out, name), getattr(d, name))
    assert out.meta.name == d.meta.name


def test_combine_concatenates_counts():
    d1 = make_dataset(episode_lengths=(3, 4), seed=1)
    d2 = make_dataset(episode_lengths=(5,), seed=2)
    out = combine([d1, d2])
    assert out.n_transitions == d1.n_transitions + d2.n_transitions
    assert out.n_episodes == d1.n_episodes + d2.n_episodes
    assert validate(out) == []


def test_combine_return_multiset_oracle():
    d1 = make_dataset(episode_lengths=(3, 6, 2), seed=3)
    d2 = make_dataset(episode_lengths=(4, 4), seed=4)
    out = combine([d1, d2])
    merged = np.sort(np.concatenate([episode_returns(d1, 1.0),
                                     episode_returns(d2, 1.0)]))
    np.testing.assert_array_equal(np.sort(episode_returns(out, 1.0)), merged)


def test_combine_schema_checks():
    with pytest.raises(ValueError):
        combine([])
    with pytest.raises(SchemaMismatchError):
        combine([make_dataset(n_agents=2), make_dataset(n_agents=3)])
    with pytest.raises(SchemaMismatchError):
        combine([make_dataset(state_dim=2), make_dataset(state_dim=0)])
    with pytest.raises(SchemaMismatchError):
        combine([make_dataset(), make_continuous_dataset()])


def test_target_distribution_validation():
    with pytest.raises(ValueError):
        TargetDistribution(bin_edges=np.array([0.0, 1.0]),
                           probabilities=np.array([0.5]))
    with pytest.raises(ValueError):
        TargetDistribution(bin_edges=np.array([1.0, 0.0]),
                           probabilities=np.array([1.0]))
    t = TargetDistribution(bin_edges=np.array([0.0, 1.0, 2.0]),
                           probabilities=np.array([0.25, 0.75]))
    assert TargetDistribution.from_json(t.to_json()).to_json() == t.to_json()


def test_self_target_recovers_distribution():
    rng = np.random.default_rng(0)
    pool = pool_with_returns(rng.uniform(0, 20, 600), length=10)
    rets = exact_pool_returns(pool)
    edges = np.linspace(0, 20, 11)
    counts, _ = np.histogram(rets, bins=edges)
    target = TargetDistribution(bin_edges=edges,
                                probabilities=counts / counts.sum())
    out, plan = subsample_to_target(pool, target, budget=pool.n_transitions,
                                    seed=1)
    got, _ = np.histogram(episode_returns(out, 1.0), bins=edges)
    tv = 0.5 * np.abs(got / got.sum() - target.probabilities).sum()
    assert tv <= 0.05
    assert plan.feasibility is None


def test_bimodal_target_oracle():
    rng = np.random.default_rng(5)
    pool = pool_with_returns(rng.uniform(0, 20, 4000), length=20)
    edges = np.array([2.0, 4.0, 16.0, 18.0])
    probs = np.array([0.5, 0.0, 0.5])
    target = TargetDistribution(bin_edges=edges, probabilities=probs)
    out, _ = subsample_to_target(pool, target, budget=50_000, seed=2)
    got, _ = np.histogram(episode_returns(out, 1.0), bins=edges)
    tv = 0.5 * np.abs(got / got.sum() - probs).sum()
    assert tv <= 0.05


def test_target_outside_support_infeasible():
    pool = pool_with_returns(np.linspace(0, 5, 100))
    target = TargetDistribution(bin_edges=np.array([100.0, 200.0]),
                                probabilities=np.array([1.0]))
    with pytest.raises(InfeasibleTargetError, match="infeasible target"):
        subsample_to_target(pool, target, budget=100, seed=0)


def test_empty_positive_bin_attaches_feasibility():
    # Half the mass sits on a bin with no episodes at all; the sampler fills
    # what it can and the plan carries a feasibility report instead of failing.
    pool = pool_with_returns(np.full(300, 2.0), length=10)
    target = TargetDistribution(bin_edges=np.array([0.0, 5.0, 10.0]),
                                probabilities=np.array([0.5, 0.5]))
    out, plan = subsample_to_target(pool, target, budget=1000, seed=0)
    assert plan.feasibility is not None
    assert plan.feasibility["tv_distance"] > 0.05
    assert validate(out) == []


def test_match_self_gives_identical_histograms():
    rng = np.random.default_rng(1)
    pool = pool_with_returns(rng.uniform(0, 20, 500), length=10)
    (a, b), (pa, pb) = match_distributions(pool, pool, bins=20,
                                           budget=pool.n_transitions, seed=3)
    edges = np.linspace(exact_pool_returns(pool).min(),
                        exact_pool_returns(pool).max(), 21)
    ha, _ = np.histogram(episode_returns(a, 1.0), bins=edges)
    hb, _ = np.histogram(episode_returns(b, 1.0), bins=edges)
    np.testing.assert_array_equal(ha, hb)


def test_match_overlapping_gaussians_ks():
    rng = np.random.default_rng(7)
    a = pool_with_returns(rng.normal(10, 2, 3000), length=10, name="a")
    b = pool_with_returns(rng.normal(12, 3, 3000), length=10, name="b")
    (ma, mb), _ = match_distributions(a, b, bins=30, budget=25_000, seed=5)
    ra, rb = episode_returns(ma, 1.0), episode_returns(mb, 1.0)
    lo = min(episode_returns(a, 1.0).min(), episode_returns(b, 1.0).min())
    hi = max(episode_returns(a, 1.0).max(), episode_returns(b, 1.0).max())
    edges = np.linspace(lo, hi, 31)
    ha, _ = np.histogram(ra, bins=edges)
    hb, _ = np.histogram(rb, bins=edges)
    np.testing.assert_array_equal(ha, hb)
    assert ks_statistic(ra, rb) <= 0.05


def test_match_budget_caps_each_side():
    rng = np.random.default_rng(2)
    a = pool_with_returns(rng.uniform(0, 10, 2000), length=10, name="a")
    b = pool_with_returns(rng.uniform(0, 10, 2000), length=10, name="b")
    budget = 5_000
    (ma, mb), _ = match_distributions(a, b, bins=20, budget=budget, seed=1)
    assert abs(ma.n_transitions - budget) < 10 * 2
    assert abs(mb.n_transitions - budget) < 10 * 2


def test_match_disjoint_supports_rejected():
    a = pool_with_returns(np.linspace(0, 1, 50), name="a")
    b = pool_with_returns(np.linspace(10, 11, 50), name="b")
    with pytest.raises(InfeasibleTargetError):
        match_distributions(a, b, bins=10, budget=500, seed=0)


def test_match_budget_below_one_episode_rejected():
    a = pool_with_returns(np.linspace(0, 10, 50), length=30, name="a")
    b = pool_with_returns(np.linspace(0, 10, 50), length=30, name="b")
    with pytest.raises(InfeasibleTargetError, match="budget"):
        match_distributions(a, b, bins=10, budget=3, seed=0)


def test_construct_hits_target():
    rng = np.random.default_rng(4)
    pool = pool_with_returns(rng.uniform(0, 20, 20_000), length=10)
    out, plan = construct_mean_std(pool, 10.0, 2.0, 2000,
                                   tolerance=(0.1, 0.1), seed=1)
    r = episode_returns(out, 1.0)
    assert out.n_episodes == 2000
    assert abs(np.mean(r) - 10.0) <= 0.1
    assert abs(np.std(r) - 2.0) <= 0.1
    assert abs(plan.achieved.mean - np.mean(r)) <= 1e-9
    assert abs(plan.achieved.std - np.std(r)) <= 1e-9


def test_construct_deterministic():
    rng = np.random.default_rng(10)
    pool = pool_with_returns(rng.uniform(0, 20, 5000), length=10)
    _, p1 = construct_mean_std(pool, 8.0, 3.0, 500, seed=7)
    _, p2 = construct_mean_std(pool, 8.0, 3.0, 500, seed=7)
    np.testing.assert_array_equal(p1.selected_episode_indices,
                                  p2.selected_episode_indices)


def test_construct_constant_pool_infeasible():
    pool = pool_with_returns(np.full(100, 5.0))
    with pytest.raises(InfeasibleTargetError, match="infeasible target") as ei:
        construct_mean_std(pool, 10.0, 1.0, 50, seed=0, max_iters=2000)
    assert ei.value.achieved is not None
    mean, std = ei.value.achieved
    assert abs(mean - 5.0) < 1e-6 and abs(std) < 1e-6


def test_construct_needs_enough_episodes():
    pool = pool_with_returns(np.linspace(0, 10, 20))
    with pytest.raises(InfeasibleTargetError, match="pool has 20 episodes"):
        construct_mean_std(pool, 5.0, 1.0, 21, seed=0)


def test_outputs_are_plan_pure():
    # Same plan-relevant inputs, different budgets reaching the same indices
    # must give identical metadata, or replay could not be byte-exact.
    pool = pool_with_returns(np.linspace(0, 10, 80), length=5)
    out, plan = subsample_transitions(pool, 120, seed=6)
    again = take_episodes(pool, plan.selected_episode_indices,
                          seed=plan.rng_seed)
    assert again.meta.to_json() == out.meta.to_json()
