"""Shared fixtures and hand-rolled dataset builders for the test suite."""

import numpy as np
import pytest

from trajvault import (AgentSpec, ContinuousActions, DiscreteActions,
                       FORMAT_VERSION, TrajectoryDataset, VaultMeta)


def make_meta(name="fixture", **overrides):
    fields = dict(name=name, source="unit-tests", environment="toy-grid",
                  scenario="2-agent", quality_label="medium",
                  generation_method="scripted policy", licence="CC-BY-4.0",
                  download_url="https://example.org/fixture.tar.gz",
                  discount_gamma=1.0, format_version=FORMAT_VERSION, extras={})
    fields.update(overrides)
    return VaultMeta(**fields)


def make_dataset(episode_lengths=(3, 4, 3), n_agents=2, obs_dim=3,
                 n_actions=4, state_dim=2, seed=0, rewards=None, name="fixture"):
    """Hand-built valid dataset; rewards optionally supplied per timestep."""
    rng = np.random.default_rng(seed)
    T = int(sum(episode_lengths))
    obs = rng.standard_normal((T, n_agents, obs_dim)).astype(np.float32)
    act = rng.integers(0, n_actions, size=(T, n_agents)).astype(np.int32)
    if rewards is None:
        rew_scalar = rng.standard_normal(T).astype(np.float32)
    else:
        rew_scalar = np.asarray(rewards, np.float32)
        assert rew_scalar.shape == (T,)
    rew = np.repeat(rew_scalar[:, None], n_agents, axis=1)
    starts = np.cumsum([0] + list(episode_lengths[:-1])).astype(np.int64)
    terminals = np.zeros(T, bool)
    ends = np.append(starts[1:], T) - 1
    terminals[ends] = True
    state = None
    if state_dim:
        state = rng.standard_normal((T, state_dim)).astype(np.float32)
    agents = [AgentSpec(f"agent_{i}", obs_dim, DiscreteActions(n_actions))
              for i in range(n_agents)]
    return TrajectoryDataset(observations=obs, actions=act, rewards=rew,
                             terminals=terminals, state=state,
                             episode_starts=starts, agents=agents,
                             meta=make_meta(name))


def make_continuous_dataset(episode_lengths=(5, 5), n_agents=2, obs_dim=3,
                            act_dim=2, seed=0):
    rng = np.random.default_rng(seed)
    T = int(sum(episode_lengths))
    agents = [AgentSpec(f"agent_{i}", obs_dim, ContinuousActions(act_dim))
              for i in range(n_agents)]
    starts = np.cumsum([0] + list(episode_lengths[:-1])).astype(np.int64)
    terminals = np.zeros(T, bool)
    terminals[np.append(starts[1:], T) - 1] = True
    return TrajectoryDataset(
        observations=rng.standard_normal((T, n_agents, obs_dim)).astype(np.float32),
        actions=rng.standard_normal((T, n_agents, act_dim)).astype(np.float32),
        rewards=np.repeat(rng.standard_normal(T).astype(np.float32)[:, None],
                          n_agents, axis=1),
        terminals=terminals, state=None, episode_starts=starts, agents=agents,
        meta=make_meta("continuous"))


def pool_with_returns(returns, length=10, n_agents=2, obs_dim=3, n_actions=5,
                      seed=0, name="pool"):
    """Dataset whose episode e has constant reward returns[e]/length.

    Episode returns then equal the requested values up to f32 rounding of the
    per-step reward; useful for resampling tests with prescribed return laws.
    """
    returns = np.asarray(returns, np.float64)
    E = returns.size
    rng = np.random.default_rng(seed)
    T = E * length
    step = (returns / length).astype(np.float32)
    rew = np.repeat(np.repeat(step, length)[:, None], n_agents, axis=1)
    obs = rng.standard_normal((T, n_agents, obs_dim)).astype(np.float32)
    act = rng.integers(0, n_actions, size=(T, n_agents)).astype(np.int32)
    starts = (np.arange(E) * length).astype(np.int64)
    terminals = np.zeros(T, bool)
    terminals[starts + length - 1] = True
    agents = [AgentSpec(f"agent_{i}", obs_dim, DiscreteActions(n_actions))
              for i in range(n_agents)]
    return TrajectoryDataset(observations=obs, actions=act, rewards=rew,
                             terminals=terminals, state=None,
                             episode_starts=starts, agents=agents,
                             meta=make_meta(name))


def exact_pool_returns(dataset):
    """Ground-truth returns of a pool_with_returns dataset: length * f32 step."""
    starts = dataset.episode_starts
    lengths = dataset.episode_lengths()
    return lengths.astype(np.float64) * dataset.rewards[starts, 0].astype(np.float64)


@pytest.fixture
def small_dataset():
    return make_dataset()


@pytest.fixture
def continuous_dataset():
    return make_continuous_dataset()
