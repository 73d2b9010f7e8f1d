"""Deterministic synthetic trajectory generator.

Fixtures for tests and benchmarks: a linear latent-state process with noisy
per-agent emissions, a quality knob that shifts per-step reward affinely, and
a pool generator whose episode returns are uniform on a chosen interval by
construction. Output is a pure function of the arguments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import AgentSpec, ContinuousActions, DiscreteActions, TrajectoryDataset, VaultMeta
from .seeds import OP_GENERATE, OP_POOL, op_rng


@dataclass(frozen=True)
class DecPomdpSpec:
    """Structural parameters of the generated process.

    Exactly one of action_cardinality (discrete) or action_dim (continuous)
    must be set. When counter_state is true (requires state_dim >= 1), state
    channel 0 holds a strictly increasing transition counter, which makes
    every (state, joint-action) pair unique.
    """

    n_agents: int
    observation_dim: int
    action_cardinality: Optional[int] = None
    action_dim: Optional[int] = None
    state_dim: Optional[int] = None
    episode_length_range: tuple = (10, 50)
    reward_base: float = 0.0
    reward_scale: float = 10.0
    reward_noise: float = 0.1
    counter_state: bool = False
    name: str = "synthetic"

    def __post_init__(self):
        if self.n_agents < 1:
            raise ValueError("n_agents must be >= 1")
        if self.observation_dim < 1:
            raise ValueError("observation_dim must be >= 1")
        if (self.action_cardinality is None) == (self.action_dim is None):
            raise ValueError("set exactly one of action_cardinality, action_dim")
        if self.action_cardinality is not None and self.action_cardinality < 2:
            raise ValueError("action_cardinality must be >= 2")
        if self.action_dim is not None and self.action_dim < 1:
            raise ValueError("action_dim must be >= 1")
        if self.state_dim is not None and self.state_dim < 1:
            raise ValueError("state_dim must be >= 1")
        lo, hi = self.episode_length_range
        if not (1 <= lo <= hi):
            raise ValueError(f"bad episode_length_range {self.episode_length_range}")
        if self.counter_state and self.state_dim is None:
            raise ValueError("counter_state requires state_dim")
        if self.reward_noise < 0:
            raise ValueError("reward_noise must be >= 0")

    def agents(self) -> tuple:
        if self.action_cardinality is not None:
            kind = DiscreteActions(self.action_cardinality)
        else:
            kind = ContinuousActions(self.action_dim)
        return tuple(AgentSpec(f"agent_{i}", self.observation_dim, kind)
                     for i in range(self.n_agents))

    def to_json(self) -> dict:
        return {
            "n_agents": self.n_agents,
            "observation_dim": self.observation_dim,
            "action_cardinality": self.action_cardinality,
            "action_dim": self.action_dim,
            "state_dim": self.state_dim,
            "episode_length_range": list(self.episode_length_range),
            "reward_base": self.reward_base,
            "reward_scale": self.reward_scale,
            "reward_noise": self.reward_noise,
            "counter_state": self.counter_state,
            "name": self.name,
        }

    @staticmethod
    def from_json(d: dict) -> "DecPomdpSpec":
        lr = d.get("episode_length_range", [10, 50])
        return DecPomdpSpec(
            n_agents=int(d["n_agents"]),
            observation_dim=int(d["observation_dim"]),
            action_cardinality=(None if d.get("action_cardinality") is None
                                else int(d["action_cardinality"])),
            action_dim=None if d.get("action_dim") is None else int(d["action_dim"]),
            state_dim=None if d.get("state_dim") is None else int(d["state_dim"]),
            episode_length_range=(int(lr[0]), int(lr[1])),
            reward_base=float(d.get("reward_base", 0.0)),
            reward_scale=float(d.get("reward_scale", 10.0)),
            reward_noise=float(d.get("reward_noise", 0.1)),
            counter_state=bool(d.get("counter_state", False)),
            name=str(d.get("name", "synthetic")),
        )

    @staticmethod
    def from_json_file(path: str) -> "DecPomdpSpec":
        with open(path, "r", encoding="utf-8") as f:
            return DecPomdpSpec.from_json(json.load(f))


@dataclass(frozen=True)
class BehaviourKnob:
    """Behaviour-policy dial: quality shifts mean reward, noise widens actions."""

    quality: float = 0.5
    exploration_noise: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.quality <= 1.0):
            raise ValueError("quality must be in [0, 1]")
        if self.exploration_noise < 0:
            raise ValueError("exploration_noise must be >= 0")


def _uniform32(rng: np.random.Generator, lo: float, hi: float, shape) -> np.ndarray:
    return (lo + (hi - lo) * rng.random(shape, dtype=np.float32)).astype(np.float32)


def generate(spec: DecPomdpSpec, knob: BehaviourKnob, n_episodes: int,
             seed: int) -> TrajectoryDataset:
    """Generate n_episodes episodes; byte-identical output for identical arguments.

    Per-step reward is reward_base + quality*reward_scale plus zero-mean
    noise, so the expected episode return is affine and strictly increasing
    in quality. All random draws have shapes fixed by (spec, n_episodes), so
    the stream layout never depends on drawn values.
    """
    rng = op_rng(seed, OP_GENERATE)
    n = spec.n_agents
    od = spec.observation_dim
    ldim = spec.state_dim if spec.state_dim is not None else max(2, od)
    lmin, lmax = spec.episode_length_range
    E = int(n_episodes)

    lengths = rng.integers(lmin, lmax + 1, size=E).astype(np.int64)
    decay = _uniform32(rng, 0.5, 0.95, ldim)
    drift = _uniform32(rng, -0.05, 0.05, ldim)
    emit_gain = _uniform32(rng, 0.5, 1.5, (n, od))
    emit_bias = _uniform32(rng, -0.5, 0.5, (n, od))
    emit_pick = rng.integers(0, ldim, size=(n, od))

    meta = VaultMeta(
        name=f"{spec.name}-seed{seed}",
        source="trajvault synthetic generator",
        environment="linear-latent",
        scenario=f"{n}x{od}" + ("d" if spec.action_cardinality is not None else "c"),
        quality_label=f"quality={knob.quality:g}",
        generation_method=("linear latent state with diagonal decay, noisy linear emissions, "
                           f"reward affine in quality (base {spec.reward_base:g}, "
                           f"scale {spec.reward_scale:g})"),
        licence="CC-BY-4.0",
        discount_gamma=1.0,
        extras={"reward_sharing": "shared", "truncation_semantics": "merged",
                "seed": str(seed), "quality": f"{knob.quality:g}"},
    )
    agents = spec.agents()

    if E == 0:
        act_shape = (0, n) if spec.action_cardinality is not None else (0, n, spec.action_dim)
        act_dtype = np.int32 if spec.action_cardinality is not None else np.float32
        return TrajectoryDataset(
            agents=agents,
            observations=np.zeros((0, n, od), np.float32),
            actions=np.zeros(act_shape, act_dtype),
            rewards=np.zeros((0, n), np.float32),
            terminals=np.zeros(0, np.bool_),
            state=(np.zeros((0, spec.state_dim), np.float32)
                   if spec.state_dim is not None else None),
            episode_starts=np.zeros(0, np.int64),
            meta=meta,
        )

    Lmax = int(lengths.max())
    s0 = _uniform32(rng, -1.0, 1.0, (E, ldim))
    if spec.action_cardinality is not None:
        actions_pad = rng.integers(0, spec.action_cardinality, size=(E, Lmax, n)).astype(np.int32)
        act_mean = actions_pad.mean(axis=2, dtype=np.float32) / spec.action_cardinality - 0.5
    else:
        actions_pad = (np.float32(knob.quality)
                       + np.float32(knob.exploration_noise)
                       * rng.standard_normal((E, Lmax, n, spec.action_dim), dtype=np.float32))
        act_mean = actions_pad.mean(axis=(2, 3), dtype=np.float32)
    trans_noise = np.float32(0.1) * rng.standard_normal((E, Lmax, ldim), dtype=np.float32)
    obs_noise = np.float32(0.05) * rng.standard_normal((E, Lmax, n, od), dtype=np.float32)
    rew_noise = rng.standard_normal((E, Lmax), dtype=np.float32)

    latent = np.empty((E, Lmax, ldim), np.float32)
    s = s0
    for t in range(Lmax):
        latent[:, t, :] = s
        s = decay * s + drift + np.float32(0.05) * act_mean[:, t, None] + trans_noise[:, t, :]

    obs_pad = emit_gain * latent[:, :, emit_pick] + emit_bias + obs_noise
    rew_scalar = (np.float32(spec.reward_base + knob.quality * spec.reward_scale)
                  + np.float32(spec.reward_noise) * rew_noise)
    rew_pad = np.repeat(rew_scalar[:, :, None], n, axis=2)

    valid = np.arange(Lmax)[None, :] < lengths[:, None]
    flat = valid.ravel()
    T = int(lengths.sum())
    observations = obs_pad.reshape(E * Lmax, n, od)[flat]
    if spec.action_cardinality is not None:
        actions = actions_pad.reshape(E * Lmax, n)[flat]
    else:
        actions = actions_pad.reshape(E * Lmax, n, spec.action_dim)[flat]
    rewards = rew_pad.reshape(E * Lmax, n)[flat]

    terminals = np.zeros(T, np.bool_)
    ends = np.cumsum(lengths) - 1
    terminals[ends] = True
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))

    state = None
    if spec.state_dim is not None:
        state = latent.reshape(E * Lmax, ldim)[flat].copy()
        if spec.counter_state:
            state[:, 0] = np.arange(T, dtype=np.float32)

    return TrajectoryDataset(
        agents=agents, observations=observations, actions=actions, rewards=rewards,
        terminals=terminals, state=state, episode_starts=starts, meta=meta,
    )


def generate_return_pool(target_support: tuple, n_episodes: int, episode_length: int,
                         seed: int) -> TrajectoryDataset:
    """Pool whose episode returns are uniform on [lo, hi) by construction.

    Every step of an episode carries the same reward desired/episode_length,
    so the 64-bit return equals episode_length times the stored 32-bit step
    reward exactly (episode_length well below 2**29).
    """
    lo, hi = float(target_support[0]), float(target_support[1])
    if not lo < hi:
        raise ValueError(f"target support must satisfy lo < hi, got ({lo}, {hi})")
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    if episode_length < 1:
        raise ValueError("episode_length must be >= 1")

    rng = op_rng(seed, OP_POOL)
    E, L = int(n_episodes), int(episode_length)
    T = E * L
    n, od, card = 2, 4, 5

    desired = lo + (hi - lo) * rng.random(E)
    step = (desired / L).astype(np.float32)
    rewards = np.repeat(np.repeat(step, L)[:, None], n, axis=1)
    observations = _uniform32(rng, -1.0, 1.0, (T, n, od))
    actions = rng.integers(0, card, size=(T, n)).astype(np.int32)
    terminals = np.zeros(T, np.bool_)
    terminals[L - 1::L] = True
    starts = np.arange(0, T, L, dtype=np.int64)

    meta = VaultMeta(
        name=f"return-pool-seed{seed}",
        source="trajvault synthetic generator",
        environment="constant-reward-pool",
        scenario=f"uniform[{lo:g},{hi:g}]",
        quality_label="pool",
        generation_method=f"constant per-step reward desired/{L}, desired uniform on support",
        licence="CC-BY-4.0",
        discount_gamma=1.0,
        extras={"reward_sharing": "shared", "truncation_semantics": "merged",
                "seed": str(seed)},
    )
    agents = tuple(AgentSpec(f"agent_{i}", od, DiscreteActions(card)) for i in range(n))
    return TrajectoryDataset(
        agents=agents, observations=observations, actions=actions, rewards=rewards,
        terminals=terminals, state=None, episode_starts=starts, meta=meta,
    )
