"""In-memory data model for multi-agent trajectory datasets.

A dataset is a columnar, episode-indexed block of transitions. Columns are
dense numpy arrays over all T transitions; episodes are contiguous runs
addressed through ``episode_starts``. Datasets are immutable once built:
every array is frozen, and all editing operations construct new datasets.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

FORMAT_VERSION = 1


@dataclass(frozen=True)
class DiscreteActions:
    cardinality: int
    kind = "discrete"

    def __post_init__(self):
        if self.cardinality < 2:
            raise ValueError(f"discrete action cardinality must be >= 2, got {self.cardinality}")


@dataclass(frozen=True)
class ContinuousActions:
    dim: int
    kind = "continuous"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"continuous action dim must be >= 1, got {self.dim}")


ActionKind = Union[DiscreteActions, ContinuousActions]


@dataclass(frozen=True)
class AgentSpec:
    agent_id: str
    observation_dim: int
    actions: ActionKind

    def __post_init__(self):
        if self.observation_dim < 1:
            raise ValueError(f"observation_dim must be >= 1, got {self.observation_dim}")

    def to_json(self) -> dict:
        d = {"agent_id": self.agent_id, "observation_dim": self.observation_dim,
             "action_kind": self.actions.kind}
        if isinstance(self.actions, DiscreteActions):
            d["cardinality"] = self.actions.cardinality
        else:
            d["dim"] = self.actions.dim
        return d

    @staticmethod
    def from_json(d: dict) -> "AgentSpec":
        if d["action_kind"] == "discrete":
            actions: ActionKind = DiscreteActions(int(d["cardinality"]))
        elif d["action_kind"] == "continuous":
            actions = ContinuousActions(int(d["dim"]))
        else:
            raise ValueError(f"unknown action_kind {d['action_kind']!r}")
        return AgentSpec(str(d["agent_id"]), int(d["observation_dim"]), actions)


@dataclass(frozen=True)
class VaultMeta:
    """Provenance datasheet stored alongside the columns."""

    name: str
    source: str = ""
    environment: str = ""
    scenario: str = ""
    quality_label: str = ""
    generation_method: str = ""
    licence: Optional[str] = None
    download_url: Optional[str] = None
    discount_gamma: float = 1.0
    format_version: int = FORMAT_VERSION
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 < self.discount_gamma <= 1.0):
            raise ValueError(f"discount_gamma must be in (0, 1], got {self.discount_gamma}")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "source": self.source,
            "environment": self.environment,
            "scenario": self.scenario,
            "quality_label": self.quality_label,
            "generation_method": self.generation_method,
            "licence": self.licence,
            "download_url": self.download_url,
            "discount_gamma": self.discount_gamma,
            "format_version": self.format_version,
            "extras": {k: self.extras[k] for k in sorted(self.extras)},
        }

    @staticmethod
    def from_json(d: dict) -> "VaultMeta":
        return VaultMeta(
            name=d["name"], source=d.get("source", ""), environment=d.get("environment", ""),
            scenario=d.get("scenario", ""), quality_label=d.get("quality_label", ""),
            generation_method=d.get("generation_method", ""), licence=d.get("licence"),
            download_url=d.get("download_url"), discount_gamma=float(d.get("discount_gamma", 1.0)),
            format_version=int(d.get("format_version", FORMAT_VERSION)),
            extras=dict(d.get("extras", {})),
        )

    def with_extras(self, **kv: str) -> "VaultMeta":
        merged = dict(self.extras)
        merged.update(kv)
        return replace(self, extras=merged)


def _frozen(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TrajectoryDataset:
    """Columnar container of multi-agent transitions, immutable after construction.

    Shapes, with T transitions and n agents:
      observations  [T, n, obs_dim]   float32
      actions       [T, n]            int32     (discrete)
                    [T, n, act_dim]   float32   (continuous)
      rewards       [T, n]            float32   (shared rewards are replicated per agent)
      terminals     [T]               bool
      state         [T, state_dim]    float32, optional
      episode_starts strictly increasing offsets, first element 0
    """

    agents: tuple
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    terminals: np.ndarray
    state: Optional[np.ndarray]
    episode_starts: np.ndarray
    meta: VaultMeta

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "observations", _frozen(self.observations, np.float32))
        act_dtype = np.int32 if self.discrete_actions else np.float32
        object.__setattr__(self, "actions", _frozen(self.actions, act_dtype))
        object.__setattr__(self, "rewards", _frozen(self.rewards, np.float32))
        object.__setattr__(self, "terminals", _frozen(self.terminals, np.bool_))
        if self.state is not None:
            object.__setattr__(self, "state", _frozen(self.state, np.float32))
        object.__setattr__(self, "episode_starts", _frozen(self.episode_starts, np.int64))

    @property
    def discrete_actions(self) -> bool:
        return all(isinstance(a.actions, DiscreteActions) for a in self.agents)

    @property
    def n_transitions(self) -> int:
        return int(self.observations.shape[0])

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_episodes(self) -> int:
        return int(self.episode_starts.shape[0])

    def episode_bounds(self, e: int) -> tuple:
        if not 0 <= e < self.n_episodes:
            raise IndexError(f"episode index {e} out of range [0, {self.n_episodes})")
        start = int(self.episode_starts[e])
        stop = int(self.episode_starts[e + 1]) if e + 1 < self.n_episodes else self.n_transitions
        return start, stop

    def episode_lengths(self) -> np.ndarray:
        if self.n_episodes == 0:
            return np.zeros(0, dtype=np.int64)
        ends = np.append(self.episode_starts[1:], self.n_transitions)
        return ends - self.episode_starts


@dataclass(frozen=True)
class EpisodeView:
    """Zero-copy view over one episode's rows."""

    episode_index: int
    start: int
    stop: int
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    terminals: np.ndarray
    state: Optional[np.ndarray]

    def __len__(self) -> int:
        return self.stop - self.start


def episode_slice(dataset: TrajectoryDataset, episode_index: int) -> EpisodeView:
    """View of one episode's columns; raises IndexError out of range."""
    start, stop = dataset.episode_bounds(episode_index)
    return EpisodeView(
        episode_index=episode_index,
        start=start,
        stop=stop,
        observations=dataset.observations[start:stop],
        actions=dataset.actions[start:stop],
        rewards=dataset.rewards[start:stop],
        terminals=dataset.terminals[start:stop],
        state=dataset.state[start:stop] if dataset.state is not None else None,
    )


def validate(dataset: TrajectoryDataset) -> list:
    """Check every dataset invariant; returns a list of violation messages.

    An empty list means the dataset is well-formed. Violations are data,
    not exceptions: each message names the offending column or index.
    """
    v: list[str] = []
    d = dataset
    T = d.n_transitions
    n = d.n_agents

    if n == 0:
        v.append("dataset has no agents")
        return v

    ids = [a.agent_id for a in d.agents]
    for i, aid in enumerate(ids):
        if aid in ids[:i]:
            v.append(f"duplicate agent_id {aid!r} at position {i}")

    kinds = {a.actions.kind for a in d.agents}
    if len(kinds) > 1:
        v.append("mixed discrete/continuous action kinds across agents")

    obs_dims = {a.observation_dim for a in d.agents}
    if d.observations.ndim != 3:
        v.append(f"observations must be rank 3, got rank {d.observations.ndim}")
    else:
        if d.observations.shape[1] != n:
            v.append(f"observations agent axis is {d.observations.shape[1]}, expected {n}")
        if len(obs_dims) == 1 and d.observations.shape[2] != next(iter(obs_dims)):
            v.append(
                f"observations dim {d.observations.shape[2]} does not match agent spec "
                f"{next(iter(obs_dims))}")
        elif len(obs_dims) > 1:
            v.append("agents declare differing observation_dim but observations are dense")

    if d.discrete_actions:
        if d.actions.ndim != 2 or (d.actions.ndim == 2 and d.actions.shape[1] != n):
            v.append(f"discrete actions must have shape [T, {n}], got {d.actions.shape}")
    else:
        act_dims = {a.actions.dim for a in d.agents if isinstance(a.actions, ContinuousActions)}
        if d.actions.ndim != 3 or d.actions.shape[1] != n:
            v.append(f"continuous actions must have shape [T, {n}, act_dim], got {d.actions.shape}")
        elif len(act_dims) == 1 and d.actions.shape[2] != next(iter(act_dims)):
            v.append(
                f"actions dim {d.actions.shape[2]} does not match agent spec {next(iter(act_dims))}")

    if d.rewards.ndim != 2 or d.rewards.shape[1] != n:
        v.append(f"rewards must have shape [T, {n}], got {d.rewards.shape}")

    for name, col in (("observations", d.observations), ("actions", d.actions),
                      ("rewards", d.rewards), ("terminals", d.terminals)):
        if col.shape[0] != T:
            v.append(f"column {name} has length {col.shape[0]}, expected T={T}")

    if d.state is not None:
        if d.state.ndim != 2 or d.state.shape[1] < 1:
            v.append(f"state must have shape [T, state_dim>=1], got {d.state.shape}")
        elif d.state.shape[0] != T:
            v.append(f"column state has length {d.state.shape[0]}, expected T={T}")

    starts = d.episode_starts
    if T == 0:
        if starts.size != 0:
            v.append("empty dataset must have no episode starts")
        return v

    if starts.size == 0:
        v.append("non-empty dataset has no episode starts")
        return v
    if starts[0] != 0:
        v.append(f"episode_starts must begin at 0, got {int(starts[0])}")
    if np.any(np.diff(starts) <= 0):
        v.append("episode_starts not strictly increasing")
    if np.any(starts >= T):
        bad = int(starts[np.argmax(starts >= T)])
        v.append(f"episode start {bad} is not < T={T}")
        return v  # boundary arithmetic below would be meaningless

    if not np.any(np.diff(starts) <= 0):
        # Terminals may only appear at the final transition of an episode; the
        # converse is not required (an all-false terminals column is legal).
        ends = np.append(starts[1:], T) - 1
        is_end = np.zeros(T, dtype=bool)
        is_end[ends] = True
        inside = np.flatnonzero(d.terminals & ~is_end)
        for t in inside[:16]:
            v.append(f"terminal inside episode at t={int(t)}")

    return v
