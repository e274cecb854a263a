"""Simulated sales-interaction environment.

Episodes replay one sampled dialogue record. The observation is the
record's embedding concatenated with running statistics of the agent's
actions; actions are four continuous dialogue metrics in [0, 1]; the
reward combines a terminal outcome term with per-step shaping (a variety
bonus and an extremity penalty).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import EmptyDataset, EpisodeFinished, NonFiniteAction, SchemaError
from .rng import Xoshiro256StarStar
from .schemas import DialogueDataset, DialogueRecord

ACTION_DIM = 4
ACTION_METRICS = ("engagement", "value_proposition", "technical_detail", "closing")
NEUTRAL_ACTION = (0.5, 0.5, 0.5, 0.5)
OUTCOME_MODES = ("dataset", "aligned")


@dataclass(frozen=True)
class ActionVector:
    """The four controlled dialogue metrics, each in [0, 1]."""

    engagement: float
    value_proposition: float
    technical_detail: float
    closing: float

    def __post_init__(self):
        for name in ACTION_METRICS:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SchemaError(f"ActionVector: {name}={v} outside [0, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.engagement, self.value_proposition, self.technical_detail, self.closing)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "ActionVector":
        e, v, t, c = (float(x) for x in values)
        return cls(e, v, t, c)


def coerce_action(action) -> tuple[float, float, float, float]:
    """Accepts ActionVector, sequence, or ndarray of 4 floats."""
    if isinstance(action, ActionVector):
        return action.as_tuple()
    vals = tuple(float(x) for x in action)
    if len(vals) != ACTION_DIM:
        raise ValueError(f"action must have {ACTION_DIM} components, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class HistoryStats:
    """Running mean of the episode's actions so far.

    count=0 is the neutral prior (0.5, 0.5, 0.5, 0.5); with count>=1 the
    values are the arithmetic mean of the first `count` actions.
    """

    values: tuple[float, float, float, float] = NEUTRAL_ACTION
    count: int = 0

    @classmethod
    def neutral(cls) -> "HistoryStats":
        return cls(NEUTRAL_ACTION, 0)

    def update(self, action) -> "HistoryStats":
        a = coerce_action(action)
        n = self.count
        if n == 0:
            return HistoryStats(a, 1)
        vals = tuple((self.values[i] * n + a[i]) / (n + 1) for i in range(ACTION_DIM))
        return HistoryStats(vals, n + 1)


def update_history(h: HistoryStats, action) -> HistoryStats:
    return h.update(action)


@dataclass(frozen=True)
class EnvState:
    """Observation: dialogue embedding (dim E) plus 4 history statistics."""

    embedding: np.ndarray
    history: HistoryStats

    @property
    def observation(self) -> np.ndarray:
        return np.concatenate([self.embedding, np.asarray(self.history.values)])


@dataclass(frozen=True)
class EnvConfig:
    c_var: float = 0.1
    c_ext: float = 0.1
    r_success: float = 1.0
    r_failure: float = -1.0
    max_steps: int = 10
    outcome_mode: str = "dataset"
    aligned_threshold: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.max_steps < 1:
            raise SchemaError("EnvConfig: max_steps must be >= 1")
        if self.aligned_threshold <= 0:
            raise SchemaError("EnvConfig: aligned_threshold must be > 0")
        if self.c_var < 0 or self.c_ext < 0:
            raise SchemaError("EnvConfig: c_var and c_ext must be >= 0")
        if self.outcome_mode not in OUTCOME_MODES:
            raise SchemaError(f"EnvConfig: outcome_mode must be one of {OUTCOME_MODES}")

    def to_dict(self) -> dict:
        return {
            "c_var": self.c_var,
            "c_ext": self.c_ext,
            "r_success": self.r_success,
            "r_failure": self.r_failure,
            "max_steps": self.max_steps,
            "outcome_mode": self.outcome_mode,
            "aligned_threshold": self.aligned_threshold,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnvConfig":
        if not isinstance(d, dict):
            raise SchemaError("EnvConfig: expected a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise SchemaError(f"EnvConfig: unknown fields {sorted(unknown)}")
        return cls(**d)


class RewardComponents(NamedTuple):
    r_outcome: float
    r_variety: float
    r_extremity: float


@dataclass(frozen=True)
class StepResult:
    next_state: EnvState
    reward: float
    reward_components: RewardComponents
    done: bool


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def aligned_target(embedding: np.ndarray) -> tuple[float, float, float, float]:
    """Per-record action target used in `aligned` outcome mode: the
    logistic of 4x the first four embedding components."""
    return tuple(_sigmoid(4.0 * float(embedding[i])) for i in range(ACTION_DIM))


def reward_fn(
    action,
    terminal: bool,
    outcome: str,
    config: EnvConfig,
    episode_mean_action,
    embedding: np.ndarray,
) -> tuple[float, RewardComponents]:
    """Three-part reward: terminal outcome, variety bonus, extremity penalty.

    The variety bonus scales with the population standard deviation of the
    action's four components; the extremity penalty with the mean squared
    deviation from the 0.5 neutral point. The outcome term is zero off the
    terminal step.
    """
    a = coerce_action(action)
    mean = (a[0] + a[1] + a[2] + a[3]) / 4.0
    var = sum((x - mean) ** 2 for x in a) / 4.0
    r_variety = config.c_var * math.sqrt(var)
    msd = sum((x - 0.5) ** 2 for x in a) / 4.0
    r_extremity = -config.c_ext * msd

    r_outcome = 0.0
    if terminal:
        if config.outcome_mode == "dataset":
            success = outcome == "success"
        else:
            target = aligned_target(embedding)
            m = coerce_action(episode_mean_action)
            l1 = sum(abs(m[i] - target[i]) for i in range(ACTION_DIM)) / 4.0
            success = l1 < config.aligned_threshold
        r_outcome = config.r_success if success else config.r_failure

    reward = r_outcome + r_variety + r_extremity
    return reward, RewardComponents(r_outcome, r_variety, r_extremity)


class SalesEnv:
    """Episodes over sampled dialogue records.

    One environment instance is single-threaded mutable state; run
    independent instances (with distinct seeds) for parallelism.
    """

    def __init__(self, dataset: DialogueDataset, config: EnvConfig | None = None):
        self.dataset = dataset
        self.config = config or EnvConfig()
        self._rng = Xoshiro256StarStar(self.config.seed)
        self._record: DialogueRecord | None = None
        self._embedding: np.ndarray | None = None
        self._history = HistoryStats.neutral()
        self._t = 0
        self._episode_len = 0
        self._active = False

    @property
    def obs_dim(self) -> int:
        return self.dataset.embed_dim + ACTION_DIM

    @property
    def current_record(self) -> DialogueRecord | None:
        return self._record

    def reset(self, seed: int | None = None) -> EnvState:
        if len(self.dataset) == 0:
            raise EmptyDataset("cannot reset over an empty dataset")
        if seed is not None:
            self._rng = Xoshiro256StarStar(seed)
        idx = self._rng.randrange(len(self.dataset))
        self._record = self.dataset.records[idx]
        self._embedding = self.dataset.embeddings[idx]
        self._episode_len = min(len(self._record.conversation), self.config.max_steps)
        self._history = HistoryStats.neutral()
        self._t = 0
        self._active = True
        return EnvState(self._embedding, self._history)

    def step(self, action) -> StepResult:
        if not self._active:
            raise EpisodeFinished("reset the environment before stepping")
        raw = coerce_action(action)
        if not all(math.isfinite(x) for x in raw):
            raise NonFiniteAction(f"action contains non-finite values: {raw}")
        clamped = tuple(min(1.0, max(0.0, x)) for x in raw)

        self._history = self._history.update(clamped)
        terminal = self._t == self._episode_len - 1
        reward, components = reward_fn(
            clamped,
            terminal,
            self._record.outcome,
            self.config,
            self._history.values,
            self._embedding,
        )
        self._t += 1
        if terminal:
            self._active = False
        next_state = EnvState(self._embedding, self._history)
        return StepResult(next_state, reward, components, terminal)
