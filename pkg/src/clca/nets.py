"""Policy and value networks: two-hidden-layer ReLU MLPs over the
environment observation, with a diagonal-Gaussian action head.

Everything is plain numpy float64; forward passes here serve single
observations (inference), while training batches its own forward/backward
in `a2c`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DimensionMismatch
from .rng import Xoshiro256StarStar

ACTION_DIM = 4
DEFAULT_HIDDEN = 64
LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Field order is the initialization draw order and the flattening order
# for gradient checks.
PARAM_FIELDS = (
    "w1", "b1", "w2", "b2", "w_mean", "b_mean", "log_std",
    "vw1", "vb1", "vw2", "vb2", "wv", "bv",
)


@dataclass
class MlpParams:
    """Separate policy and value trunks plus a state-independent log-std.

    Weight matrices are (out, in); the policy trunk is w1/b1 -> w2/b2 with
    a 4-unit mean head, the value trunk vw1/vb1 -> vw2/vb2 with a scalar
    head.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w_mean: np.ndarray
    b_mean: np.ndarray
    log_std: np.ndarray
    vw1: np.ndarray
    vb1: np.ndarray
    vw2: np.ndarray
    vb2: np.ndarray
    wv: np.ndarray
    bv: np.ndarray

    @property
    def obs_dim(self) -> int:
        return self.w1.shape[1]

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> "MlpParams":
        return MlpParams(**{k: v.copy() for k, v in self.as_dict().items()})

    def flatten(self) -> np.ndarray:
        return np.concatenate([getattr(self, name).ravel() for name in PARAM_FIELDS])

    def with_flat(self, vec: np.ndarray) -> "MlpParams":
        out = {}
        offset = 0
        for name in PARAM_FIELDS:
            arr = getattr(self, name)
            n = arr.size
            out[name] = vec[offset : offset + n].reshape(arr.shape).copy()
            offset += n
        return MlpParams(**out)


def init_params(obs_dim: int, seed: int, hidden_dim: int = DEFAULT_HIDDEN) -> MlpParams:
    """Seeded initialization.

    Weights draw from Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) in declared
    field order (row-major within a matrix); biases and log_std start at
    zero; the mean head is scaled down by 0.01 after drawing so initial
    policy means sit near zero.
    """
    if obs_dim < 1:
        raise ValueError("obs_dim must be >= 1")
    h = hidden_dim
    rng = Xoshiro256StarStar(seed)

    def draw(rows: int, cols: int) -> np.ndarray:
        limit = math.sqrt(6.0 / cols)
        flat = [limit * (2.0 * rng.uniform() - 1.0) for _ in range(rows * cols)]
        return np.array(flat, dtype=np.float64).reshape(rows, cols)

    return MlpParams(
        w1=draw(h, obs_dim),
        b1=np.zeros(h),
        w2=draw(h, h),
        b2=np.zeros(h),
        w_mean=draw(ACTION_DIM, h) * 0.01,
        b_mean=np.zeros(ACTION_DIM),
        log_std=np.zeros(ACTION_DIM),
        vw1=draw(h, obs_dim),
        vb1=np.zeros(h),
        vw2=draw(h, h),
        vb2=np.zeros(h),
        wv=draw(1, h),
        bv=np.zeros(1),
    )


def _check_obs(params: MlpParams, obs) -> np.ndarray:
    x = np.asarray(obs, dtype=np.float64)
    if x.shape != (params.obs_dim,):
        raise DimensionMismatch(
            f"observation shape {x.shape} does not match obs_dim {params.obs_dim}"
        )
    return x


def forward_policy(params: MlpParams, obs) -> tuple[np.ndarray, np.ndarray]:
    """Returns (mean, log_std). The mean is unbounded; clamping to the
    action box happens at sampling/prediction time."""
    x = _check_obs(params, obs)
    a1 = np.maximum(params.w1 @ x + params.b1, 0.0)
    a2 = np.maximum(params.w2 @ a1 + params.b2, 0.0)
    mean = params.w_mean @ a2 + params.b_mean
    return mean, params.log_std


def forward_value(params: MlpParams, obs) -> float:
    x = _check_obs(params, obs)
    a1 = np.maximum(params.vw1 @ x + params.vb1, 0.0)
    a2 = np.maximum(params.vw2 @ a1 + params.vb2, 0.0)
    return float((params.wv @ a2 + params.bv)[0])


def gaussian_log_prob(raw: np.ndarray, mean: np.ndarray, log_std: np.ndarray) -> float:
    """Diagonal-Gaussian log density, evaluated at the unclamped sample."""
    std = np.exp(log_std)
    z = (raw - mean) / std
    return float(np.sum(-0.5 * z * z - log_std - _HALF_LOG_2PI))


def sample_action(
    mean: np.ndarray, log_std: np.ndarray, rng: Xoshiro256StarStar
) -> tuple[np.ndarray, np.ndarray, float]:
    """Draws one action; returns (clamped env action, raw sample, log_prob).

    Normals come from Box-Muller on the seeded stream, generated in
    component order; the log-probability is evaluated at the raw sample
    while the environment receives the clamped one.
    """
    z = np.array(rng.normals(ACTION_DIM), dtype=np.float64)
    raw = mean + np.exp(log_std) * z
    clamped = np.clip(raw, 0.0, 1.0)
    return clamped, raw, gaussian_log_prob(raw, mean, log_std)


def entropy(log_std: np.ndarray) -> float:
    """Diagonal-Gaussian entropy: sum_i (1/2 + 1/2 log 2pi + log_std_i)."""
    return float(np.sum(0.5 + _HALF_LOG_2PI + log_std))


def predict(
    params: MlpParams,
    obs,
    deterministic: bool = True,
    rng: Xoshiro256StarStar | None = None,
) -> np.ndarray:
    """Action for an observation: clamp(mean) when deterministic, else one
    sampled clamped action (requires an rng)."""
    mean, log_std = forward_policy(params, obs)
    if deterministic:
        return np.clip(mean, 0.0, 1.0)
    if rng is None:
        raise ValueError("sampled predict requires an rng")
    return sample_action(mean, log_std, rng)[0]
