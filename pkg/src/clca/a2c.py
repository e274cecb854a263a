"""Actor-critic training core.

Rollout collection, generalized advantage estimation, the A2C loss with
hand-written reverse-mode gradients, Adam updates, and the training loop.
No autograd framework: gradients are explicit so they can be audited
against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .env import ACTION_DIM, EnvConfig, SalesEnv
from .errors import DimensionMismatch, NonFiniteLoss, SchemaError
from .nets import (
    MlpParams,
    PARAM_FIELDS,
    forward_policy,
    forward_value,
    entropy,
    init_params,
    sample_action,
)
from .rng import Xoshiro256StarStar, derive_seed

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
REPORT_EVERY_STEPS = 1000


@dataclass(frozen=True)
class A2CConfig:
    learning_rate: float = 7e-4
    gamma: float = 0.99
    gae_lambda: float = 1.0
    n_steps: int = 5
    vf_coef: float = 0.5
    ent_coef: float = 0.0
    max_grad_norm: float = 0.5
    total_timesteps: int = 50_000
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise SchemaError("A2CConfig: gamma must be in (0, 1]")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise SchemaError("A2CConfig: gae_lambda must be in [0, 1]")
        if self.learning_rate <= 0:
            raise SchemaError("A2CConfig: learning_rate must be > 0")
        if self.n_steps < 1:
            raise SchemaError("A2CConfig: n_steps must be >= 1")
        if self.total_timesteps < 1:
            raise SchemaError("A2CConfig: total_timesteps must be >= 1")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "gamma": self.gamma,
            "gae_lambda": self.gae_lambda,
            "n_steps": self.n_steps,
            "vf_coef": self.vf_coef,
            "ent_coef": self.ent_coef,
            "max_grad_norm": self.max_grad_norm,
            "total_timesteps": self.total_timesteps,
            "seed": self.seed,
            "adam_beta1": self.adam_beta1,
            "adam_beta2": self.adam_beta2,
            "adam_eps": self.adam_eps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "A2CConfig":
        if not isinstance(d, dict):
            raise SchemaError("A2CConfig: expected a JSON object")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise SchemaError(f"A2CConfig: unknown fields {sorted(unknown)}")
        return cls(**d)


@dataclass
class RolloutBuffer:
    """Fixed-length rollout: one row per environment step, plus the value
    estimate of the state following the final step."""

    obs: np.ndarray          # (n, obs_dim)
    actions_raw: np.ndarray  # (n, 4), unclamped samples
    rewards: np.ndarray      # (n,)
    dones: np.ndarray        # (n,), 1.0 where the episode ended
    values: np.ndarray       # (n,), V(s_t) at collection time
    log_probs: np.ndarray    # (n,), at the unclamped sample
    bootstrap_value: float

    def __post_init__(self):
        n = len(self.rewards)
        for name in ("obs", "actions_raw", "dones", "values", "log_probs"):
            if len(getattr(self, name)) != n:
                raise DimensionMismatch(f"buffer array '{name}' length != {n}")
        if not np.all(np.isfinite(self.log_probs)):
            raise SchemaError("RolloutBuffer: log_probs must be finite")


def compute_gae(
    rewards: Sequence[float],
    values: Sequence[float],
    dones: Sequence[bool],
    bootstrap_value: float,
    gamma: float,
    lam: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Backward GAE recursion.

    delta_t = r_t + gamma*(1-done_t)*V_{t+1} - V_t, where V_{t+1} is the
    next stored value or the bootstrap at the buffer end; advantages
    accumulate backward with factor gamma*lam*(1-done_t); returns are
    advantages plus values.
    """
    r = np.asarray(rewards, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    d = np.asarray(dones, dtype=np.float64)
    if not (len(r) == len(v) == len(d)):
        raise DimensionMismatch("rewards, values, dones must have equal length")
    n = len(r)
    adv = np.zeros(n, dtype=np.float64)
    last = 0.0
    for t in range(n - 1, -1, -1):
        next_value = v[t + 1] if t + 1 < n else bootstrap_value
        nonterminal = 1.0 - d[t]
        delta = r[t] + gamma * nonterminal * next_value - v[t]
        last = delta + gamma * lam * nonterminal * last
        adv[t] = last
    return adv, adv + v


class LossComponents(NamedTuple):
    policy_loss: float
    value_loss: float
    entropy: float
    total: float


def _policy_forward_batch(params: MlpParams, obs: np.ndarray):
    z1 = obs @ params.w1.T + params.b1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params.w2.T + params.b2
    a2 = np.maximum(z2, 0.0)
    mean = a2 @ params.w_mean.T + params.b_mean
    return z1, a1, z2, a2, mean


def _value_forward_batch(params: MlpParams, obs: np.ndarray):
    z1 = obs @ params.vw1.T + params.vb1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params.vw2.T + params.vb2
    a2 = np.maximum(z2, 0.0)
    v = (a2 @ params.wv.T + params.bv).ravel()
    return z1, a1, z2, a2, v


def a2c_loss_and_grads(
    params: MlpParams, buffer: RolloutBuffer, config: A2CConfig
) -> tuple[LossComponents, dict[str, np.ndarray]]:
    """A2C loss over a full buffer plus gradients for every parameter.

    Advantages are treated as constants (no gradient flows through the
    GAE targets). Gradients are rescaled at the end so their global L2
    norm does not exceed config.max_grad_norm.
    """
    n = len(buffer.rewards)
    obs = buffer.obs
    advantages, returns = compute_gae(
        buffer.rewards,
        buffer.values,
        buffer.dones,
        buffer.bootstrap_value,
        config.gamma,
        config.gae_lambda,
    )

    # Policy side.
    z1, a1, z2, a2, mean = _policy_forward_batch(params, obs)
    std = np.exp(params.log_std)
    diff = buffer.actions_raw - mean                      # (n, 4)
    zsq = (diff / std) ** 2                               # (n, 4)
    log_probs = np.sum(-0.5 * zsq - params.log_std - _HALF_LOG_2PI, axis=1)
    policy_loss = float(-np.mean(advantages * log_probs))

    # Value side.
    vz1, va1, vz2, va2, v = _value_forward_batch(params, obs)
    err = v - returns
    value_loss = float(np.mean(err * err))

    ent = entropy(params.log_std)
    total = policy_loss + config.vf_coef * value_loss - config.ent_coef * ent
    if not (math.isfinite(policy_loss) and math.isfinite(value_loss) and math.isfinite(ent)):
        raise NonFiniteLoss(
            f"policy_loss={policy_loss} value_loss={value_loss} entropy={ent}"
        )

    # Backward, policy trunk. d(policy_loss)/d(mean) and /d(log_std).
    coef = (-advantages / n)[:, None]                     # (n, 1)
    d_mean = coef * (diff / (std * std))                  # (n, 4)
    d_log_std = np.sum(coef * (zsq - 1.0), axis=0) - config.ent_coef

    grads: dict[str, np.ndarray] = {}
    grads["w_mean"] = d_mean.T @ a2
    grads["b_mean"] = d_mean.sum(axis=0)
    da2 = d_mean @ params.w_mean
    dz2 = da2 * (z2 > 0.0)
    grads["w2"] = dz2.T @ a1
    grads["b2"] = dz2.sum(axis=0)
    da1 = dz2 @ params.w2
    dz1 = da1 * (z1 > 0.0)
    grads["w1"] = dz1.T @ obs
    grads["b1"] = dz1.sum(axis=0)
    grads["log_std"] = d_log_std

    # Backward, value trunk.
    dv = config.vf_coef * 2.0 * err / n                   # (n,)
    grads["wv"] = (dv[None, :] @ va2)
    grads["bv"] = np.array([dv.sum()])
    dva2 = np.outer(dv, params.wv.ravel())
    dvz2 = dva2 * (vz2 > 0.0)
    grads["vw2"] = dvz2.T @ va1
    grads["vb2"] = dvz2.sum(axis=0)
    dva1 = dvz2 @ params.vw2
    dvz1 = dva1 * (vz1 > 0.0)
    grads["vw1"] = dvz1.T @ obs
    grads["vb1"] = dvz1.sum(axis=0)

    clip_gradients_(grads, config.max_grad_norm)
    return LossComponents(policy_loss, value_loss, ent, total), grads


def global_grad_norm(grads: dict[str, np.ndarray]) -> float:
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))


def clip_gradients_(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """In-place global-norm rescaling; returns the pre-clip norm."""
    norm = global_grad_norm(grads)
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def zeros_like(cls, params: MlpParams) -> "AdamState":
        return cls(
            m={k: np.zeros_like(a) for k, a in params.as_dict().items()},
            v={k: np.zeros_like(a) for k, a in params.as_dict().items()},
            step=0,
        )


def adam_step(
    params: MlpParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    config: A2CConfig,
) -> tuple[MlpParams, AdamState]:
    """One Adam update with bias correction. Mutates params and state in
    place and returns them; log_std is clamped to its legal range after
    the update."""
    b1, b2, eps, lr = config.adam_beta1, config.adam_beta2, config.adam_eps, config.learning_rate
    state.step += 1
    t = state.step
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    for name in PARAM_FIELDS:
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        theta = getattr(params, name)
        theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    np.clip(params.log_std, -20.0, 2.0, out=params.log_std)
    return params, state


@dataclass
class A2CModel:
    """A trained (or initializing) model: parameters, optimizer state, and
    the configuration needed to reproduce or resume it."""

    params: MlpParams
    adam: AdamState
    a2c_config: A2CConfig
    env_config: EnvConfig
    embed_dim: int


def train(
    env: SalesEnv,
    config: A2CConfig,
    hidden_dim: int = 64,
    progress: Callable[[int, float], None] | None = None,
) -> tuple[A2CModel, list[tuple[int, float]]]:
    """Run A2C until at least total_timesteps environment steps are
    consumed (the final rollout always completes, so up to n_steps - 1
    extra steps may be taken).

    Fully deterministic given the dataset bytes, the env config, and this
    config. Returns the model plus a (steps, mean episode reward) series
    sampled every 1000 steps up to total_timesteps; the mean covers
    episodes completed within each window and repeats the previous value
    when a window completes none.
    """
    dataset = env.dataset
    obs_dim = env.obs_dim
    params = init_params(obs_dim, config.seed, hidden_dim)
    adam = AdamState.zeros_like(params)
    action_rng = Xoshiro256StarStar(derive_seed(config.seed, 1))

    stats: list[tuple[int, float]] = []
    window_returns: list[float] = []
    last_mean = 0.0
    next_mark = REPORT_EVERY_STEPS

    state = env.reset()
    episode_return = 0.0
    steps_done = 0

    while steps_done < config.total_timesteps:
        obs_buf = np.empty((config.n_steps, obs_dim))
        act_buf = np.empty((config.n_steps, ACTION_DIM))
        rew_buf = np.empty(config.n_steps)
        done_buf = np.empty(config.n_steps)
        val_buf = np.empty(config.n_steps)
        logp_buf = np.empty(config.n_steps)

        for k in range(config.n_steps):
            obs = state.observation
            mean, log_std = forward_policy(params, obs)
            action_env, action_raw, log_prob = sample_action(mean, log_std, action_rng)
            value = forward_value(params, obs)
            result = env.step(action_env)

            obs_buf[k] = obs
            act_buf[k] = action_raw
            rew_buf[k] = result.reward
            done_buf[k] = 1.0 if result.done else 0.0
            val_buf[k] = value
            logp_buf[k] = log_prob

            episode_return += result.reward
            if result.done:
                window_returns.append(episode_return)
                episode_return = 0.0
                state = env.reset()
            else:
                state = result.next_state

            steps_done += 1
            if steps_done >= next_mark and next_mark <= config.total_timesteps:
                if window_returns:
                    last_mean = sum(window_returns) / len(window_returns)
                stats.append((next_mark, last_mean))
                window_returns = []
                next_mark += REPORT_EVERY_STEPS
                if progress is not None:
                    progress(steps_done, last_mean)

        bootstrap = forward_value(params, state.observation)
        buffer = RolloutBuffer(
            obs=obs_buf,
            actions_raw=act_buf,
            rewards=rew_buf,
            dones=done_buf,
            values=val_buf,
            log_probs=logp_buf,
            bootstrap_value=bootstrap,
        )
        try:
            _, grads = a2c_loss_and_grads(params, buffer, config)
        except NonFiniteLoss as exc:
            raise NonFiniteLoss(f"training diverged at step {steps_done}: {exc}") from exc
        adam_step(params, grads, adam, config)

    model = A2CModel(
        params=params,
        adam=adam,
        a2c_config=config,
        env_config=env.config,
        embed_dim=dataset.embed_dim,
    )
    return model, stats


# ---------------------------------------------------------------------------
# Evaluation helpers


def evaluate_policy(
    env: SalesEnv,
    act_fn: Callable[[np.ndarray], np.ndarray],
    episodes: int,
    seed: int,
) -> dict:
    """Roll `episodes` episodes with per-episode derived reset seeds and
    report mean episode reward, mean per-step shaping reward, and the
    terminal success rate."""
    total_reward = 0.0
    shaping_sum = 0.0
    steps = 0
    successes = 0
    for i in range(episodes):
        state = env.reset(seed=derive_seed(seed, i))
        done = False
        while not done:
            result = env.step(act_fn(state.observation))
            comp = result.reward_components
            total_reward += result.reward
            shaping_sum += comp.r_variety + comp.r_extremity
            steps += 1
            done = result.done
            if done and comp.r_outcome > 0:
                successes += 1
            state = result.next_state
    return {
        "mean_episode_reward": total_reward / episodes,
        "mean_shaping_reward_per_step": shaping_sum / steps,
        "success_rate": successes / episodes,
    }


def uniform_random_actor(seed: int) -> Callable[[np.ndarray], np.ndarray]:
    """Baseline actor: uniform actions in [0,1]^4 from a derived stream."""
    rng = Xoshiro256StarStar(derive_seed(seed, 1))

    def act(_obs: np.ndarray) -> np.ndarray:
        return np.array([rng.uniform() for _ in range(ACTION_DIM)])

    return act
