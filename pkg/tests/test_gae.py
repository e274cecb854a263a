import numpy as np
import pytest

from clca.a2c import compute_gae
from clca.errors import DimensionMismatch


def brute_force_gae(rewards, values, dones, bootstrap_value, gamma, lam):
    """O(n^2) expansion of the recursion: A_t = sum_k (gamma*lam)^(k-t) *
    delta_k over the steps up to and including the first done at or after t."""
    n = len(rewards)
    deltas = []
    for t in range(n):
        next_v = values[t + 1] if t + 1 < n else bootstrap_value
        deltas.append(rewards[t] + gamma * (1.0 - dones[t]) * next_v - values[t])
    adv = np.zeros(n)
    for t in range(n):
        acc, w = 0.0, 1.0
        for k in range(t, n):
            acc += w * deltas[k]
            if dones[k]:
                break
            w *= gamma * lam
        adv[t] = acc
    return adv


def _random_case(rng, n):
    return (
        rng.normal(size=n),
        rng.normal(size=n),
        (rng.random(size=n) < 0.15).astype(float),
        float(rng.normal()),
    )


def test_matches_brute_force_lambda_one():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        r, v, d, bv = _random_case(rng, 100)
        adv, ret = compute_gae(r, v, d, bv, gamma=0.99, lam=1.0)
        expected = brute_force_gae(r, v, d, bv, 0.99, 1.0)
        assert np.max(np.abs(adv - expected)) <= 1e-10
        assert np.array_equal(ret, adv + v)


@pytest.mark.parametrize("gamma,lam", [(0.9, 0.5), (1.0, 0.95), (0.5, 0.0), (0.99, 1.0)])
def test_matches_brute_force_other_settings(gamma, lam):
    rng = np.random.default_rng(7)
    for _ in range(20):
        r, v, d, bv = _random_case(rng, 40)
        adv, _ = compute_gae(r, v, d, bv, gamma, lam)
        assert np.max(np.abs(adv - brute_force_gae(r, v, d, bv, gamma, lam))) <= 1e-10


def test_lambda_zero_is_one_step_td():
    rng = np.random.default_rng(11)
    r, v, d, bv = _random_case(rng, 50)
    adv, ret = compute_gae(r, v, d, bv, gamma=0.99, lam=0.0)
    for t in range(50):
        next_v = v[t + 1] if t < 49 else bv
        delta = r[t] + 0.99 * (1.0 - d[t]) * next_v - v[t]
        assert adv[t] == delta  # exact, not approximate
    assert np.array_equal(ret, adv + v)


def test_terminals_block_credit_flow():
    r = np.array([1.0, 2.0, 3.0, 4.0])
    v = np.zeros(4)
    d = np.array([0.0, 1.0, 0.0, 0.0])
    adv1, _ = compute_gae(r, v, d, 10.0, gamma=0.9, lam=1.0)
    # nothing after the step-1 terminal may influence steps 0-1
    r2 = r.copy()
    r2[2:] = -99.0
    adv2, _ = compute_gae(r2, v, d, -55.0, gamma=0.9, lam=1.0)
    assert np.array_equal(adv1[:2], adv2[:2])
    # and the terminal step sees no bootstrap
    assert adv1[1] == 2.0


def test_all_done_reduces_to_reward_minus_value():
    r = np.array([1.0, -2.0, 0.5])
    v = np.array([0.25, 0.5, -1.0])
    adv, _ = compute_gae(r, v, np.ones(3), 99.0, gamma=0.99, lam=1.0)
    assert np.array_equal(adv, r - v)


def test_bootstrap_enters_final_delta():
    adv_a, _ = compute_gae([0.0], [0.0], [0.0], 1.0, gamma=0.5, lam=1.0)
    adv_b, _ = compute_gae([0.0], [0.0], [0.0], 3.0, gamma=0.5, lam=1.0)
    assert adv_a[0] == 0.5 and adv_b[0] == 1.5


def test_length_mismatch():
    with pytest.raises(DimensionMismatch):
        compute_gae([1.0, 2.0], [0.0], [0.0, 0.0], 0.0, 0.99, 1.0)
