import itertools
import math

import numpy as np
import pytest

import iqpmmd
from iqpmmd import ModelKind


def two_local(n):
    return [[i] for i in range(n)] + [list(p) for p in itertools.combinations(range(n), 2)]



def test_single_qubit_expectation():
    g = iqpmmd.GateSet(1, [[0]])
    vals, se = iqpmmd.expval_estimate(g, [0.3], np.array([[1]]), iqpmmd.sample_uniform(1, 50, 1))
    assert vals[0] == pytest.approx(math.cos(0.6), abs=1e-14)
    assert se[0] < 1e-12


def test_estimate_matches_exact():
    rng = np.random.default_rng(0)
    n = 5
    g = iqpmmd.GateSet(n, two_local(n))
    theta = rng.uniform(0, 2 * np.pi, len(g))
    obs = rng.integers(0, 2, size=(20, n), dtype=np.uint8)
    vals, se = iqpmmd.expval_estimate(g, theta, obs, iqpmmd.sample_uniform(n, 20000, 3))
    exact = iqpmmd.exact_expvals(g, theta, obs)
    assert np.all(np.abs(vals - exact) <= 5 * se + 1e-12)


def test_probabilities_and_parities_agree():
    rng = np.random.default_rng(1)
    n = 4
    g = iqpmmd.GateSet(n, two_local(n))
    theta = rng.uniform(0, 2 * np.pi, len(g))
    obs = rng.integers(0, 2, size=(10, n), dtype=np.uint8)
    for kind in (ModelKind.IQP, ModelKind.BITFLIP, ModelKind.IQP_SYMMETRIZED):
        p = iqpmmd.exact_probabilities(g, theta, kind)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        masks = obs.astype(np.int64)
        idx = np.arange(2**n)
        bits = (idx[:, None] >> np.arange(n)) & 1
        signs = (-1.0) ** ((bits @ masks.T) % 2)
        assert np.allclose(p @ signs, iqpmmd.exact_expvals(g, theta, obs, kind), atol=1e-12)
    assert np.allclose(iqpmmd.expval_bitflip(g, theta, obs), iqpmmd.exact_expvals(g, theta, obs, ModelKind.BITFLIP))


def test_bandwidth_mapping():
    s = iqpmmd.sigma_for_weight(16, 2.0)
    assert round(s, 1) == 1.3
    assert 16 * iqpmmd.bernoulli_p(s) == pytest.approx(2.0, rel=1e-10)


def test_loss_gradient_and_training():
    n = 6
    patterns = np.array([[1, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 1]], dtype=np.uint8)
    data = iqpmmd.gen_blobs(patterns, 0.05, 500, 7)
    assert data.shape == (500, n)
    g = iqpmmd.GateSet(n, two_local(n))
    start = iqpmmd.init_params_datadep(g, data, seed=1)
    a = iqpmmd.sample_observables(n, 1.0, 64, 2)
    z = iqpmmd.sample_uniform(n, 64, 3)
    loss, grad = iqpmmd.loss_and_grad(g, start, data, a, z)
    h = 1e-5
    j = int(np.argmax(np.abs(grad)))
    up, down = start.copy(), start.copy()
    up[j] += h
    down[j] -= h
    fd = (iqpmmd.mmd2_unbiased(g, up, data, a, z)[0] - iqpmmd.mmd2_unbiased(g, down, data, a, z)[0]) / (2 * h)
    assert fd == pytest.approx(grad[j], rel=1e-4)
    assert loss == pytest.approx(iqpmmd.mmd2_unbiased(g, start, data, a, z)[0], abs=1e-15)

    params, losses = iqpmmd.train(g, data, start, [1.0], steps=100, learning_rate=0.05, batch_a=100, batch_z=100,
                                  seed=4)
    assert len(losses) == 100
    assert np.mean(losses[-20:]) < np.mean(losses[:20])
    samples = iqpmmd.sample(g, params, ModelKind.IQP, 2000, 5)
    assert samples.shape == (2000, n)
    res = iqpmmd.test_mmd(g, params, ModelKind.IQP, data, [1.0], repetitions=3, batch_a=200, batch_z=200)
    assert len(res) == 1 and res[0][0] == 1.0


def test_kgel_self_consistent():
    rows = iqpmmd.sample_uniform(6, 30, 1)
    wit = rows[:3]
    d = np.array([[np.sum(r != w) for w in wit] for r in rows])
    rhs = np.exp(-d / 2.0).mean(axis=0)
    sol = iqpmmd.kgel_solve(rows, wit, 1.0, list(rhs))
    assert sol["feasible"]
    assert sol["kl"] < 1e-8
    assert np.allclose(sol["pi"], 1 / 30, atol=1e-8)


def test_errors_raise():
    with pytest.raises(ValueError):
        iqpmmd.GateSet(3, [[0], [0]])
    with pytest.raises(ValueError):
        iqpmmd.exact_probabilities(iqpmmd.GateSet(3, [[0]]), [0.1], ModelKind.IQP, 2)
    with pytest.raises(ValueError):
        iqpmmd.sigma_for_weight(4, 3.0)
