"""Pointwise Mehler evaluation against the spectral route, and the
pointwise inequalities on random inputs."""

import math

import numpy as np
import pytest

from oulab.mehler import (
    PointwiseFunction,
    gauss_legendre_01,
    lipschitz_bound_slacks,
    log_convexity_slacks,
    mehler_apply,
    mehler_apply_batch,
    mehler_apply_mc,
    semigroup_series_grid,
    smoothing_apply_batch,
    smoothing_log_convexity_slacks,
    smoothing_series_grid,
)
from oulab.model import GaussianModel, HermiteSeries
from oulab.spectral import apply, gradient, semigroup, smoothing

STANDARD = GaussianModel.standard(2)
GENERAL = GaussianModel.general([1.0, 2.5])


def _random_series(model, rng, modes=5, cap=4):
    from oulab.model import multi_indices_up_to
    idx = multi_indices_up_to(model.d, cap)[1:]
    picks = rng.choice(len(idx), size=min(modes, len(idx)), replace=False)
    return HermiteSeries(model, cap, {tuple(idx[k]): float(rng.normal())
                                      for k in picks})


def test_mass_conservation_and_positivity():
    X = np.array([[0.0, 0.0], [1.5, -2.0], [4.0, 4.0]])
    ones = mehler_apply_batch(lambda P: np.ones(len(P)), STANDARD, 0.7, X)
    assert np.max(np.abs(ones - 1.0)) <= 1e-12
    vals = mehler_apply_batch(lambda P: P[:, 0] ** 2, STANDARD, 0.7, X)
    assert np.min(vals) >= 0.0


def test_zero_time_is_identity_and_negative_raises():
    X = np.array([[0.3, -1.2]])
    got = mehler_apply_batch(lambda P: np.cos(P[:, 0]) + P[:, 1], STANDARD, 0.0, X)
    assert got[0] == math.cos(0.3) - 1.2
    with pytest.raises(ValueError):
        mehler_apply_batch(lambda P: np.ones(len(P)), STANDARD, -0.1, X)
    with pytest.raises(ValueError):
        smoothing_apply_batch(lambda P: np.ones(len(P)), STANDARD, 0.0, X)


def test_dimension_guard():
    model = GaussianModel.standard(4)
    with pytest.raises(ValueError):
        mehler_apply_batch(lambda P: np.ones(len(P)), model, 1.0, np.zeros((1, 4)))


@pytest.mark.parametrize("model", [STANDARD, GENERAL])
@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_semigroup_matches_spectral(model, t):
    rng = np.random.default_rng(5)
    f = _random_series(model, rng)
    X = model.sample(20, rng)
    ours = mehler_apply_batch(f, model, t, X)
    exact = apply(f, semigroup(t))(X)
    assert np.max(np.abs(ours - exact)) <= 1e-7


@pytest.mark.parametrize("model", [STANDARD, GENERAL])
def test_smoothing_matches_spectral(model):
    rng = np.random.default_rng(6)
    f = _random_series(model, rng)
    X = model.sample(12, rng)
    for t in (0.1, 1.0, 10.0):
        ours = smoothing_apply_batch(f, model, t, X)
        exact = apply(f, smoothing(t))(X)
        assert np.max(np.abs(ours - exact)) <= 1e-7


def test_monte_carlo_agrees_within_errorbars():
    rng = np.random.default_rng(7)
    f = _random_series(STANDARD, rng, modes=3, cap=3)
    x = np.array([0.4, -1.1])
    exact = float(apply(f, semigroup(0.8))(x[None, :])[0])
    mean, se = mehler_apply_mc(f, STANDARD, 0.8, x, samples=200_000, seed=11)
    assert se > 0.0
    assert abs(mean - exact) <= 4.0 * se
    # high-d dispatch goes through the MC path
    model4 = GaussianModel.standard(4)
    g = HermiteSeries(model4, 1, {(1, 0, 0, 0): 2.0})
    val = mehler_apply(g, model4, 1.0, np.zeros(4), samples=50_000, seed=3)
    assert abs(val) <= 0.05  # exact answer 0, spread ~2 e^{-1}/sqrt(n)


def test_series_grid_matches_naive_batch():
    rng = np.random.default_rng(8)
    f = _random_series(STANDARD, rng)
    X = STANDARD.sample(9, rng)
    u_values = np.array([0.05, 0.3, 1.0, 2.0])
    fast = semigroup_series_grid([f], STANDARD, u_values, X, order=24,
                                 combine="abs")
    for i, u in enumerate(u_values):
        naive = mehler_apply_batch(lambda P: np.abs(f(P)), STANDARD, float(u),
                                   X, order=24)
        assert np.max(np.abs(fast[i] - naive)) <= 1e-11

    grads = gradient(f)
    fastn = semigroup_series_grid(grads, STANDARD, u_values, X, order=24,
                                  combine="norm")

    def gradnorm(P):
        return np.sqrt(sum(np.asarray(g(P)) ** 2 for g in grads))

    for i, u in enumerate(u_values):
        naive = mehler_apply_batch(gradnorm, STANDARD, float(u), X, order=24)
        assert np.max(np.abs(fastn[i] - naive)) <= 1e-11


def test_smoothing_series_grid_matches_quadrature_average():
    rng = np.random.default_rng(9)
    f = _random_series(STANDARD, rng)
    X = STANDARD.sample(6, rng)
    s_values = np.array([0.2, 1.0, 3.0])
    grid = smoothing_series_grid([f], STANDARD, s_values, X, order=24,
                                 u_per_decade=256)
    for i, s in enumerate(s_values):
        naive = smoothing_apply_batch(lambda P: np.abs(f(P)), STANDARD,
                                      float(s), X, order=24)
        rel = np.max(np.abs(grid[i] - naive)) / max(np.max(np.abs(naive)), 1e-12)
        assert rel <= 1e-3


def test_gauss_legendre_unit_interval_exactness():
    u, w = gauss_legendre_01(16)
    assert abs(w.sum() - 1.0) <= 1e-14
    for k in range(0, 31):
        assert abs(w @ u ** k - 1.0 / (k + 1)) <= 1e-12


def test_log_convexity_slacks_nonnegative():
    rng = np.random.default_rng(10)
    g = PointwiseFunction("gauss-bump",
                          lambda P: np.exp(-0.25 * (P ** 2).sum(axis=1)),
                          nonneg=True)
    X0 = STANDARD.sample(200, rng)
    X1 = STANDARD.sample(200, rng)
    S = rng.uniform(0.05, 0.95, size=200)
    slacks = log_convexity_slacks(g, STANDARD, 0.7, X0, X1, S)
    assert float(np.min(slacks)) >= -1e-8
    # s = 0 collapses the bound to an identity
    ends = log_convexity_slacks(g, STANDARD, 0.7, X0[:5], X1[:5], np.zeros(5))
    assert np.max(np.abs(ends)) <= 1e-12


def test_smoothing_log_convexity_slacks_nonnegative():
    rng = np.random.default_rng(11)
    g = PointwiseFunction("shifted-square",
                          lambda P: (P[:, 0] - 1.0) ** 2 + 0.1, nonneg=True)
    X0 = STANDARD.sample(100, rng)
    X1 = STANDARD.sample(100, rng)
    S = rng.uniform(0.0, 1.0, size=100)
    slacks = smoothing_log_convexity_slacks(g, STANDARD, 0.4, X0, X1, S)
    assert float(np.min(slacks)) >= -1e-8


def test_log_convexity_guards():
    g = PointwiseFunction("signed", lambda P: P[:, 0], nonneg=False)
    with pytest.raises(ValueError):
        log_convexity_slacks(g, STANDARD, 1.0, [[0.0, 0.0]], [[1.0, 0.0]], [0.5])
    gpos = PointwiseFunction("pos", lambda P: np.ones(len(P)), nonneg=True)
    with pytest.raises(ValueError):
        log_convexity_slacks(gpos, GENERAL, 1.0, [[0.0, 0.0]], [[1.0, 0.0]], [0.5])


def test_lipschitz_bound_slacks_nonnegative():
    rng = np.random.default_rng(12)
    f = _random_series(STANDARD, rng, modes=6, cap=5)
    X0 = STANDARD.sample(150, rng)
    X1 = STANDARD.sample(150, rng)
    for t in (0.25, 1.0, 4.0):
        slacks = lipschitz_bound_slacks(f, t, X0, X1)
        assert float(np.min(slacks)) >= -1e-9
    # coincident endpoints: both sides vanish
    same = lipschitz_bound_slacks(f, 1.0, X0[:4], X0[:4])
    assert np.max(np.abs(same)) <= 1e-12
    with pytest.raises(ValueError):
        g = _random_series(GENERAL, rng)
        lipschitz_bound_slacks(g, 1.0, X0[:2], X1[:2])
