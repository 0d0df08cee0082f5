"""Path-sampling oracles: hitting law, occupation identity, stopped
martingales, subordination."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from oulab.mc import (
    PathConfig,
    hitting_cdf,
    martingale_moment_check,
    occupation_check,
    sample_hitting,
    sample_ou,
    subordination_check,
    subordinator_density,
    vector_moment_check,
)
from oulab.model import GaussianModel, HermiteSeries

M1 = GaussianModel.standard(1)


def test_path_config_validation():
    with pytest.raises(ValueError):
        PathConfig(dt=0.02)          # too coarse for the bridge correction
    with pytest.raises(ValueError):
        PathConfig(dt=0.0)
    with pytest.raises(ValueError):
        PathConfig(paths=0)
    with pytest.raises(ValueError):
        PathConfig(start_level=13.0, jump_level=12.0)
    with pytest.raises(ValueError):
        PathConfig(t_max=-1.0)


def test_hitting_cdf_closed_form():
    assert hitting_cdf(1.0, 0.0) == 0.0
    assert hitting_cdf(1.0, 1.0) == pytest.approx(math.erfc(0.5), abs=1e-15)
    arr = hitting_cdf(2.0, np.array([0.25, 1.0, 100.0]))
    assert arr.shape == (3,)
    assert np.all(np.diff(arr) > 0)
    assert arr[-1] == pytest.approx(math.erfc(0.1), abs=1e-15)


def test_sample_hitting_matches_law():
    cfg = PathConfig(dt=1e-3, t_max=4.0, paths=20_000, seed=23)
    hs = sample_hitting(cfg)
    assert hs.tau.shape == (20_000,)
    # censored paths carry tau = t_max, so compare strictly inside the horizon
    for t in (0.5, 1.0, 2.0):
        emp = float((hs.tau <= t).mean())
        exact = hitting_cdf(cfg.start_level, t)
        se = math.sqrt(exact * (1.0 - exact) / cfg.paths)
        assert abs(emp - exact) <= 4.0 * se
    assert hs.censored.mean() == pytest.approx(1.0 - hitting_cdf(1.0, 4.0),
                                               abs=0.02)


def test_bridge_correction_removes_crossing_bias():
    # without the correction the discrete walk misses within-step crossings
    # and the hitting probability is biased low; coarse dt makes it visible
    cfg = PathConfig(dt=1e-2, t_max=1.0, paths=20_000, seed=24)
    with_b = sample_hitting(cfg, bridge=True)
    without = sample_hitting(cfg, bridge=False)
    exact = hitting_cdf(1.0, 0.5)
    err_with = abs(float((with_b.tau <= 0.5).mean()) - exact)
    err_without = abs(float((without.tau <= 0.5).mean()) - exact)
    assert float((without.tau <= 0.5).mean()) < float((with_b.tau <= 0.5).mean())
    assert err_without > 2.0 * err_with


def test_sample_ou_stationarity_and_autocorrelation():
    model = GaussianModel.general([0.5, 2.0])
    rng = np.random.default_rng(25)
    X = model.sample(100_000, rng)
    Y, noise = sample_ou(model, X, 0.3, rng)
    q = model.variances
    for j in range(2):
        assert abs(Y[:, j].var() - q[j]) <= 4.0 * q[j] / math.sqrt(X.shape[0] / 2)
        corr = (X[:, j] * Y[:, j]).mean()
        expect = q[j] * math.exp(-model.rates[j] * 0.3)
        assert abs(corr - expect) <= 0.02
    # noise is the independent part of the step
    assert abs((X[:, 0] * noise[:, 0]).mean()) <= 0.02


def test_occupation_identity_small_run():
    cfg = PathConfig(dt=4e-3, paths=5_000, seed=22)

    def zeta(a, x):
        return np.exp(-a) * np.ones(np.atleast_2d(x).shape[0])

    res = occupation_check(zeta, M1, cfg)
    assert not res.diverged
    assert res.rhs == pytest.approx(1.0 - math.exp(-1.0), abs=1e-10)
    gap = abs(res.lhs.mean - res.rhs)
    assert gap <= 4.0 * res.lhs.stderr + res.bias_bound
    assert res.bias_bound < 1e-4


def test_occupation_flat_profile_reports_divergence():
    cfg = PathConfig(dt=4e-3, paths=200, seed=26)

    def flat(a, x):
        return np.ones(np.atleast_2d(x).shape[0])

    res = occupation_check(flat, M1, cfg)
    assert res.diverged
    assert math.isinf(res.rhs)


def test_martingale_moments_first_mode():
    h1 = HermiteSeries(M1, 1, {(1,): 1.0})
    cfg = PathConfig(dt=4e-3, paths=5_000, seed=21, start_level=1.0,
                     jump_level=8.0)
    res = martingale_moment_check(h1, 0.5, cfg)
    kappa = math.sqrt(1.5)
    assert res.level_pred == pytest.approx(0.5 * (1.0 - math.exp(-2.0 * kappa)),
                                           abs=1e-12)
    assert res.space_pred == pytest.approx(res.level_pred / 1.5, abs=1e-12)
    assert abs(res.level.mean - res.level_pred) <= 4.0 * res.level.stderr
    assert abs(res.space.mean - res.space_pred) <= 4.0 * res.space.stderr
    # optional stopping: both first moments vanish
    assert abs(res.level_first.mean) <= 4.0 * res.level_first.stderr
    assert abs(res.space_first.mean) <= 4.0 * res.space_first.stderr
    # infinite-level limits and the skipped-tail bias bounds
    assert res.level_limit == 0.5
    assert res.space_limit == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert 0.0 < res.level_bias < 1e-6
    assert 0.0 < res.space_bias < 1e-6
    with pytest.raises(ValueError):
        martingale_moment_check(h1, -0.5, cfg)


def test_vector_moment_check_sums_parts():
    model = GaussianModel.standard(2)
    g1 = HermiteSeries(model, 1, {(1, 0): 1.0})
    g2 = HermiteSeries(model, 1, {(0, 1): 1.0})
    cfg = PathConfig(dt=5e-3, paths=2_000, seed=27)
    res = vector_moment_check([g1, g2], 0.0, cfg)
    assert len(res.parts) == 2
    assert res.total.mean == pytest.approx(sum(p.level.mean for p in res.parts),
                                           rel=1e-12)
    assert res.prediction == pytest.approx(sum(p.level_pred for p in res.parts),
                                           rel=1e-12)
    assert res.limit == pytest.approx(0.5 * 2.0, abs=1e-12)
    assert abs(res.total.mean - res.prediction) <= 4.0 * res.total.stderr
    with pytest.raises(ValueError):
        vector_moment_check([], 0.0, cfg)


def test_subordinator_density_and_identity():
    assert subordinator_density(-1.0) == 0.0
    assert subordinator_density(0.0) == 0.0
    mass = quad(subordinator_density, 0.0, 1.0, limit=200)[0] \
        + quad(subordinator_density, 1.0, np.inf, limit=200)[0]
    assert abs(mass - 1.0) <= 1e-10
    res = subordination_check()
    assert abs(res.mass_residual) <= 1e-10
    assert res.residuals.shape == (3, 3)
    assert float(np.max(res.residuals)) <= 1e-8
