"""Maximal operators, the pair bound, and the Lipschitz approximation."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from oulab.lusin import (
    C_EMP_DEFAULT,
    C_NUM_DEFAULT,
    AnchorSet,
    TGrid,
    big_M,
    extension_lipschitz_ratio,
    hopf_max,
    lusin_approx,
    lusin_pair_check,
    lusin_sweep,
    mcshane_extend,
    weak11_check,
)
from oulab.mehler import smoothing_series_grid
from oulab.model import GaussianModel, HermiteSeries

M1 = GaussianModel.standard(1)
M2 = GaussianModel.standard(2)
GRID = TGrid(1e-3, 10.0, 16)


def test_tgrid_shape_and_nesting():
    g = TGrid(1e-3, 10.0, 16)
    v = g.values
    assert v[0] == 1e-3 and v[-1] == 10.0
    assert np.all(np.diff(v) > 0)
    # refinement produces an exact superset, so grid sups are monotone
    v2 = g.refined().values
    assert np.all(np.isin(v, v2))
    # also for a span that is not a whole number of decades
    g3 = TGrid(2e-2, 7.3, 16)
    assert np.all(np.isin(g3.values, g3.refined().values))
    assert g3.values[-1] == 7.3


def test_tgrid_validation_and_contains():
    with pytest.raises(ValueError):
        TGrid(0.0, 1.0)
    with pytest.raises(ValueError):
        TGrid(2.0, 1.0)
    with pytest.raises(ValueError):
        TGrid(1e-3, 10.0, per_decade=8)
    got = GRID.contains([1e-4, 1e-3, 0.5, 10.0, 11.0])
    assert list(got) == [False, True, True, True, False]


def test_hopf_max_constant_and_square():
    c = HermiteSeries(M1, 0, {(0,): 3.0})
    out = hopf_max(c, M1, np.array([[0.0], [2.0]]), GRID)
    assert np.allclose(out, 3.0, atol=1e-12)
    # x^2 at the origin: averages grow toward 1, sup sits at t_max
    xsq = HermiteSeries(M1, 2, {(0,): 1.0, (2,): math.sqrt(2.0)})
    tmax = GRID.values[-1]
    expect = 1.0 - (1.0 - math.exp(-2.0 * tmax)) / (2.0 * tmax)
    got = hopf_max(xsq, M1, np.array([[0.0]]), GRID)
    assert abs(got[0] - expect) <= 1e-10


def test_hopf_max_callable_route_matches_spectral():
    xsq = HermiteSeries(M1, 2, {(0,): 1.0, (2,): math.sqrt(2.0)})
    X = np.array([[0.0], [0.7], [-1.3]])
    spec = hopf_max(xsq, M1, X, GRID)
    call = hopf_max(lambda P: P[:, 0] ** 2, M1, X, GRID)
    assert np.max(np.abs(call - spec) / spec) <= 2e-3
    with pytest.raises(TypeError):
        hopf_max(3.0, M1, X, GRID)


def test_hopf_max_monotone_under_refinement():
    rng = np.random.default_rng(3)
    f = HermiteSeries(M1, 3, {(0,): 1.2, (1,): 0.5, (3,): 0.2})
    fsq = f.map_coeffs(lambda a, c: c)  # copy; evaluated as series (signed ok spectrally)
    X = M1.sample(50, rng)
    base = hopf_max(lambda P: np.abs(fsq(P)), M1, X, GRID)
    fine = hopf_max(lambda P: np.abs(fsq(P)), M1, X, GRID.refined())
    assert np.all(fine >= base - 1e-12)


def test_weak11_matrix():
    xsq = HermiteSeries(M1, 2, {(0,): 1.0, (2,): math.sqrt(2.0)})
    lam = np.array([0.5, 1.0, 2.0, 4.0])
    res = weak11_check(xsq, M1, lam, GRID, samples=20_000, seed=4)
    assert res.lhs.shape == (4,)
    assert np.all(res.lhs <= res.rhs + 3.0 * res.stderr)
    assert np.all(np.abs(res.lhs_refined - res.lhs) <= 3.0 * res.stderr + 1e-12)
    assert np.all(np.diff(res.lhs) <= 0)  # exceedance falls as lam grows
    with pytest.raises(ValueError):
        weak11_check(xsq, M1, [0.0], GRID)


def test_big_m_is_sum_of_its_summands():
    from oulab.spectral import gradient
    h1 = HermiteSeries(M1, 1, {(1,): 1.0})
    X = np.array([[0.0], [0.7], [-1.3]])
    total = big_M(h1, GRID, X)
    first = smoothing_series_grid([h1], M1, GRID.values, X, order=16,
                                  combine="abs", u_per_decade=32).max(axis=0)
    second = smoothing_series_grid(gradient(h1), M1, GRID.values, X, order=16,
                                   combine="norm", u_per_decade=32).max(axis=0)
    assert np.max(np.abs(total - first - second)) <= 1e-12
    # grad h1 = 1: the average of a constant carries only the log-trapezoid
    # bias, which shrinks quadratically with the u resolution
    assert np.max(np.abs(second - 1.0)) <= 2e-3
    finer = smoothing_series_grid(gradient(h1), M1, GRID.values, X, order=16,
                                  combine="norm", u_per_decade=128).max(axis=0)
    assert np.max(np.abs(finer - 1.0)) <= 2e-3 / 10.0


def test_big_m_first_term_converges_to_closed_form():
    # at x = 0 the sup of the |x| averages sits at t_max:
    # (1/t) int_t^2t sqrt(1 - e^{-2s}) ds * sqrt(2/pi)
    h1 = HermiteSeries(M1, 1, {(1,): 1.0})
    tmax = GRID.values[-1]
    exact = (quad(lambda s: math.sqrt(1.0 - math.exp(-2.0 * s)), tmax,
                  2.0 * tmax)[0] / tmax) * math.sqrt(2.0 / math.pi)
    errs = []
    for order in (16, 64, 128):
        got = smoothing_series_grid([h1], M1, GRID.values, np.array([[0.0]]),
                                    order=order, combine="abs",
                                    u_per_decade=64).max(axis=0)[0]
        errs.append(abs(got - exact))
    assert errs[2] <= 3e-3        # quadrature kink error, shrinking in order
    assert errs[0] > errs[1] > errs[2]


def test_small_time_average_recovers_gradient_modulus():
    rng = np.random.default_rng(6)
    f = HermiteSeries(M2, 3, {(1, 0): 1.0, (0, 2): 0.4, (2, 1): -0.3})
    from oulab.spectral import gradient
    grads = gradient(f)
    X = M2.sample(10, rng)
    tiny = smoothing_series_grid(grads, M2, np.array([1e-4]), X, order=32,
                                 combine="norm", u_per_decade=64)[0]
    direct = np.sqrt(sum(np.asarray(g(X)) ** 2 for g in grads))
    assert np.max(np.abs(tiny - direct) / np.maximum(direct, 1e-12)) <= 1e-3


def test_pair_check_first_mode():
    h1 = HermiteSeries(M1, 1, {(1,): 1.0})
    X0 = np.array([[0.0], [1.0]])
    X1 = np.array([[0.5], [1.2]])
    res = lusin_pair_check(h1, X0, X1, GRID)
    # M >= A|grad| = 1 at both ends and c_num > 1, so the bound is strict
    assert np.all(res.slack > 0)
    assert np.allclose(res.t_star, [0.25, 0.04], atol=1e-12)
    assert res.conclusive.all()
    far = lusin_pair_check(h1, np.array([[0.0]]), np.array([[5.0]]), GRID)
    assert not far.conclusive[0]  # t_star = 25 beyond t_max


def test_mcshane_extension():
    anchors = AnchorSet(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]),
                        lam=1.0, model=M1)
    g = mcshane_extend(anchors, np.array([[0.5], [0.0], [1.0], [2.0], [-1.0]]))
    # min-form extension: rises at rate lam away from the nearest anchor
    assert np.allclose(g, [0.5, 0.0, 1.0, 2.0, 1.0], atol=1e-14)
    rng = np.random.default_rng(7)
    X0 = M1.sample(2000, rng)
    X1 = M1.sample(2000, rng)
    ratio = extension_lipschitz_ratio(anchors, X0, X1)
    assert ratio <= 1.0 + 1e-12
    # the slope is attained between the anchors
    assert ratio >= 1.0 - 1e-9


def test_lusin_approx_report():
    f = HermiteSeries(M1, 2, {(1,): 1.0, (2,): 1.0})
    rep = lusin_approx(f, 0.2, GRID, samples=4000, anchor_cap=400, seed=5)
    assert rep.lam_used == pytest.approx(C_EMP_DEFAULT * rep.norm_sum / 0.2)
    assert rep.threshold == pytest.approx(rep.lam_used / C_NUM_DEFAULT)
    assert rep.complement_mass <= 0.2 + 3.0 * rep.complement_stderr
    assert rep.anchors.lam == rep.lam_used
    # extension interpolates the anchor values
    vals = mcshane_extend(rep.anchors, rep.anchors.points)
    assert np.max(np.abs(vals - rep.anchors.values)) <= 1e-10
    # and is exactly lam-Lipschitz on fresh pairs
    rng = np.random.default_rng(8)
    ratio = extension_lipschitz_ratio(rep.anchors, M1.sample(500, rng),
                                      M1.sample(500, rng))
    assert ratio <= 1.0 + 1e-12


def test_lusin_sweep_lambda_scaling():
    f = HermiteSeries(M1, 2, {(1,): 1.0, (2,): 1.0})
    reps = lusin_sweep(f, [0.2, 0.1], GRID, samples=2000, anchor_cap=200, seed=9)
    assert reps[1].lam_used == pytest.approx(2.0 * reps[0].lam_used, rel=1e-12)
    assert reps[0].eps == 0.2 and reps[1].eps == 0.1


def test_lusin_validation():
    f = HermiteSeries(M1, 2, {(1,): 1.0, (2,): 1.0})
    with pytest.raises(ValueError):
        lusin_approx(f, 0.0, GRID, samples=100)
    with pytest.raises(ValueError):
        lusin_approx(f, 1.0, GRID, samples=100)
    const = HermiteSeries(M1, 0, {(0,): 2.0})
    with pytest.raises(ValueError):
        lusin_approx(const, 0.1, GRID, samples=100)
    # a threshold below every sampled maximal value leaves no good set
    with pytest.raises(ValueError):
        lusin_approx(f, 0.1, GRID, samples=100, c_num=1e12, c_emp=1.0)
