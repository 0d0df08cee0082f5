"""Basis, series, and quadrature layer against independent oracles."""

import math

import numpy as np
import pytest
from scipy.special import eval_hermitenorm, factorial

from oulab.model import (
    AdaptiveSpec,
    GaussianModel,
    HermiteSeries,
    QuadratureGrid,
    hermite_eval,
    hermite_table,
    integrate,
    integrate_mc,
    multi_indices_up_to,
    orthonormal_axis_table,
    project,
    series_eval,
)


def test_hermite_matches_scipy():
    x = np.linspace(-6.0, 6.0, 41)
    for n in range(13):
        ours = hermite_eval(n, x)
        ref = eval_hermitenorm(n, x)
        assert np.max(np.abs(ours - ref)) <= 1e-10 * np.max(1.0 + np.abs(ref))


def test_hermite_table_stacks_evaluations():
    x = np.linspace(-3.0, 3.0, 11)
    tab = hermite_table(8, x)
    assert tab.shape == (11, 9)
    for n in range(9):
        assert np.allclose(tab[:, n], hermite_eval(n, x), atol=1e-12)


def test_orthonormal_table_scaling():
    # h_n(x) = He_n(x / sqrt(q)) / sqrt(n!) for axis variance q
    x = np.linspace(-2.0, 2.0, 7)
    q = 0.5
    tab = orthonormal_axis_table(x, 6, q)
    for n in range(7):
        ref = eval_hermitenorm(n, x / math.sqrt(q)) / math.sqrt(float(factorial(n)))
        assert np.allclose(tab[..., n], ref, atol=1e-12)


@pytest.mark.parametrize("model", [GaussianModel.standard(1),
                                   GaussianModel.general([0.7, 2.3])])
def test_basis_gram_identity(model):
    # pairwise integrals against m reproduce the identity matrix
    grid = QuadratureGrid.gauss_hermite(model, 24)
    nodes, weights = grid.tensor_nodes(), grid.tensor_weights()
    idx = multi_indices_up_to(model.d, 6)
    cols = []
    for a in idx:
        f = HermiteSeries(model, 6, {a: 1.0})
        cols.append(series_eval(f, nodes))
    B = np.stack(cols, axis=1)
    gram = B.T @ (weights[:, None] * B)
    assert np.max(np.abs(gram - np.eye(len(idx)))) <= 1e-10


def test_multi_index_count():
    # total-degree simplex size C(cap + d, d)
    assert len(multi_indices_up_to(3, 8)) == math.comb(11, 3)
    assert len(multi_indices_up_to(1, 5)) == 6
    assert multi_indices_up_to(2, 1) == [(0, 0), (0, 1), (1, 0)]


def test_series_eval_closed_forms():
    model = GaussianModel.standard(1)
    x = np.linspace(-3.0, 3.0, 9)
    h2 = HermiteSeries(model, 2, {(2,): 1.0})
    assert np.allclose(h2(x[:, None]), (x * x - 1.0) / math.sqrt(2.0), atol=1e-12)

    gen = GaussianModel.general([1.0])  # q = 1/2
    h1 = HermiteSeries(gen, 1, {(1,): 1.0})
    assert np.allclose(h1(x[:, None]), x / math.sqrt(0.5), atol=1e-12)


def test_series_l2_norm_is_parseval():
    model = GaussianModel.standard(2)
    f = HermiteSeries(model, 3, {(0, 0): 1.0, (1, 2): -2.0, (3, 0): 0.5})
    val = integrate(lambda x: f(x) ** 2, model,
                    QuadratureGrid.gauss_hermite(model, 16))
    assert abs(val - f.l2_norm() ** 2) <= 1e-10


def test_series_arithmetic_and_mean():
    model = GaussianModel.standard(1)
    f = HermiteSeries(model, 2, {(0,): 2.0, (2,): 1.0})
    g = HermiteSeries(model, 1, {(1,): 3.0})
    assert f.mean() == 2.0
    assert f.add(g).coeffs[(1,)] == 3.0
    assert f.sub(f).l2_norm() == 0.0
    assert f.scale(-1.0).coeffs[(2,)] == -1.0
    assert f.shift_mean(-2.0).mean() == 0.0
    doubled = f.map_coeffs(lambda a, c: 2.0 * c)
    assert doubled.coeffs == {(0,): 4.0, (2,): 2.0}


def test_projection_recovers_coefficients():
    model = GaussianModel.general([1.0, 3.0])
    f = HermiteSeries(model, 4, {(0, 0): 0.3, (1, 1): -1.2, (4, 0): 0.7})
    grid = QuadratureGrid.gauss_hermite(model, 20)
    g = project(lambda x: f(x), model, 4, grid)
    for a in multi_indices_up_to(2, 4):
        assert abs(g.coeffs.get(a, 0.0) - f.coeffs.get(a, 0.0)) <= 1e-10


def test_quadrature_moment_exactness():
    # order-n Gauss-Hermite integrates polynomials of degree 2n-1 exactly
    model = GaussianModel.general([0.5])  # q = 1
    grid = QuadratureGrid.gauss_hermite(model, 8)
    for (p, ref) in ((2, 1.0), (4, 3.0), (6, 15.0), (8, 105.0), (10, 945.0)):
        val = integrate(lambda x, p=p: x[..., 0] ** p, model, grid)
        assert abs(val - ref) <= 1e-12 * max(1.0, ref)


def test_adaptive_integration_handles_kinks():
    model = GaussianModel.standard(1)
    grid = QuadratureGrid(model, 64, AdaptiveSpec(singular_points=(0.0,)))
    val = integrate(lambda x: np.abs(x[..., 0]), model, grid)
    assert abs(val - math.sqrt(2.0 / math.pi)) <= 1e-10
    # plain tensor quadrature is visibly worse on the kink
    coarse = integrate(lambda x: np.abs(x[..., 0]), model)
    assert abs(coarse - math.sqrt(2.0 / math.pi)) > 1e-6


def test_mc_integration_tracks_quadrature():
    model = GaussianModel.standard(3)
    fn = lambda x: np.cos(x).sum(axis=-1)
    mean, se = integrate_mc(fn, model, 200_000, seed=4)
    exact = 3.0 * math.exp(-0.5)
    assert abs(mean - exact) <= 4.0 * se


def test_sampling_moments():
    model = GaussianModel.general([2.0])  # q = 0.25
    rng = np.random.default_rng(9)
    X = model.sample(200_000, rng)
    q = 0.25
    se_var = q * math.sqrt(2.0 / X.shape[0])
    assert abs(X.var() - q) <= 4.0 * se_var
    assert abs(X.mean()) <= 4.0 * math.sqrt(q / X.shape[0])


def test_model_validation():
    with pytest.raises(ValueError):
        GaussianModel.general([0.0])
    with pytest.raises(ValueError):
        GaussianModel.standard(0)
    model = GaussianModel.standard(1)
    with pytest.raises(ValueError):
        HermiteSeries(model, 2, {(3,): 1.0})  # exceeds cap
    with pytest.raises(ValueError):
        HermiteSeries(model, 2, {(0, 0): 1.0})  # wrong arity


def test_cm_norm_weights_axes():
    model = GaussianModel.general([1.0, 2.0])  # q = (1/2, 1/4)
    h = np.array([1.0, 1.0])
    assert abs(model.cm_norm_sq(h) - (2.0 + 4.0)) <= 1e-12
    assert abs(model.cm_norm(h) - math.sqrt(6.0)) <= 1e-12
