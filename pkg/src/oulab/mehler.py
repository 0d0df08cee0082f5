"""Pointwise semigroup evaluation by the Mehler formula, and the pointwise
inequalities that ride on it.

For the diagonal model the OU semigroup acts on any bounded measurable fn by

    T_t fn(x) = E[ fn(e^{-Lambda t} x + Sigma(t) Z) ],      Z ~ N(0, I_d),

with Lambda = diag(lambda_i) and Sigma(t) = diag(sqrt(q_i (1 - e^{-2 lambda_i t}))).
The expectation is computed by tensor Gauss-Hermite quadrature for d <= 3 and
by seeded Monte Carlo above that.  The smoothing operator

    A_t fn(x) = (1/t) * integral of T_s fn(x) over s in [t, 2t]

uses a 32-point Gauss-Legendre rule in s.

``semigroup_series_grid`` is the batched engine used by the maximal-function
and rate-bound checks: it evaluates T_u g(x_p) on a whole grid of times u and
points x_p at once, where g is |series| or the Euclidean modulus of a series
gradient.  It exploits the product structure of the quadrature: the
coordinate at axis i depends only on that axis' node index, so the series can
be contracted axis by axis instead of evaluated at all order^d tensor points
per (u, p) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import (
    GaussianModel,
    HermiteSeries,
    _gauss_hermite_nodes,
    orthonormal_axis_table,
)
from .spectral import apply, gradient, smoothing

__all__ = [
    "PointwiseFunction",
    "mehler_apply",
    "mehler_apply_batch",
    "mehler_apply_mc",
    "smoothing_apply",
    "smoothing_apply_batch",
    "semigroup_series_grid",
    "smoothing_series_grid",
    "gauss_legendre_01",
    "log_convexity_check",
    "log_convexity_slacks",
    "smoothing_log_convexity_check",
    "smoothing_log_convexity_slacks",
    "lipschitz_bound_check",
    "lipschitz_bound_slacks",
]

_CHUNK_BUDGET = 1 << 22  # max doubles in one (points x tensor-nodes) work array


@dataclass(frozen=True)
class PointwiseFunction:
    """A plain pointwise map (N, d) -> (N,) with metadata the checks rely on."""

    name: str
    fn: Callable
    nonneg: bool = False

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)


def _mehler_coeffs(model: GaussianModel, t: float):
    lam = model.rates
    q = model.variances
    decay = np.exp(-lam * t)
    sigma = np.sqrt(q * (-np.expm1(-2.0 * lam * t)))
    return decay, sigma


def mehler_apply_batch(fn: Callable, model: GaussianModel, t: float, X,
                       order: int = 32) -> np.ndarray:
    """T_t fn at each row of X, by tensor Gauss-Hermite quadrature (d <= 3)."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = model.d
    if d > 3:
        raise ValueError("tensor quadrature limited to d <= 3; use mehler_apply_mc")
    if t == 0.0:
        return np.asarray(fn(X), dtype=float)
    z, w = _gauss_hermite_nodes(order)
    grids = np.meshgrid(*([z] * d), indexing="ij")
    Y = np.stack([g.ravel() for g in grids], axis=-1)       # (K, d) standard normal nodes
    W = w
    for _ in range(d - 1):
        W = np.multiply.outer(W, w).ravel()
    decay, sigma = _mehler_coeffs(model, t)
    out = np.empty(X.shape[0])
    step = max(1, _CHUNK_BUDGET // (Y.shape[0] * d))
    for lo in range(0, X.shape[0], step):
        xb = X[lo:lo + step]
        pts = xb[:, None, :] * decay + sigma * Y[None, :, :]
        vals = np.asarray(fn(pts.reshape(-1, d)), dtype=float).reshape(xb.shape[0], -1)
        out[lo:lo + step] = vals @ W
    return out


def mehler_apply_mc(fn: Callable, model: GaussianModel, t: float, x,
                    samples: int = 100_000, seed: int = 0):
    """T_t fn(x) by seeded Monte Carlo; returns (mean, standard error)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    decay, sigma = _mehler_coeffs(model, t)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x6D65])))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        take = min(131_072, samples - done)
        pts = decay * x + sigma * rng.standard_normal((take, model.d))
        vals = np.asarray(fn(pts), dtype=float)
        total += vals.sum()
        total_sq += (vals * vals).sum()
        done += take
    mean = total / done
    var = max(total_sq / done - mean * mean, 0.0)
    return mean, math.sqrt(var / done)


def mehler_apply(fn: Callable, model: GaussianModel, t: float, x,
                 order: int = 32, samples: int = 100_000, seed: int = 0) -> float:
    """T_t fn(x) at a single point; quadrature for d <= 3, seeded MC above."""
    if model.d <= 3:
        return float(mehler_apply_batch(fn, model, t, np.asarray(x).reshape(1, -1), order)[0])
    return mehler_apply_mc(fn, model, t, x, samples, seed)[0]


# ---------------------------------------------------------------------------
# Smoothing operator: s-average of the semigroup over [t, 2t]


def gauss_legendre_01(n: int = 32):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    z, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (z + 1.0), 0.5 * w


def smoothing_apply_batch(fn: Callable, model: GaussianModel, t: float, X,
                          order: int = 32, s_nodes: int = 32) -> np.ndarray:
    """A_t fn at each row of X: Gauss-Legendre in s over [t, 2t], Mehler in space."""
    if t <= 0:
        raise ValueError("smoothing time must be positive")
    u, w = gauss_legendre_01(s_nodes)
    ss = t * (1.0 + u)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    acc = np.zeros(X.shape[0])
    for s, ws in zip(ss, w):
        acc += ws * mehler_apply_batch(fn, model, s, X, order)
    return acc


def smoothing_apply(fn: Callable, model: GaussianModel, t: float, x,
                    order: int = 32, s_nodes: int = 32) -> float:
    return float(smoothing_apply_batch(fn, model, t, np.asarray(x).reshape(1, -1),
                                       order, s_nodes)[0])


# ---------------------------------------------------------------------------
# Batched series engine


def _dense_cube(f: HermiteSeries, deg: int) -> np.ndarray:
    d = f.model.d
    C = np.zeros((deg + 1,) * d)
    for alpha, c in f.coeffs.items():
        C[alpha] = c
    return C


def semigroup_series_grid(series_list: Sequence[HermiteSeries], model: GaussianModel,
                          u_values, X, order: int = 16,
                          combine: str = "abs") -> np.ndarray:
    """F[j, p] = T_{u_j} g (x_p) where g(x) = |f(x)| (combine="abs", one series)
    or g(x) = sqrt(sum_i f_i(x)^2) (combine="norm", the gradient modulus).

    Returns an array of shape (len(u_values), X.shape[0]).
    """
    if combine not in ("abs", "norm"):
        raise ValueError(f"unknown combine {combine!r}")
    series_list = list(series_list)
    if combine == "abs" and len(series_list) != 1:
        raise ValueError("combine='abs' expects exactly one series")
    for f in series_list:
        if f.model != model:
            raise ValueError("series live on a different model")
    d = model.d
    if d > 3:
        raise ValueError("tensor quadrature limited to d <= 3")
    u_values = np.asarray(u_values, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    P = X.shape[0]
    deg = max((f.degree() for f in series_list), default=0)
    cubes = [_dense_cube(f, deg) for f in series_list]

    z, w = _gauss_hermite_nodes(order)
    K = order
    lam = model.rates
    q = model.variances
    F = np.empty((len(u_values), P))
    pstep = max(1, _CHUNK_BUDGET // (K ** d))
    for lo in range(0, P, pstep):
        xb = X[lo:lo + pstep]
        for j, u in enumerate(u_values):
            decay = np.exp(-lam * u)
            sigma = np.sqrt(q * (-np.expm1(-2.0 * lam * u)))
            # per-axis orthonormal Hermite tables at xi_i[p, k] = decay_i x_pi + sigma_i z_k
            tabs = []
            for i in range(d):
                xi = decay[i] * xb[:, i:i + 1] + sigma[i] * z[None, :]
                tabs.append(np.moveaxis(orthonormal_axis_table(xi, deg, q[i]), -1, 0))
            gs = [_contract(C, tabs, d) for C in cubes]
            if combine == "abs":
                g = np.abs(gs[0])
            else:
                g = np.sqrt(sum(gi * gi for gi in gs))
            # weight-sum over the tensor node axes
            flat = g.reshape(xb.shape[0], -1)
            Wt = w
            for _ in range(d - 1):
                Wt = np.multiply.outer(Wt, w).ravel()
            F[j, lo:lo + pstep] = flat @ Wt
    return F


def _contract(C: np.ndarray, tabs: list, d: int) -> np.ndarray:
    """Contract a dense coefficient cube against per-axis tables
    T_i[a, p, k_i]; returns values over (p, k_1, ..., k_d)."""
    if d == 1:
        return np.einsum("a,apk->pk", C, tabs[0])
    if d == 2:
        tmp = np.einsum("ab,apk->bpk", C, tabs[0])
        return np.einsum("bpk,bpl->pkl", tmp, tabs[1])
    tmp = np.einsum("abc,apk->bcpk", C, tabs[0])
    tmp = np.einsum("bcpk,bpl->cpkl", tmp, tabs[1])
    return np.einsum("cpkl,cpm->pklm", tmp, tabs[2])


def _interp_rows(v: np.ndarray, table: np.ndarray, vq) -> np.ndarray:
    """Linear interpolation of table[j, p] along the sorted abscissa v,
    vectorized over the p columns.  Returns shape (len(vq), P)."""
    vq = np.asarray(vq, dtype=float)
    idx = np.clip(np.searchsorted(v, vq) - 1, 0, len(v) - 2)
    w = (vq - v[idx]) / (v[idx + 1] - v[idx])
    w = np.clip(w, 0.0, 1.0)
    return (1.0 - w)[:, None] * table[idx] + w[:, None] * table[idx + 1]


def smoothing_series_grid(series_list: Sequence[HermiteSeries], model: GaussianModel,
                          s_values, X, order: int = 16, combine: str = "abs",
                          u_per_decade: int = 128) -> np.ndarray:
    """A_s g(x_p) for every s in s_values at once, g as in
    ``semigroup_series_grid``.  Returns shape (len(s_values), P).

    A single cumulative integral c(u) = int_{u_min}^{u} T_r g dr is built by
    trapezoid on a shared log-spaced grid and every average falls out as
    (c(2s) - c(s)) / s, so the semigroup cost is paid once across all s.
    """
    from scipy.integrate import cumulative_trapezoid

    s_values = np.asarray(s_values, dtype=float)
    if s_values.size == 0:
        return np.zeros((0, np.atleast_2d(X).shape[0]))
    if np.any(s_values <= 0):
        raise ValueError("smoothing times must be positive")
    v_lo = math.log(s_values.min())
    v_hi = math.log(2.0 * s_values.max())
    n = max(int(math.ceil(u_per_decade * (v_hi - v_lo) / math.log(10.0))), 8) + 1
    v = np.linspace(v_lo, v_hi, n)
    u = np.exp(v)
    F = semigroup_series_grid(series_list, model, u, X, order, combine)
    # du = u dv, so integrate T_u g * u against the uniform v grid
    c = cumulative_trapezoid(F * u[:, None], v, axis=0, initial=0.0)
    upper = _interp_rows(v, c, np.log(2.0 * s_values))
    lower = _interp_rows(v, c, np.log(s_values))
    return (upper - lower) / s_values[:, None]


# ---------------------------------------------------------------------------
# Pointwise inequality checks (standard convention)


def _require_standard(model: GaussianModel, what: str):
    if model.convention != "standard":
        raise ValueError(f"{what} is formulated for the standard convention only")


def log_convexity_slacks(g: PointwiseFunction, model: GaussianModel, t: float,
                         X0, X1, S, order: int = 32) -> np.ndarray:
    """Vector of slacks rhs - lhs for the semigroup log-convexity bound

        T_t g((1-s) x0 + s x1) <= exp(s(1-s)|x1-x0|^2 / (2t))
                                   * (T_t g(x0))^{1-s} (T_t g(x1))^s.

    Nonnegative g; standard convention (Cameron-Martin norm = Euclidean).
    """
    _require_standard(model, "log-convexity")
    if not g.nonneg:
        raise ValueError("log-convexity needs a nonnegative integrand")
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    S = np.asarray(S, dtype=float).reshape(-1)
    XM = (1.0 - S)[:, None] * X0 + S[:, None] * X1
    stacked = np.concatenate([X0, X1, XM], axis=0)
    vals = mehler_apply_batch(g, model, t, stacked, order)
    n = X0.shape[0]
    v0, v1, vm = vals[:n], vals[n:2 * n], vals[2 * n:]
    hsq = ((X1 - X0) ** 2).sum(axis=1)
    rhs = np.exp(S * (1.0 - S) * hsq / (2.0 * t)) * v0 ** (1.0 - S) * v1 ** S
    return rhs - vm


def log_convexity_check(g: PointwiseFunction, model: GaussianModel, t: float,
                        x0, x1, s: float, order: int = 32) -> float:
    return float(log_convexity_slacks(g, model, t, [x0], [x1], [s], order)[0])


def smoothing_log_convexity_slacks(g: PointwiseFunction, model: GaussianModel, t: float,
                                   X0, X1, S, order: int = 32,
                                   s_nodes: int = 32) -> np.ndarray:
    """Same bound for the smoothing operator A_t in place of T_t; the
    exponential factor keeps the T_t constant 1/(2t) because every averaged
    time s lies in [t, 2t] and the factor is decreasing in the time."""
    _require_standard(model, "log-convexity")
    if not g.nonneg:
        raise ValueError("log-convexity needs a nonnegative integrand")
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    S = np.asarray(S, dtype=float).reshape(-1)
    XM = (1.0 - S)[:, None] * X0 + S[:, None] * X1
    stacked = np.concatenate([X0, X1, XM], axis=0)
    vals = smoothing_apply_batch(g, model, t, stacked, order, s_nodes)
    n = X0.shape[0]
    v0, v1, vm = vals[:n], vals[n:2 * n], vals[2 * n:]
    hsq = ((X1 - X0) ** 2).sum(axis=1)
    rhs = np.exp(S * (1.0 - S) * hsq / (2.0 * t)) * v0 ** (1.0 - S) * v1 ** S
    return rhs - vm


def smoothing_log_convexity_check(g: PointwiseFunction, model: GaussianModel, t: float,
                                  x0, x1, s: float, order: int = 32,
                                  s_nodes: int = 32) -> float:
    return float(smoothing_log_convexity_slacks(g, model, t, [x0], [x1], [s],
                                                order, s_nodes)[0])


def lipschitz_bound_slacks(f: HermiteSeries, t: float, X0, X1,
                           order: int = 16, s_nodes: int = 32) -> np.ndarray:
    """Slacks rhs - lhs for the smoothing Lipschitz bound (h = x1 - x0):

        |A_t f(x1) - A_t f(x0)| <= |h| e^{|h|^2/(4t)} (A_t|grad f|(x0) + A_t|grad f|(x1)).

    A_t f is evaluated spectrally (exact); A_t|grad f| pointwise through the
    Mehler engine on the gradient modulus.
    """
    model = f.model
    _require_standard(model, "the smoothing Lipschitz bound")
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    atf = apply(f, smoothing(t))
    lhs = np.abs(atf(X1) - atf(X0))
    grad = gradient(f)
    u, w = gauss_legendre_01(s_nodes)
    ss = t * (1.0 + u)
    stacked = np.concatenate([X0, X1], axis=0)
    Fgrid = semigroup_series_grid(grad, model, ss, stacked, order, combine="norm")
    avals = w @ Fgrid
    n = X0.shape[0]
    a0, a1 = avals[:n], avals[n:]
    h = np.sqrt(((X1 - X0) ** 2).sum(axis=1))
    rhs = h * np.exp(h * h / (4.0 * t)) * (a0 + a1)
    return rhs - lhs


def lipschitz_bound_check(f: HermiteSeries, t: float, x0, x1,
                          order: int = 16, s_nodes: int = 32) -> float:
    return float(lipschitz_bound_slacks(f, t, [x0], [x1], order, s_nodes)[0])
