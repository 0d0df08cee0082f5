"""Finite-dimensional Gaussian model with a probabilists' Hermite basis.

The state space is R^d carrying a centered Gaussian measure

    m = N(0, Q),        Q = diag(q_1, ..., q_d),

and a diagonal Ornstein-Uhlenbeck generator with per-axis decay rates
lambda_i > 0.  Two conventions are supported:

* ``standard``: lambda_i = 1, q_i = 1, generator  L = Lap - <x, grad>.
* ``general``:  q_i = 1/(2 lambda_i) exactly, generator
  L = (1/2) Lap + <Ax, grad> with A = diag(-lambda_i) = -(1/2) Q^{-1};
  rates must be sorted nondecreasing and the spectral gap is
  beta = min_i lambda_i > 0.

The orthonormal eigenbasis of L^2(m) is built from probabilists' Hermite
polynomials He_n (recurrence He_{n+1}(x) = x He_n(x) - n He_{n-1}(x)):

    h_alpha(x) = prod_i He_{alpha_i}(x_i / sqrt(q_i)) / sqrt(alpha_i!),

with -L h_alpha = mu(alpha) h_alpha and mu(alpha) = sum_i alpha_i lambda_i.

Everything in this module is pure and immutable; instances are safe to
share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "AdaptiveSpec",
    "AxisSpec",
    "GaussianModel",
    "MultiIndex",
    "HermiteSeries",
    "QuadratureGrid",
    "hermite_eval",
    "hermite_table",
    "orthonormal_axis_table",
    "multi_indices_up_to",
    "series_eval",
    "project",
    "integrate",
    "integrate_mc",
]

# A multi-index is a plain tuple of nonnegative ints, one entry per axis.
MultiIndex = tuple

_TENSOR_DIM_LIMIT = 3  # tensor quadrature above this would blow up; use MC


@dataclass(frozen=True)
class AxisSpec:
    """Decay rate and stationary variance of one coordinate axis."""

    rate: float
    variance: float

    def __post_init__(self):
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise ValueError(f"axis rate must be positive, got {self.rate}")
        if not (self.variance > 0.0 and math.isfinite(self.variance)):
            raise ValueError(f"axis variance must be positive, got {self.variance}")


@dataclass(frozen=True)
class GaussianModel:
    """Diagonal OU model: axes plus the convention that ties them together."""

    axes: tuple
    convention: str = "standard"

    def __post_init__(self):
        axes = tuple(self.axes)
        object.__setattr__(self, "axes", axes)
        if len(axes) == 0:
            raise ValueError("model needs at least one axis")
        if not all(isinstance(a, AxisSpec) for a in axes):
            raise ValueError("axes must be AxisSpec instances")
        if self.convention == "standard":
            for a in axes:
                if not (a.rate == 1.0 and a.variance == 1.0):
                    raise ValueError(
                        "standard convention requires rate = variance = 1 on every axis"
                    )
        elif self.convention == "general":
            rates = [a.rate for a in axes]
            if any(r2 < r1 for r1, r2 in zip(rates, rates[1:])):
                raise ValueError("general convention requires nondecreasing rates")
            for a in axes:
                # q = 1/(2 lambda) exactly; tolerate only float roundoff
                if abs(a.variance * 2.0 * a.rate - 1.0) > 1e-12:
                    raise ValueError(
                        f"general convention requires variance = 1/(2 rate); "
                        f"axis has rate={a.rate}, variance={a.variance}"
                    )
        else:
            raise ValueError(f"unknown convention {self.convention!r}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def standard(cls, d: int) -> "GaussianModel":
        return cls(tuple(AxisSpec(1.0, 1.0) for _ in range(d)), "standard")

    @classmethod
    def general(cls, rates: Sequence[float]) -> "GaussianModel":
        if any(float(r) <= 0.0 for r in rates):
            raise ValueError("rates must be positive")
        return cls(tuple(AxisSpec(float(r), 0.5 / float(r)) for r in rates), "general")

    # -- views -------------------------------------------------------------

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def rates(self) -> np.ndarray:
        return np.array([a.rate for a in self.axes])

    @property
    def variances(self) -> np.ndarray:
        return np.array([a.variance for a in self.axes])

    @property
    def beta(self) -> float:
        """Spectral gap: the smallest decay rate."""
        return min(a.rate for a in self.axes)

    def dirichlet_weights(self) -> np.ndarray:
        """Per-axis diffusion s_i = lambda_i q_i, so <-Lf, g> = sum s_i <d_i f, d_i g>.

        Equals 1 under the standard convention and 1/2 under the general one.
        """
        return self.rates * self.variances

    def cm_norm_sq(self, h: np.ndarray) -> np.ndarray:
        """Squared Cameron-Martin norm |Q^{-1/2} h|^2, batched over rows."""
        h = np.asarray(h, dtype=float)
        return (h * h / self.variances).sum(axis=-1)

    def cm_norm(self, h: np.ndarray) -> np.ndarray:
        return np.sqrt(self.cm_norm_sq(h))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n i.i.d. draws from m = N(0, Q), shape (n, d)."""
        return rng.standard_normal((n, self.d)) * np.sqrt(self.variances)


# ---------------------------------------------------------------------------
# Hermite machinery


def hermite_eval(n: int, x) -> np.ndarray:
    """Probabilists' Hermite polynomial He_n(x) via the three-term recurrence."""
    if n < 0:
        raise ValueError("Hermite degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = x.copy()
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return cur


def hermite_table(nmax: int, x) -> np.ndarray:
    """He_0..He_nmax at x, stacked along the last axis: shape x.shape + (nmax+1,)."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (nmax + 1,))
    out[..., 0] = 1.0
    if nmax >= 1:
        out[..., 1] = x
    for k in range(1, nmax):
        out[..., k + 1] = x * out[..., k] - k * out[..., k - 1]
    return out


def orthonormal_axis_table(x, nmax: int, variance: float) -> np.ndarray:
    """Table of He_j(x/sqrt(q))/sqrt(j!) for j = 0..nmax; the per-axis factors
    of the orthonormal basis."""
    tab = hermite_table(nmax, np.asarray(x, dtype=float) / math.sqrt(variance))
    norms = np.array([math.sqrt(math.factorial(j)) for j in range(nmax + 1)])
    return tab / norms


def multi_indices_up_to(d: int, cap: int) -> list:
    """All multi-indices of dimension d with total degree <= cap, sorted."""
    out = [()]
    for _ in range(d):
        out = [idx + (k,) for idx in out for k in range(cap + 1 - sum(idx))]
    out.sort(key=lambda a: (sum(a), a))
    return out


def _validate_index(alpha, d: int, cap: int) -> tuple:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != d:
        raise ValueError(f"multi-index {alpha} has wrong length for d={d}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index {alpha} has negative entries")
    if sum(alpha) > cap:
        raise ValueError(f"multi-index {alpha} exceeds degree cap {cap}")
    return alpha


@dataclass(frozen=True)
class HermiteSeries:
    """Finite expansion f = sum_alpha c_alpha h_alpha in the orthonormal basis.

    ``coeffs`` maps multi-indices (tuples of length model.d) to real
    coefficients; total degree never exceeds ``cap``.  Instances are
    immutable value objects.
    """

    model: GaussianModel
    cap: int
    coeffs: Mapping

    def __post_init__(self):
        if self.cap < 0:
            raise ValueError("degree cap must be nonnegative")
        d = self.model.d
        clean = {}
        for alpha, c in dict(self.coeffs).items():
            alpha = _validate_index(alpha, d, self.cap)
            c = float(c)
            if c != 0.0:
                clean[alpha] = c
        object.__setattr__(self, "coeffs", clean)

    # -- cached array views --------------------------------------------------

    def _arrays(self):
        items = sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0]))
        idx = np.array([a for a, _ in items], dtype=np.intp).reshape(len(items), self.model.d)
        val = np.array([c for _, c in items])
        return idx, val

    @property
    def index_array(self) -> np.ndarray:
        return self._arrays()[0]

    @property
    def coeff_array(self) -> np.ndarray:
        return self._arrays()[1]

    # -- basic queries ---------------------------------------------------------

    def degree(self) -> int:
        return max((sum(a) for a in self.coeffs), default=0)

    def mean(self) -> float:
        """Integral against m: the coefficient of the constant mode."""
        return self.coeffs.get((0,) * self.model.d, 0.0)

    def l2_norm(self) -> float:
        """L^2(m) norm; Parseval, since the basis is orthonormal."""
        return math.sqrt(sum(c * c for c in self.coeffs.values()))

    def __call__(self, x) -> np.ndarray:
        return series_eval(self, x)

    # -- arithmetic (new instances, inputs untouched) ---------------------------

    def map_coeffs(self, fn: Callable) -> "HermiteSeries":
        """New series with coefficients fn(alpha, c)."""
        return HermiteSeries(
            self.model, self.cap, {a: fn(a, c) for a, c in self.coeffs.items()}
        )

    def add(self, other: "HermiteSeries") -> "HermiteSeries":
        if other.model != self.model:
            raise ValueError("series live on different models")
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, 0.0) + c
        return HermiteSeries(self.model, max(self.cap, other.cap), out)

    def scale(self, sc: float) -> "HermiteSeries":
        return HermiteSeries(self.model, self.cap, {a: sc * c for a, c in self.coeffs.items()})

    def sub(self, other: "HermiteSeries") -> "HermiteSeries":
        return self.add(other.scale(-1.0))

    def shift_mean(self, delta: float) -> "HermiteSeries":
        out = dict(self.coeffs)
        zero = (0,) * self.model.d
        out[zero] = out.get(zero, 0.0) + delta
        return HermiteSeries(self.model, self.cap, out)


def series_eval(f: HermiteSeries, x) -> np.ndarray:
    """Evaluate a Hermite series at x of shape (d,) or (N, d)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x.reshape(1, -1) if single else x
    if pts.shape[-1] != f.model.d:
        raise ValueError(f"points have dimension {pts.shape[-1]}, model is d={f.model.d}")
    idx, val = f._arrays()
    if len(val) == 0:
        out = np.zeros(pts.shape[0])
        return float(out[0]) if single else out
    nmax = int(idx.max())
    q = f.model.variances
    out = np.empty(pts.shape[0])
    # chunk points so the (chunk, n_terms) work array stays small
    step = max(1, int(4e6) // max(len(val), 1))
    for lo in range(0, pts.shape[0], step):
        chunk = pts[lo:lo + step]
        tables = [orthonormal_axis_table(chunk[:, i], nmax, q[i]) for i in range(f.model.d)]
        terms = tables[0][:, idx[:, 0]]
        for i in range(1, f.model.d):
            terms = terms * tables[i][:, idx[:, i]]
        out[lo:lo + step] = terms @ val
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# Quadrature


def _gauss_hermite_nodes(order: int):
    """Probabilists' Gauss-Hermite rule for N(0,1) by the symmetric-tridiagonal
    (Golub-Welsch) eigenvalue method.

    The Jacobi matrix of the He recurrence has zero diagonal and off-diagonal
    sqrt(k); its eigenvalues are the nodes and the squared first components of
    the normalized eigenvectors are the weights (total mass 1).  Stable well
    beyond order 30, unlike naive root polishing.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    if order == 1:
        return np.zeros(1), np.ones(1)
    off = np.sqrt(np.arange(1, order, dtype=float))
    nodes, vecs = eigh_tridiagonal(np.zeros(order), off)
    weights = vecs[0, :] ** 2
    weights = weights / weights.sum()
    # symmetrize: the rule is even in x
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


@dataclass(frozen=True)
class AdaptiveSpec:
    """Optional 1-D adaptive integration request: split at the listed points."""

    singular_points: tuple = ()
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor Gauss-Hermite rule adapted to a model's axis variances."""

    model: GaussianModel
    order: int
    adaptive: AdaptiveSpec | None = None

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("quadrature order must be >= 1")

    @classmethod
    def gauss_hermite(cls, model: GaussianModel, order: int,
                      adaptive: AdaptiveSpec | None = None) -> "QuadratureGrid":
        return cls(model, order, adaptive)

    def axis_nodes(self, i: int):
        z, w = _gauss_hermite_nodes(self.order)
        return z * math.sqrt(self.model.variances[i]), w

    def check(self) -> None:
        z, w = _gauss_hermite_nodes(self.order)
        if np.any(w <= 0):
            raise ValueError("quadrature weights must be positive")
        if abs(w.sum() - 1.0) > 1e-13:
            raise ValueError("quadrature weights must sum to 1")

    def tensor_nodes(self) -> np.ndarray:
        """All tensor nodes, shape (order^d, d).  Refuses d > 3."""
        d = self.model.d
        if d > _TENSOR_DIM_LIMIT:
            raise ValueError(f"tensor quadrature limited to d <= {_TENSOR_DIM_LIMIT}")
        grids = [self.axis_nodes(i)[0] for i in range(d)]
        mesh = np.meshgrid(*grids, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def tensor_weights(self) -> np.ndarray:
        d = self.model.d
        if d > _TENSOR_DIM_LIMIT:
            raise ValueError(f"tensor quadrature limited to d <= {_TENSOR_DIM_LIMIT}")
        w = self.axis_nodes(0)[1]
        out = w
        for i in range(1, d):
            wi = self.axis_nodes(i)[1]
            out = np.multiply.outer(out, wi).ravel()
        return out


def project(fn: Callable, model: GaussianModel, cap: int, grid: QuadratureGrid) -> HermiteSeries:
    """L^2(m) projection of fn onto the span of basis elements with |alpha| <= cap.

    The grid order must exceed the cap so that polynomial inner products up to
    degree 2*cap are exact.
    """
    if grid.order <= cap:
        raise ValueError(f"grid order {grid.order} too small for cap {cap}")
    pts = grid.tensor_nodes()
    w = grid.tensor_weights()
    vals = np.asarray(fn(pts), dtype=float)
    if vals.shape != (pts.shape[0],):
        raise ValueError("fn must map (N, d) points to (N,) values")
    idx_list = multi_indices_up_to(model.d, cap)
    tables = [orthonormal_axis_table(pts[:, i], cap, model.variances[i])
              for i in range(model.d)]
    coeffs = {}
    wv = w * vals
    for alpha in idx_list:
        basis = tables[0][:, alpha[0]]
        for i in range(1, model.d):
            basis = basis * tables[i][:, alpha[i]]
        coeffs[alpha] = float(wv @ basis)
    return HermiteSeries(model, cap, coeffs)


def _adaptive_integral_1d(fn: Callable, model: GaussianModel, spec: AdaptiveSpec) -> float:
    """Adaptive integral of fn against N(0, q) in d=1 with declared split points."""
    from scipy.integrate import quad

    q = model.variances[0]
    dens = 1.0 / math.sqrt(2.0 * math.pi * q)

    def g(x):
        return fn(np.array([[x]]))[0] * dens * math.exp(-0.5 * x * x / q)

    pts = sorted(float(p) for p in spec.singular_points)
    sd = math.sqrt(q)
    edges = [-np.inf] + [p for p in pts if -40 * sd < p < 40 * sd] + [np.inf]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(g, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=400)
        total += val
    return total


def integrate(fn: Callable, model: GaussianModel, grid: QuadratureGrid | None = None,
              *, samples: int = 200_000, seed: int = 0) -> float:
    """Integral of fn against m.

    Tensor Gauss-Hermite for d <= 3 (with an optional adaptive 1-D path when
    the grid declares singular points); seeded Monte Carlo for d > 3.  fn maps
    an (N, d) array to (N,) values.
    """
    if grid is None:
        grid = QuadratureGrid.gauss_hermite(model, 64 if model.d == 1 else 32)
    if model.d == 1 and grid.adaptive is not None:
        return _adaptive_integral_1d(fn, model, grid.adaptive)
    if model.d <= _TENSOR_DIM_LIMIT:
        pts = grid.tensor_nodes()
        w = grid.tensor_weights()
        return float(w @ np.asarray(fn(pts), dtype=float))
    return integrate_mc(fn, model, samples, seed)[0]


def integrate_mc(fn: Callable, model: GaussianModel, samples: int, seed: int):
    """Monte Carlo integral against m: returns (mean, standard error)."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x6D63])))
    total = 0.0
    total_sq = 0.0
    n = 0
    chunk = 262_144
    while n < samples:
        take = min(chunk, samples - n)
        vals = np.asarray(fn(model.sample(take, rng)), dtype=float)
        total += vals.sum()          # numpy sum is pairwise
        total_sq += (vals * vals).sum()
        n += take
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return mean, math.sqrt(var / n)
