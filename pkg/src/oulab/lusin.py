"""Maximal operators and the constructive Lusin-type approximation.

Two maximal functions drive everything here.  The Hopf maximal operator
takes sup over a time grid of the running averages (1/t) int_0^t T_s f ds
and satisfies the weak (1,1) bound

    m( sup_t A_t f >= lam ) <= ||f||_1 / lam        (f >= 0),

which the module measures by Monte Carlo.  The controlling maximal
function for the Lipschitz approximation combines the smoothing averages
of the generator root and of the gradient modulus,

    M f (x) = sup_t A_t |sqrt(-L) f| (x) + sup_t A_t |grad f| (x),

with A_t now the average of T_s over s in [t, 2t].  The kernel-calculus
pair bound

    |f(x1) - f(x0)| <= c |h|_H ( M f(x0) + M f(x1) ),   t = |h|_H^2,

turns a sublevel set of M f into a certified Lipschitz set; anchors drawn
from it define a minimum-form extension that is globally Lipschitz with
the same constant.  Each average A_t g sits below twice the Hopf average
at 2t, so the weak (1,1) bound prices the complement:

    m( M f > a ) <= 4 ( ||sqrt(-L) f||_1 + ||grad f||_1 ) / a.

The budget lam = 4 c (sum of norms) / eps and the cut c M <= lam, that is
a = lam / c, make the complement mass at most eps; surviving pairs obey
slope 2 lam from the pair bound, and the anchor pass then certifies the
tighter budget lam itself, dropping the rare pair that exceeds it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.spatial.distance import cdist

from .kernels import SLOPE_KERNEL_MASS_UNIT, _basis_matrix
from .mehler import (
    PointwiseFunction,
    _interp_rows,
    mehler_apply_batch,
    smoothing_series_grid,
)
from .model import GaussianModel, HermiteSeries, series_eval
from .orlicz import l1_norm, modulus
from .spectral import _hopf_factor, apply, gradient, sqrt_gen

__all__ = [
    "C_NUM_DEFAULT",
    "C_EMP_DEFAULT",
    "TGrid",
    "AnchorSet",
    "Weak11Result",
    "PairCheckResult",
    "LusinReport",
    "hopf_max",
    "weak11_check",
    "big_M",
    "lusin_pair_check",
    "mcshane_extend",
    "extension_lipschitz_ratio",
    "lusin_approx",
    "lusin_sweep",
]

# Pair-bound constant: the measured slope-kernel mass with a 5% cushion for
# grid interpolation, floored by the e^{1/4} factor from the short-time
# Lipschitz bound at t = |h|_H^2.
C_NUM_DEFAULT = max(1.05 * SLOPE_KERNEL_MASS_UNIT, math.exp(0.25))

# Lipschitz-constant multiplier: lam = C_EMP * (||sqrt(-L)f||_1 + ||grad f||_1) / eps.
# The good set is {C_NUM * M <= lam}.  Each smoothing average is at most
# twice a running average at double the time, so mass(M > a) is at most
# 4 (S1 + S2) / a by the weak (1,1) bound applied to each summand of M at
# level a/4.  With a = lam / C_NUM the factor 4 here makes the eps
# complement bound a theorem rather than an observation.
C_EMP_DEFAULT = 4.0 * C_NUM_DEFAULT


@dataclass(frozen=True)
class TGrid:
    """Logarithmic time grid for the maximal operators.

    per_decade is the resolution floor; coarser grids would make the
    sup-over-grid a poor stand-in for the sup over a continuum of times.
    """

    t_min: float
    t_max: float
    per_decade: int = 16

    def __post_init__(self):
        if not (0.0 < self.t_min < self.t_max):
            raise ValueError("need 0 < t_min < t_max")
        if self.per_decade < 16:
            raise ValueError("per_decade must be at least 16")

    @property
    def values(self) -> np.ndarray:
        # nodes at t_min 10^(k / per_decade) so that doubling per_decade
        # yields an exact superset and the grid sup is monotone
        decades = math.log10(self.t_max / self.t_min)
        k = np.arange(max(int(math.ceil(self.per_decade * decades)), 1) + 1)
        v = self.t_min * 10.0 ** (k / self.per_decade)
        v[-1] = min(v[-1], self.t_max)
        return v

    def refined(self) -> "TGrid":
        return TGrid(self.t_min, self.t_max, 2 * self.per_decade)

    def contains(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (t >= self.t_min) & (t <= self.t_max)


def hopf_max(fn, model: GaussianModel, X: np.ndarray, tgrid: TGrid, *,
             order: int = 32, u_per_decade: int = 32) -> np.ndarray:
    """sup over the grid of the running averages (1/t) int_0^t T_s fn ds.

    fn must represent a nonnegative function.  A series input is evaluated
    through its spectral multiplier (exact in s); a pointwise input goes
    through Mehler quadrature on a logarithmic s grid with prefix
    integration, the stub [0, u_min] closed by a rectangle.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    tv = tgrid.values
    if isinstance(fn, HermiteSeries):
        mus = fn.index_array @ model.rates
        factors = _hopf_factor(np.outer(tv, mus))
        B = _basis_matrix(fn, X)
        vals = (factors * fn.coeff_array) @ B.T
        return vals.max(axis=0)

    call = fn if callable(fn) else None
    if call is None:
        raise TypeError("fn must be a HermiteSeries or a callable")
    u_min = tgrid.t_min * 1e-4
    v_lo, v_hi = math.log(u_min), math.log(tgrid.t_max)
    n = max(int(math.ceil(u_per_decade * (v_hi - v_lo) / math.log(10.0))), 8) + 1
    v = np.linspace(v_lo, v_hi, n)
    u = np.exp(v)
    F = np.empty((n, X.shape[0]))
    for j in range(n):
        F[j] = mehler_apply_batch(call, model, u[j], X, order=order)
    # prefix(t) = int_0^t T_s fn ds; du = u dv on the log grid
    prefix = cumulative_trapezoid(F * u[:, None], v, axis=0, initial=0.0)
    prefix += u_min * F[0]
    at = _interp_rows(v, prefix, np.log(tv)) / tv[:, None]
    return at.max(axis=0)


@dataclass(frozen=True, eq=False)
class Weak11Result:
    """Measured weak (1,1) exceedance against its integral bound."""

    lam: np.ndarray
    lhs: np.ndarray           # fraction of samples with maximal value >= lam
    rhs: np.ndarray           # ||fn||_1 / lam
    stderr: np.ndarray
    lhs_refined: np.ndarray   # same fractions on the doubled time grid


def weak11_check(fn, model: GaussianModel, lam, tgrid: TGrid, *,
                 samples: int = 100_000, seed: int = 0, order: int = 32,
                 u_per_decade: int = 32) -> Weak11Result:
    """Monte Carlo check of m(sup_t A_t fn >= lam) <= ||fn||_1 / lam.

    Also recomputes the exceedance on the doubled grid so callers can
    confirm the sup has stabilized in the grid resolution.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam <= 0):
        raise ValueError("thresholds must be positive")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x7731])))
    X = model.sample(samples, rng)
    mx = hopf_max(fn, model, X, tgrid, order=order, u_per_decade=u_per_decade)
    mx2 = hopf_max(fn, model, X, tgrid.refined(), order=order,
                   u_per_decade=u_per_decade)
    lhs = (mx[None, :] >= lam[:, None]).mean(axis=1)
    lhs2 = (mx2[None, :] >= lam[:, None]).mean(axis=1)
    se = np.sqrt(lhs * (1.0 - lhs) / samples)
    l1 = l1_norm(fn, model)
    return Weak11Result(lam, lhs, l1 / lam, se, lhs2)


def big_M(f: HermiteSeries, tgrid: TGrid, X: np.ndarray, *, order: int = 16,
          u_per_decade: int = 32) -> np.ndarray:
    """Controlling maximal function sup_t A_t|sqrt(-L)f| + sup_t A_t|grad f|."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    root = apply(f, sqrt_gen())
    sv = tgrid.values
    a1 = smoothing_series_grid([root], f.model, sv, X, order=order,
                               combine="abs", u_per_decade=u_per_decade)
    a2 = smoothing_series_grid(gradient(f), f.model, sv, X, order=order,
                               combine="norm", u_per_decade=u_per_decade)
    return a1.max(axis=0) + a2.max(axis=0)


@dataclass(frozen=True, eq=False)
class PairCheckResult:
    """Pair-bound slacks; pairs whose natural time left the grid are only
    flagged, not failed."""

    slack: np.ndarray
    conclusive: np.ndarray
    t_star: np.ndarray


def lusin_pair_check(f: HermiteSeries, X0: np.ndarray, X1: np.ndarray,
                     tgrid: TGrid, *, c_num: float | None = None,
                     order: int = 16, u_per_decade: int = 32) -> PairCheckResult:
    """Slack of |f(x1) - f(x0)| <= c_num |h|_H (M f(x0) + M f(x1)).

    The bound is proved at t = |h|_H^2; when that time falls outside the
    grid the computed maximal values do not certify anything, so those
    pairs come back inconclusive rather than failed.
    """
    if c_num is None:
        c_num = C_NUM_DEFAULT
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    model = f.model
    h = model.cm_norm(X1 - X0)
    t_star = h * h
    stacked = np.vstack([X0, X1])
    m = big_M(f, tgrid, stacked, order=order, u_per_decade=u_per_decade)
    m0, m1 = m[: X0.shape[0]], m[X0.shape[0]:]
    lhs = np.abs(series_eval(f, X1) - series_eval(f, X0))
    slack = c_num * h * (m0 + m1) - lhs
    return PairCheckResult(slack, tgrid.contains(t_star), t_star)


@dataclass(frozen=True, eq=False)
class AnchorSet:
    """Anchor points with values certified pairwise lam-Lipschitz.

    Construction verifies every pair; an extension built on top of a
    violating set would silently fail to interpolate, so refusal here is
    the cheaper failure.
    """

    points: np.ndarray
    values: np.ndarray
    lam: float
    model: GaussianModel = field(repr=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        vals = np.asarray(self.values, dtype=float)
        if pts.shape[0] != vals.shape[0]:
            raise ValueError("points and values disagree in length")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        d = _cm_dist(pts, pts, self.model)
        gap = np.abs(vals[:, None] - vals[None, :]) - self.lam * d
        tol = 1e-9 * (1.0 + self.lam * d)
        if np.any(gap > tol):
            raise ValueError("anchor values violate the Lipschitz certificate")

    def __len__(self) -> int:
        return self.points.shape[0]


def _cm_dist(A: np.ndarray, B: np.ndarray, model: GaussianModel) -> np.ndarray:
    scale = np.sqrt(model.variances)
    return cdist(A / scale, B / scale)


def mcshane_extend(anchors: AnchorSet, X: np.ndarray, *,
                   chunk: int = 4096) -> np.ndarray:
    """Minimum-form Lipschitz extension g(x) = min_j (v_j + lam |x - p_j|_H).

    A minimum of lam-Lipschitz functions is lam-Lipschitz, and on the
    anchors the certificate makes the minimizing index the point itself,
    so g interpolates the anchor values exactly.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty(X.shape[0])
    for lo in range(0, X.shape[0], chunk):
        block = X[lo:lo + chunk]
        d = _cm_dist(block, anchors.points, anchors.model)
        out[lo:lo + block.shape[0]] = (anchors.values[None, :]
                                       + anchors.lam * d).min(axis=1)
    return out


def extension_lipschitz_ratio(anchors: AnchorSet, X0: np.ndarray,
                              X1: np.ndarray) -> float:
    """max |g(x1) - g(x0)| / (lam |x1 - x0|_H) over the supplied pairs."""
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    g0 = mcshane_extend(anchors, X0)
    g1 = mcshane_extend(anchors, X1)
    h = anchors.model.cm_norm(X1 - X0)
    keep = h > 0
    if not np.any(keep):
        return 0.0
    return float((np.abs(g1 - g0)[keep] / (anchors.lam * h[keep])).max())


@dataclass(frozen=True, eq=False)
class LusinReport:
    """One eps level of the Lipschitz approximation."""

    eps: float
    lam_used: float
    threshold: float          # sublevel cut on the maximal function
    norm_sum: float           # ||sqrt(-L)f||_1 + ||grad f||_1
    sample_size: int
    complement_mass: float
    complement_stderr: float
    removed: int              # anchors dropped by the greedy certificate pass
    anchors: AnchorSet


def _greedy_certify(pts: np.ndarray, vals: np.ndarray, lam: float,
                    model: GaussianModel):
    """Drop the worst offenders until the pairwise certificate holds."""
    d = _cm_dist(pts, pts, model)
    gap = np.abs(vals[:, None] - vals[None, :]) - lam * d
    bad = gap > 1e-9 * (1.0 + lam * d)
    np.fill_diagonal(bad, False)
    keep = np.ones(pts.shape[0], dtype=bool)
    removed = 0
    counts = bad.sum(axis=1)
    while counts.max(initial=0) > 0:
        worst = int(np.argmax(counts))
        keep[worst] = False
        counts -= bad[:, worst]
        counts[worst] = 0
        bad[worst, :] = False
        bad[:, worst] = False
        removed += 1
    return pts[keep], vals[keep], removed


def _report_from_m(f: HermiteSeries, eps: float, X: np.ndarray, m: np.ndarray,
                   norm_sum: float, c_num: float, c_emp: float,
                   anchor_cap: int, rng: np.random.Generator) -> LusinReport:
    lam_used = c_emp * norm_sum / eps
    threshold = lam_used / c_num
    good = m <= threshold
    p = 1.0 - float(good.mean())
    se = math.sqrt(max(p * (1.0 - p), 0.0) / X.shape[0])
    idx = np.flatnonzero(good)
    if idx.size == 0:
        raise ValueError("empty good set; eps is too small for this sample size")
    if idx.size > anchor_cap:
        idx = rng.choice(idx, size=anchor_cap, replace=False)
        idx.sort()
    pts = X[idx]
    vals = series_eval(f, pts)
    pts, vals, removed = _greedy_certify(pts, vals, lam_used, f.model)
    anchors = AnchorSet(pts, vals, lam_used, f.model)
    return LusinReport(eps, lam_used, threshold, norm_sum, X.shape[0], p, se,
                       removed, anchors)


def lusin_approx(f: HermiteSeries, eps: float, tgrid: TGrid, *,
                 samples: int = 40_000, anchor_cap: int = 2000, seed: int = 0,
                 c_num: float | None = None, c_emp: float | None = None,
                 order: int = 16, u_per_decade: int = 32) -> LusinReport:
    """Build the eps-level Lipschitz approximation of a nonconstant series.

    Samples the measure, keeps the sublevel set of the controlling maximal
    function, certifies an anchor subset pairwise, and reports the
    ingredients the extension needs.  The complement mass is measured on
    the full sample; its eps bound is inherited from the weak (1,1)
    inequality through the choice of threshold.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    if f.degree() < 1:
        raise ValueError("f must be nonconstant")
    if c_num is None:
        c_num = C_NUM_DEFAULT
    if c_emp is None:
        c_emp = C_EMP_DEFAULT
    norm_sum = _lusin_norms(f)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x6C75])))
    X = f.model.sample(samples, rng)
    m = big_M(f, tgrid, X, order=order, u_per_decade=u_per_decade)
    return _report_from_m(f, eps, X, m, norm_sum, c_num, c_emp, anchor_cap, rng)


def lusin_sweep(f: HermiteSeries, eps_list: Sequence[float], tgrid: TGrid, *,
                samples: int = 40_000, anchor_cap: int = 2000, seed: int = 0,
                c_num: float | None = None, c_emp: float | None = None,
                order: int = 16, u_per_decade: int = 32) -> list:
    """lusin_approx across eps levels with the maximal function computed once."""
    if f.degree() < 1:
        raise ValueError("f must be nonconstant")
    for eps in eps_list:
        if not (0.0 < eps < 1.0):
            raise ValueError("eps must lie in (0, 1)")
    if c_num is None:
        c_num = C_NUM_DEFAULT
    if c_emp is None:
        c_emp = C_EMP_DEFAULT
    norm_sum = _lusin_norms(f)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x6C75])))
    X = f.model.sample(samples, rng)
    m = big_M(f, tgrid, X, order=order, u_per_decade=u_per_decade)
    return [_report_from_m(f, eps, X, m, norm_sum, c_num, c_emp, anchor_cap, rng)
            for eps in eps_list]


def _lusin_norms(f: HermiteSeries) -> float:
    root_l1 = l1_norm(apply(f, sqrt_gen()))
    grad = gradient(f)
    if f.model.d == 1:
        grad_l1 = l1_norm(grad[0])
    else:
        grad_l1 = l1_norm(modulus(grad), f.model)
    return root_l1 + grad_l1
