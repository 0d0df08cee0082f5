"""One-dimensional kernel calculus behind the L^1 smoothing rate bound.

Three kernels on the time half-line drive the analysis.  The increment
kernel K represents spectral increments of the semigroup,

    e^{-mu r} - 1 = sqrt(mu) * integral_0^inf K(s, r) e^{-mu s} ds,
    K(s, r) = ( 1_{s > r} / sqrt(s - r) - 1 / sqrt(s) ) / sqrt(pi).

Averaging K in r over [t, 2t] gives the averaged kernel U(s, t), and the
slope kernel Q(s, t) = s * dU/ds(s, t) satisfies the companion identity for
the smoothing operator A_t = (1/t) int_t^{2t} T_s ds,

    m_t(mu) - 1 = -sqrt(mu) * integral_0^inf Q(s, t) h_s(mu) ds,

where m_t(mu) = (e^{-mu t} - e^{-2 mu t}) / (mu t) is the multiplier of A_t
and h_s(mu) = (1 - e^{-mu s}) / (mu s) is the multiplier of the running
average (1/s) int_0^s T_v dv.  The running average appears because the
identity comes from integrating U T_s by parts: s h_s(mu) is the exact
antiderivative of e^{-mu s}, while s m_s(mu) is not.
All three kernels share the scaling kernel(a s, a t) = a^{-1/2} kernel(s, t),
so the total variation of Q in s is sqrt(t) times a fixed constant,

    integral_0^inf |Q(s, t)| ds = sqrt(t) * (2 sqrt(2) + 16/3) / sqrt(pi),

and that constant is what turns the identity into the pointwise rate bound

    |A_t f - f|(x) <= C sqrt(t) * sup_{s > 0} A_s |sqrt(-L) f|(x).

The mass and identity integrals here are computed numerically (square-root
substitutions at the singular endpoints 0, t, 2t plus a Richardson tail), so
the closed forms above stay available as independent oracles for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .mehler import smoothing_series_grid
from .model import HermiteSeries, orthonormal_axis_table
from .spectral import _hopf_factor, _smoothing_factor, apply, sqrt_gen

__all__ = [
    "SLOPE_KERNEL_MASS_UNIT",
    "KernelConfig",
    "RateBound",
    "increment_kernel",
    "averaged_kernel",
    "slope_kernel",
    "averaged_from_increment",
    "slope_kernel_mass",
    "slope_kernel_mass_pieces",
    "increment_identity_residual",
    "smoothing_identity_residual",
    "smoothing_rate_slack",
]

_SQRT_PI = math.sqrt(math.pi)

# integral_0^inf |Q(s, 1)| ds in closed form; sqrt(t) scaling covers other t
SLOPE_KERNEL_MASS_UNIT = (2.0 * math.sqrt(2.0) + 16.0 / 3.0) / _SQRT_PI


@dataclass(frozen=True)
class KernelConfig:
    """Quadrature controls for the kernel mass and identity checks.

    tail_cutoff is in units of t: adaptive quadrature stops at tail_cutoff*t
    and the remaining tail is Richardson-extrapolated from two doublings.
    """

    abs_tol: float = 1e-11
    rel_tol: float = 1e-10
    tail_cutoff: float = 1000.0
    quad_limit: int = 200

    def __post_init__(self):
        if self.tail_cutoff < 10.0:
            raise ValueError("tail_cutoff must be at least 10")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")

    def refined(self) -> "KernelConfig":
        """A strictly finer configuration, for convergence checks."""
        return replace(self, abs_tol=max(self.abs_tol / 10.0, 1e-13),
                       rel_tol=max(self.rel_tol / 10.0, 1e-12),
                       tail_cutoff=2.0 * self.tail_cutoff,
                       quad_limit=2 * self.quad_limit)

    def _quad_opts(self) -> dict:
        return dict(epsabs=self.abs_tol, epsrel=self.rel_tol, limit=self.quad_limit)


def increment_kernel(s, r: float):
    """K(s, r), vectorized in s; the jump at s = r is left-continuous."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("s must be positive")
    out = -1.0 / (_SQRT_PI * np.sqrt(s))
    above = s > r
    out = np.where(above, out + 1.0 / (_SQRT_PI * np.sqrt(np.where(above, s - r, 1.0))), out)
    return out if out.ndim else float(out)


def _averaged_unit(sigma: np.ndarray) -> np.ndarray:
    """U(sigma, 1) on the three pieces; continuous across sigma = 1, 2."""
    out = -1.0 / (_SQRT_PI * np.sqrt(sigma))
    mid = sigma > 1.0
    out = np.where(mid, out + 2.0 * np.sqrt(np.where(mid, sigma - 1.0, 0.0)) / _SQRT_PI, out)
    top = sigma > 2.0
    out = np.where(top, out - 2.0 * np.sqrt(np.where(top, sigma - 2.0, 0.0)) / _SQRT_PI, out)
    return out


def averaged_kernel(s, t: float):
    """U(s, t) = (1/t) int_t^{2t} K(s, r) dr, in closed piecewise form."""
    if t <= 0:
        raise ValueError("t must be positive")
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("s must be positive")
    out = _averaged_unit(s / t) / math.sqrt(t)
    return out if out.ndim else float(out)


def _slope_unit(sigma: np.ndarray) -> np.ndarray:
    """Q(sigma, 1) = sigma * U'(sigma, 1) away from the piece boundaries."""
    out = 0.5 / (_SQRT_PI * np.sqrt(sigma))
    mid = sigma > 1.0
    out = np.where(mid, out + sigma / (_SQRT_PI * np.sqrt(np.where(mid, sigma - 1.0, 1.0))), out)
    top = sigma > 2.0
    out = np.where(top, out - sigma / (_SQRT_PI * np.sqrt(np.where(top, sigma - 2.0, 1.0))), out)
    return out


def slope_kernel(s, t: float):
    """Q(s, t) = s * dU/ds(s, t) in closed piecewise form.

    The one-sided derivative blows up at s = t and s = 2t; values exactly on
    a boundary are a domain error and the caller integrates around them.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("s must be positive")
    if np.any(s == t) or np.any(s == 2.0 * t):
        raise ValueError("s on a piece boundary; integrate around it")
    out = _slope_unit(s / t) / math.sqrt(t)
    return out if out.ndim else float(out)


def averaged_from_increment(s: float, t: float, config: KernelConfig = KernelConfig()) -> float:
    """U(s, t) recomputed as the r-average of K by adaptive quadrature.

    Independent of the piecewise closed form of U: integrates K(s, .) over
    [t, 2t], splitting at the interior blowup r = s (where K grows like
    (s - r)^{-1/2} from the left) with a square-root substitution.
    """
    if t <= 0 or s <= 0:
        raise ValueError("s and t must be positive")
    opts = config._quad_opts()

    def k_at(r):
        return float(increment_kernel(s, r))

    total = 0.0
    if t < s < 2.0 * t:
        # r in (t, s): sub r = s - u^2 cancels the (s - r)^{-1/2} blowup
        def left(u):
            return 2.0 / _SQRT_PI - 2.0 * u / (_SQRT_PI * math.sqrt(s))

        total += quad(left, 0.0, math.sqrt(s - t), **opts)[0]
        total += quad(k_at, s, 2.0 * t, **opts)[0]
    else:
        total += quad(k_at, t, 2.0 * t, **opts)[0]
    return total / t


def _slope_jacobian(t: float, piece: int, u: float) -> float:
    """2u * Q(shift + u^2, t) for the substitution s = shift + u^2, with the
    singular factor at the piece's left endpoint cancelled analytically.
    Pieces: 1 on (0, t), 2 on (t, 2t), 3 on (2t, infinity)."""
    if piece == 1:
        return 1.0 / _SQRT_PI
    if piece == 2:
        s = t + u * u
        return u / (_SQRT_PI * math.sqrt(s)) + 2.0 * s / (t * _SQRT_PI)
    s = 2.0 * t + u * u
    smooth = u / (_SQRT_PI * math.sqrt(s)) + 2.0 * u * s / (t * _SQRT_PI * math.sqrt(s - t))
    return smooth - 2.0 * s / (t * _SQRT_PI)


def slope_kernel_mass_pieces(t: float, config: KernelConfig = KernelConfig()):
    """(below, mid, above): integral of |Q(s, t)| over (0, t), (t, 2t), and
    (2t, infinity), the last with the Richardson-extrapolated tail."""
    if t <= 0:
        raise ValueError("t must be positive")
    opts = config._quad_opts()

    def piece(p, shift, hi):
        return quad(lambda u: abs(_slope_jacobian(t, p, u)), 0.0,
                    math.sqrt(hi - shift), **opts)[0]

    T = config.tail_cutoff * t
    below = piece(1, 0.0, t)
    mid = piece(2, t, 2.0 * t)
    above = piece(3, 2.0 * t, T)

    def absq(s):
        return abs(float(slope_kernel(s, t)))

    d1 = quad(absq, T, 2.0 * T, **opts)[0]
    d2 = quad(absq, 2.0 * T, 4.0 * T, **opts)[0]
    # tail E(T) = a T^{-1/2} + b T^{-3/2} + O(T^{-5/2}) since
    # |Q| ~ (9/(8 sqrt(pi))) t s^{-3/2} with half-integer corrections;
    # d1 = E(T) - E(2T) and d2 = E(2T) - E(4T) determine a and b
    r = 2.0 ** -0.5
    A = (d2 - r ** 3 * d1) / (r - r ** 3)
    B = d1 - A
    tail_4t = 0.5 * A / (1.0 - r) + 0.125 * B / (1.0 - r ** 3)
    return below, mid, above + d1 + d2 + tail_4t


def slope_kernel_mass(t: float, config: KernelConfig = KernelConfig()) -> float:
    """Numerical total variation integral_0^inf |Q(s, t)| ds."""
    return float(sum(slope_kernel_mass_pieces(t, config)))


def increment_identity_residual(mu: float, r: float,
                                config: KernelConfig = KernelConfig()) -> float:
    """|sqrt(mu) int_0^inf K(s, r) e^{-mu s} ds - (e^{-mu r} - 1)|.

    The integral is evaluated numerically in three pieces: s = u^2 on (0, r)
    for the -s^{-1/2} part, s = r + u^2 on (r, inf) for the (s - r)^{-1/2}
    part, and a plain half-line quadrature for the remaining smooth part.
    """
    if mu <= 0 or r <= 0:
        raise ValueError("mu and r must be positive")
    opts = config._quad_opts()

    def below(u):
        return -2.0 / _SQRT_PI * math.exp(-mu * u * u)

    def sing(u):
        return 2.0 / _SQRT_PI * math.exp(-mu * (r + u * u))

    def smooth(s):
        return -math.exp(-mu * s) / (_SQRT_PI * math.sqrt(s))

    total = quad(below, 0.0, math.sqrt(r), **opts)[0]
    total += quad(sing, 0.0, np.inf, **opts)[0]
    total += quad(smooth, r, np.inf, **opts)[0]
    return abs(math.sqrt(mu) * total - math.expm1(-mu * r))


def smoothing_identity_residual(mu: float, t: float,
                                config: KernelConfig = KernelConfig()) -> float:
    """|m_t(mu) - 1 + sqrt(mu) int_0^inf Q(s, t) h_s(mu) ds| by quadrature.

    h_s is the running-average multiplier (1 - e^{-mu s}) / (mu s); see the
    module docstring for why the by-parts identity produces it rather than
    the smoothing multiplier itself.  Substitutions as in the mass integral;
    the tail past the cutoff decays like s^{-5/2} once h_s(mu) ~ 1/(mu s),
    so the cutoff is extended to 2t + 80/mu when that is larger.
    """
    if mu <= 0 or t <= 0:
        raise ValueError("mu and t must be positive")
    opts = config._quad_opts()

    def hsub(s):
        return float(_hopf_factor(np.asarray([mu * s]))[0])

    def sub(p, shift, hi):
        def g(u):
            return _slope_jacobian(t, p, u) * hsub(shift + u * u)

        return quad(g, 0.0, math.sqrt(hi - shift), **opts)[0]

    def tail(lo):
        # split h_s = 1/(mu s) - e^{-mu s}/(mu s) past the cutoff; the first
        # part is exact via int_v^inf Q(s,t)/s ds = -U(v,t), the second is
        # exponentially damped and truncated once e^{-mu s} is negligible
        def g_corr(s):
            return -slope_kernel(s, t) * math.exp(-mu * s) / (mu * s)

        hi = lo + 80.0 / mu
        return -averaged_kernel(lo, t) / mu + quad(g_corr, lo, hi, **opts)[0]

    mlhs = float(_smoothing_factor(np.asarray([mu * t]))[0])
    T = config.tail_cutoff * t
    total = sub(1, 0.0, t) + sub(2, t, 2.0 * t) + sub(3, 2.0 * t, T)
    total += tail(T)
    return abs(mlhs - 1.0 + math.sqrt(mu) * total)


@dataclass(frozen=True, eq=False)
class RateBound:
    """Outcome of the pointwise smoothing rate check over times and points."""

    t_values: np.ndarray
    c_value: float
    lhs: np.ndarray       # (T, P): |A_t f - f| at each point, per time
    sup_term: np.ndarray  # (P,): grid sup over s of A_s |sqrt(-L) f|

    @property
    def rhs(self) -> np.ndarray:
        return self.c_value * np.sqrt(self.t_values)[:, None] * self.sup_term[None, :]

    @property
    def slack(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def min_slack(self) -> float:
        return float(self.slack.min())


def _basis_matrix(f: HermiteSeries, X: np.ndarray) -> np.ndarray:
    """B[p, m] = value of the m-th basis element of f at point p."""
    idx = f.index_array
    q = f.model.variances
    deg = int(idx.max(initial=0))
    B = np.ones((X.shape[0], idx.shape[0]))
    for i in range(f.model.d):
        tab = orthonormal_axis_table(X[:, i], deg, q[i])
        B *= tab[:, idx[:, i]]
    return B


def smoothing_rate_slack(f: HermiteSeries, t_values, X, c_num: float | None = None,
                         order: int = 16, s_min: float = 1e-4, s_max: float = 1e3,
                         s_per_decade: int = 64, u_per_decade: int = 32) -> RateBound:
    """Check |A_t f - f|(x) <= c sqrt(t) sup_s A_s |sqrt(-L) f|(x) pointwise,
    batched over a whole grid of times t and a batch of points x.

    The left side is spectral and exact.  The sup over s is shared by every t
    and taken over a log grid with s_per_decade points per decade; a grid sup
    only shrinks the right side, so nonnegative slack certifies the bound.
    The default constant carries a 5% margin over the kernel mass to absorb
    quadrature error in the A_s values themselves.
    """
    if c_num is None:
        c_num = 1.05 * SLOPE_KERNEL_MASS_UNIT
    model = f.model
    X = np.atleast_2d(np.asarray(X, dtype=float))
    t_values = np.atleast_1d(np.asarray(t_values, dtype=float))
    if np.any(t_values <= 0):
        raise ValueError("times must be positive")
    idx, val = f.index_array, f.coeff_array
    B = _basis_matrix(f, X)
    fx = B @ val
    mus = idx @ model.rates
    factors = _smoothing_factor(np.outer(t_values, mus))
    lhs = np.abs((factors * val) @ B.T - fx[None, :])
    g = apply(f, sqrt_gen())
    n_s = max(int(math.ceil(s_per_decade * math.log10(s_max / s_min))), 2) + 1
    s_grid = np.geomspace(s_min, s_max, n_s)
    F = smoothing_series_grid([g], model, s_grid, X, order=order,
                              combine="abs", u_per_decade=u_per_decade)
    return RateBound(t_values=t_values, c_value=float(c_num),
                     lhs=lhs, sup_term=F.max(axis=0))
