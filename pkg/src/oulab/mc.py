"""Path-sampling oracles for the level-process identities.

The level process is a Brownian motion with generator d^2/da^2 (so
quadratic variation 2 ds) started at N > 0 and absorbed at 0, run jointly
with an independent stationary process X in the Gaussian model.  Three
exact facts make it a useful oracle:

  * hitting law:   P(tau <= t) = erfc(N / (2 sqrt(t))),
  * occupation:    E int_0^tau zeta(B_s, X_s) ds
                       = int_0^inf (N ^ a) int zeta(a, .) dm da,
  * square moments of the stopped martingales built from the level
    extension R_a f = exp(-a sqrt(alpha - L)) f, with coefficientwise
    closed forms recorded next to the estimators.

Paths use the exact transition for X, bridge-corrected absorption for the
level, and an exact excursion jump above a configurable ceiling: from
a = ceiling + delta the time to return to the ceiling is delta^2 / (2 Z^2)
in law, so the long harmless excursions cost one step each.  Quantities
accumulated only below the ceiling are biased by the (computable) part of
the occupation integral above it; the bias bound rides along in the
results instead of being waved away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from .model import GaussianModel, HermiteSeries, QuadratureGrid, orthonormal_axis_table

__all__ = [
    "PathConfig",
    "MCEstimate",
    "HittingSample",
    "OccupationResult",
    "MartingaleResult",
    "VectorMomentResult",
    "SubordinationResult",
    "hitting_cdf",
    "sample_ou",
    "sample_hitting",
    "occupation_check",
    "martingale_moment_check",
    "vector_moment_check",
    "subordinator_density",
    "subordination_check",
]

_EVENT_CAP = 3_000_000


@dataclass(frozen=True)
class PathConfig:
    """Discretization request for the level-process engine.

    jump_level is the excursion ceiling: large enough that what happens
    above it is negligible for decaying integrands, small enough that the
    walk back down stays cheap.
    """

    dt: float = 1e-3
    t_max: float = 1e8
    paths: int = 100_000
    seed: int = 0
    start_level: float = 1.0
    jump_level: float = 12.0

    def __post_init__(self):
        if not (0.0 < self.dt <= 1e-2):
            raise ValueError("dt must lie in (0, 1e-2]")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.paths < 1:
            raise ValueError("paths must be at least 1")
        if not (0.0 < self.start_level <= self.jump_level):
            raise ValueError("need 0 < start_level <= jump_level")


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    paths: int
    truncated: float      # fraction of paths censored by horizon or step cap


def _estimate(values: np.ndarray, truncated: float) -> MCEstimate:
    n = values.size
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return MCEstimate(float(values.mean()), se, n, truncated)


def hitting_cdf(start_level: float, t) -> np.ndarray:
    """P(tau <= t) for the absorbed level process started at start_level."""
    t = np.asarray(t, dtype=float)
    out = np.where(t > 0, erfc(start_level / (2.0 * np.sqrt(np.maximum(t, 1e-300)))), 0.0)
    return out if out.ndim else float(out)


def sample_ou(model: GaussianModel, X: np.ndarray, h, rng: np.random.Generator):
    """One exact transition step of the stationary process over time h.

    h may be a scalar or one value per row.  Returns (X_next, noise) with
    noise the stochastic part of the step, i.e. sigma dW to leading order.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    h = np.asarray(h, dtype=float)
    lam = model.rates
    q = model.variances
    lh = np.multiply.outer(h, lam) if h.ndim else h * lam
    decay = np.exp(-lh)
    sig = np.sqrt(q * (-np.expm1(-2.0 * lh)))
    noise = sig * rng.standard_normal(X.shape)
    return X * decay + noise, noise


@dataclass(frozen=True, eq=False)
class HittingSample:
    tau: np.ndarray
    censored: np.ndarray  # bool; tau holds the censor time there


def sample_hitting(cfg: PathConfig, *, bridge: bool = True,
                   rng: np.random.Generator | None = None,
                   max_steps: int = _EVENT_CAP) -> HittingSample:
    """Absorption times of the level process.

    bridge=False disables the within-step crossing correction and is kept
    for measuring the bias the correction removes.
    """
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([cfg.seed, 0x6869])))
    n = cfg.paths
    tau = np.full(n, cfg.t_max)
    censored = np.ones(n, dtype=bool)
    idx = np.arange(n)
    B = np.full(n, cfg.start_level)
    t = np.zeros(n)
    root2dt = math.sqrt(2.0 * cfg.dt)
    for _ in range(max_steps):
        if idx.size == 0:
            break
        up = B > cfg.jump_level
        if np.any(up):
            delta = B[up] - cfg.jump_level
            z = rng.standard_normal(delta.size)
            t[up] += delta * delta / (2.0 * z * z)
            B[up] = cfg.jump_level
        zeta = rng.standard_normal(B.size)
        B2 = B + root2dt * zeta
        hit = B2 <= 0.0
        if bridge:
            alive = ~hit
            p = np.exp(-B[alive] * B2[alive] / cfg.dt)
            hit[alive] = rng.random(alive.sum()) < p
        t += cfg.dt
        done_hit = hit
        done_cens = (~hit) & (t >= cfg.t_max)
        if np.any(done_hit):
            tau[idx[done_hit]] = t[done_hit] - 0.5 * cfg.dt
            censored[idx[done_hit]] = False
        keep = ~(done_hit | done_cens)
        if not np.all(keep):
            idx, B, t = idx[keep], B2[keep], t[keep]
        else:
            B = B2
    return HittingSample(tau, censored)


def _level_profile(zeta: Callable, model: GaussianModel, order: int):
    """a -> int zeta(a, .) dm via a cached tensor grid."""
    grid = QuadratureGrid.gauss_hermite(model, order)
    nodes = grid.tensor_nodes()
    w = grid.tensor_weights()

    def zbar(a: float) -> float:
        vals = np.asarray(zeta(np.full(nodes.shape[0], a), nodes), dtype=float)
        return float(vals @ w)

    return zbar


@dataclass(frozen=True)
class OccupationResult:
    lhs: MCEstimate       # path estimate of E int_0^tau zeta
    rhs: float            # quadrature of int (N ^ a) zbar(a) da; inf if divergent
    bias_bound: float     # skipped excursions + censored tails
    diverged: bool


def occupation_check(zeta: Callable, model: GaussianModel, cfg: PathConfig, *,
                     order: int = 32, tail_start: float = 50.0,
                     max_steps: int = _EVENT_CAP) -> OccupationResult:
    """Occupation identity check for zeta(levels, states).

    The quadrature side decides convergence from two doubling tail pieces
    before anything is trusted: a flat profile (zeta = 1 in the level) has
    both sides infinite and must be reported as divergent, not compared.
    """
    N = cfg.start_level
    zbar = _level_profile(zeta, model, order)
    A = max(tail_start, 4.0 * cfg.jump_level)
    t1 = quad(lambda a: N * zbar(a), A, 2 * A, limit=200)[0]
    t2 = quad(lambda a: N * zbar(a), 2 * A, 4 * A, limit=200)[0]
    diverged = not (abs(t2) <= 0.6 * abs(t1) or (abs(t1) < 1e-12 and abs(t2) < 1e-12))

    if diverged:
        rhs = math.inf
        bias = math.inf
    else:
        below = quad(lambda a: min(N, a) * zbar(a), 0.0, N, limit=200)[0]
        mid = quad(lambda a: N * zbar(a), N, A, limit=200)[0]
        tail = quad(lambda a: N * zbar(a), 4 * A, np.inf, limit=200)[0]
        rhs = below + mid + t1 + t2 + tail
        # occupation above the excursion ceiling is never accumulated
        skip = quad(lambda a: N * zbar(a), cfg.jump_level, np.inf, limit=200)[0]
        # a censored path still owes at most int b zbar(b) db
        owe = quad(lambda a: a * zbar(a), 0.0, np.inf, limit=200)[0]
        bias = abs(skip)

    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([cfg.seed, 0x6F63])))
    n = cfg.paths
    acc = np.zeros(n)
    done_trunc = np.zeros(n, dtype=bool)
    idx = np.arange(n)
    B = np.full(n, N)
    X = model.sample(n, rng)
    t = np.zeros(n)
    lam = model.rates
    q = model.variances
    decay = np.exp(-lam * cfg.dt)
    sig = np.sqrt(q * (-np.expm1(-2.0 * lam * cfg.dt)))
    root2dt = math.sqrt(2.0 * cfg.dt)
    part = np.zeros(n)

    for _ in range(max_steps):
        if idx.size == 0:
            break
        up = B > cfg.jump_level
        if np.any(up):
            delta = B[up] - cfg.jump_level
            z = rng.standard_normal(delta.size)
            dtj = delta * delta / (2.0 * z * z)
            t[up] += dtj
            B[up] = cfg.jump_level
            X[up] = X[up] * np.exp(-np.multiply.outer(dtj, lam)) \
                + np.sqrt(q * (-np.expm1(-2.0 * np.multiply.outer(dtj, lam)))) \
                * rng.standard_normal((int(up.sum()), model.d))
        z0 = np.asarray(zeta(B, X), dtype=float)
        zeta_b = rng.standard_normal(B.size)
        B2 = B + root2dt * zeta_b
        X2 = X * decay + sig * rng.standard_normal(X.shape)
        z1 = np.asarray(zeta(np.maximum(B2, 0.0), X2), dtype=float)
        hit = B2 <= 0.0
        alive = ~hit
        p = np.exp(-B[alive] * B2[alive] / cfg.dt)
        hit[alive] = rng.random(int(alive.sum())) < p
        t += cfg.dt
        step_acc = np.where(hit, 0.5 * cfg.dt * z0, 0.5 * cfg.dt * (z0 + z1))
        part += step_acc
        cens = (~hit) & (t >= cfg.t_max)
        keep = ~(hit | cens)
        if not np.all(keep):
            retired = ~keep
            acc[idx[retired]] = part[retired]
            done_trunc[idx[retired]] = cens[retired]
            idx, B, X, t, part = idx[keep], B2[keep], X2[keep], t[keep], part[keep]
        else:
            B, X = B2, X2
    if idx.size:
        acc[idx] = part
        done_trunc[idx] = True

    trunc = float(done_trunc.mean())
    if not diverged:
        bias = bias + trunc * abs(owe)
    return OccupationResult(_estimate(acc, trunc), rhs, bias, diverged)


def _mode_arrays(f: HermiteSeries, alpha: float):
    idx = f.index_array
    c = f.coeff_array
    mu = idx @ f.model.rates
    kappa = np.sqrt(alpha + mu)
    return idx, c, mu, kappa


def _mode_values(X: np.ndarray, idx: np.ndarray, model: GaussianModel):
    """H[n, j] = orthonormal basis value of mode j at row n, plus the per-axis
    tables for derivative gathers."""
    d = model.d
    q = model.variances
    tabs = []
    cols = []
    for i in range(d):
        tab = orthonormal_axis_table(X[:, i], int(idx[:, i].max(initial=0)), q[i])
        tabs.append(tab)
        cols.append(tab[:, idx[:, i]])
    H = cols[0].copy()
    for i in range(1, d):
        H *= cols[i]
    return H, tabs, cols


@dataclass(frozen=True)
class MartingaleResult:
    """Second (and first) moments of the stopped level and space martingales
    against their coefficientwise predictions."""

    level: MCEstimate
    space: MCEstimate
    level_first: MCEstimate
    space_first: MCEstimate
    level_pred: float
    space_pred: float
    level_limit: float        # start_level -> inf value
    space_limit: float
    level_bias: float         # excursion skip + censoring, second moments
    space_bias: float


def martingale_moment_check(f: HermiteSeries, alpha: float, cfg: PathConfig, *,
                            max_steps: int = _EVENT_CAP) -> MartingaleResult:
    """Simulate the stopped martingales of the level extension of f.

    With R_a f = exp(-a sqrt(alpha - L)) f and kappa_j = sqrt(alpha + mu_j):

      level part   M = - int d/da R_a f (X_s) dB_s,
      space part   M' = martingale part of R_{B_s} f (X_s) in the state,

    and the occupation identity collapses both second moments:

      E M^2  = 1/2 sum_j c_j^2 (1 - e^{-2 N kappa_j}),
      E M'^2 = 1/2 sum_j mu_j / (alpha + mu_j) c_j^2 (1 - e^{-2 N kappa_j}).

    Both first moments vanish by optional stopping.  The space prediction
    is convention-free because the diffusion coefficients are tied to the
    rates by stationarity.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    model = f.model
    idx, c, mu, kappa = _mode_arrays(f, alpha)
    N = cfg.start_level

    with np.errstate(invalid="ignore", divide="ignore"):
        wobble = -np.expm1(-2.0 * N * kappa)
        level_terms = 0.5 * c * c * wobble
        ratio = np.where(mu > 0, mu / np.where(mu > 0, alpha + mu, 1.0), 0.0)
        space_terms = level_terms * ratio
    level_pred = float(level_terms.sum())
    space_pred = float(space_terms.sum())
    level_limit = float((0.5 * c * c * (kappa > 0)).sum())
    space_limit = float((0.5 * c * c * ratio).sum())

    # never-accumulated excursions and censored tails, priced in closed form
    ksafe = np.where(kappa > 0, kappa, 1.0)
    skip_level = float((N * ksafe * c * c * np.exp(-2.0 * cfg.jump_level * kappa)
                        * (kappa > 0)).sum())
    skip_space = float((N * (mu / ksafe) * c * c
                        * np.exp(-2.0 * cfg.jump_level * kappa) * (kappa > 0)).sum())

    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([cfg.seed, 0x6D61])))
    n = cfg.paths
    mlev_out = np.zeros(n)
    mspc_out = np.zeros(n)
    done_trunc = np.zeros(n, dtype=bool)
    idx_path = np.arange(n)
    B = np.full(n, N)
    X = model.sample(n, rng)
    t = np.zeros(n)
    mlev = np.zeros(n)
    mspc = np.zeros(n)
    lam = model.rates
    q = model.variances
    decay = np.exp(-lam * cfg.dt)
    sig = np.sqrt(q * (-np.expm1(-2.0 * lam * cfg.dt)))
    root2dt = math.sqrt(2.0 * cfg.dt)
    d = model.d
    dshift = [np.sqrt(idx[:, i] / q[i]) for i in range(d)]
    ck = c * kappa

    for _ in range(max_steps):
        if idx_path.size == 0:
            break
        up = B > cfg.jump_level
        if np.any(up):
            delta = B[up] - cfg.jump_level
            z = rng.standard_normal(delta.size)
            dtj = delta * delta / (2.0 * z * z)
            t[up] += dtj
            B[up] = cfg.jump_level
            X[up] = X[up] * np.exp(-np.multiply.outer(dtj, lam)) \
                + np.sqrt(q * (-np.expm1(-2.0 * np.multiply.outer(dtj, lam)))) \
                * rng.standard_normal((int(up.sum()), d))
        H, tabs, cols = _mode_values(X, idx, model)
        E = np.exp(-np.multiply.outer(B, kappa))      # (n, modes)
        zeta_b = rng.standard_normal(B.size)
        dB = root2dt * zeta_b
        B2 = B + dB
        hit = B2 <= 0.0
        alive = ~hit
        p = np.exp(-B[alive] * B2[alive] / cfg.dt)
        hit[alive] = rng.random(int(alive.sum())) < p
        dB_eff = np.where(hit, -B, dB)
        mlev += (E * ck * H).sum(axis=1) * dB_eff
        noise = sig * rng.standard_normal(X.shape)
        X2 = X * decay + noise
        for i in range(d):
            gath = tabs[i][:, np.maximum(idx[:, i] - 1, 0)]
            Hi = (E * (c * dshift[i])) * gath
            for k in range(d):
                if k != i:
                    Hi *= cols[k]
            mspc += Hi.sum(axis=1) * noise[:, i]
        t += cfg.dt
        cens = (~hit) & (t >= cfg.t_max)
        keep = ~(hit | cens)
        if not np.all(keep):
            retired = ~keep
            mlev_out[idx_path[retired]] = mlev[retired]
            mspc_out[idx_path[retired]] = mspc[retired]
            done_trunc[idx_path[retired]] = cens[retired]
            idx_path, B, X, t = idx_path[keep], B2[keep], X2[keep], t[keep]
            mlev, mspc = mlev[keep], mspc[keep]
        else:
            B, X = B2, X2
    if idx_path.size:
        mlev_out[idx_path] = mlev
        mspc_out[idx_path] = mspc
        done_trunc[idx_path] = True

    trunc = float(done_trunc.mean())
    level_bias = skip_level + trunc * level_limit
    space_bias = skip_space + trunc * space_limit
    return MartingaleResult(
        _estimate(mlev_out * mlev_out, trunc),
        _estimate(mspc_out * mspc_out, trunc),
        _estimate(mlev_out, trunc),
        _estimate(mspc_out, trunc),
        level_pred, space_pred, level_limit, space_limit,
        level_bias, space_bias,
    )


@dataclass(frozen=True)
class VectorMomentResult:
    total: MCEstimate
    prediction: float
    limit: float              # 1/2 sum_i ||g_i||^2 as start_level -> inf
    parts: tuple


def vector_moment_check(series_list: Sequence[HermiteSeries], alpha: float,
                        cfg: PathConfig, *,
                        max_steps: int = _EVENT_CAP) -> VectorMomentResult:
    """Level-martingale moments for a vector field, one coordinate at a time.

    Coordinate i runs with the shifted parameter alpha + lambda_i, which is
    how a gradient field enters the commutation identities; the summed
    second moment tends to half the squared L^2 norm of the field.
    """
    series_list = list(series_list)
    if not series_list:
        raise ValueError("empty vector field")
    model = series_list[0].model
    parts = []
    for i, g in enumerate(series_list):
        sub = PathConfig(cfg.dt, cfg.t_max, cfg.paths, cfg.seed + 7919 * (i + 1),
                         cfg.start_level, cfg.jump_level)
        parts.append(martingale_moment_check(g, alpha + float(model.rates[i]), sub,
                                             max_steps=max_steps))
    mean = sum(p.level.mean for p in parts)
    se = math.sqrt(sum(p.level.stderr ** 2 for p in parts))
    trunc = max(p.level.truncated for p in parts)
    pred = sum(p.level_pred for p in parts)
    limit = sum(p.level_limit for p in parts)
    est = MCEstimate(mean, se, cfg.paths, trunc)
    return VectorMomentResult(est, pred, limit, tuple(parts))


def subordinator_density(v) -> np.ndarray:
    """Density of the normalized one-sided stable subordinating measure,
    rho(v) = v^{-3/2} exp(-1/(4v)) / (2 sqrt(pi)) on v > 0."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape if v.ndim else ())
    pos = v > 0
    vv = np.where(pos, v, 1.0)
    val = np.power(vv, -1.5) * np.exp(-0.25 / vv) / (2.0 * math.sqrt(math.pi))
    out = np.where(pos, val, 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class SubordinationResult:
    mass_residual: float
    gammas: np.ndarray
    ts: np.ndarray
    residuals: np.ndarray     # |Laplace transform - exp(-t sqrt(gamma))|


def subordination_check(gammas=(0.25, 1.0, 4.0),
                        ts=(0.5, 1.0, 2.0)) -> SubordinationResult:
    """Validate the subordination identity exp(-t sqrt(g)) = E exp(-g t^2 V).

    The substitution s = t^2 v removes t from the density, so one mass
    check covers every t; the Laplace residuals are then pinned per pair.
    """
    gammas = np.asarray(gammas, dtype=float)
    ts = np.asarray(ts, dtype=float)
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
    mass = quad(subordinator_density, 0.0, 1.0, **opts)[0] \
        + quad(subordinator_density, 1.0, np.inf, **opts)[0]
    res = np.empty((gammas.size, ts.size))
    for a, g in enumerate(gammas):
        for b, t in enumerate(ts):
            scale = g * t * t

            def igr(v):
                return subordinator_density(v) * math.exp(-scale * v)

            val = quad(igr, 0.0, 1.0, **opts)[0] + quad(igr, 1.0, np.inf, **opts)[0]
            res[a, b] = abs(val - math.exp(-t * math.sqrt(g)))
    return SubordinationResult(abs(mass - 1.0), gammas, ts, res)
