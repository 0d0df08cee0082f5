"""Suite runners, the JSON report, and the CSV plot-data emitters.

A run is described by a strict JSON config (unknown keys are rejected at
every level, so typos fail loudly instead of silently running defaults).
Each suite produces flat check records {suite, id, claim, status, value,
tolerance}; everything volatile (wall-clock timestamp, per-suite runtimes)
lives in the single "timestamp" object so that two runs with the same
config and seed produce byte-identical reports outside it.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import kernels as K
from . import mc as MC
from .lusin import (
    TGrid,
    extension_lipschitz_ratio,
    lusin_pair_check,
    lusin_sweep,
    mcshane_extend,
    weak11_check,
)
from .mehler import (
    PointwiseFunction,
    lipschitz_bound_slacks,
    log_convexity_slacks,
    mehler_apply_batch,
    smoothing_apply_batch,
    smoothing_log_convexity_slacks,
)
from .model import GaussianModel, HermiteSeries, QuadratureGrid, multi_indices_up_to, series_eval
from .orlicz import (
    l1_norm,
    luxemburg_norm,
    meyer_forward_check,
    meyer_reverse_check,
    phi,
    phi_product_bound_check,
    poincare_check,
    resolvent_root_l1_check,
)
from .spectral import _smoothing_factor, apply, check_commutation, dirichlet_pairing, semigroup, smoothing, sqrt_gen

__all__ = [
    "TOOL_NAME",
    "TOOL_VERSION",
    "SUITE_NAMES",
    "RunConfig",
    "run_suites",
    "write_report",
    "load_report",
    "summarize",
    "emit_plot_data",
]

TOOL_NAME = "oulab"
TOOL_VERSION = "0.1.0"

SUITE_NAMES = ("kernels", "spectral", "mehler", "orlicz", "meyer", "lusin", "mc")

_E_MINUS_1 = math.e - 1.0


def _take(d: dict, where: str, allowed: tuple) -> None:
    unknown = set(d) - set(allowed)
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True)
class RunConfig:
    """Parsed, resolved run description."""

    model: GaussianModel
    cap: int
    order: int
    tgrid: TGrid
    mc: MC.PathConfig
    suites: tuple
    epsilons: tuple
    out: str

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        _take(raw, "config", ("model", "cap", "quadrature", "t_grid", "mc",
                              "suites", "epsilons", "out"))
        m = dict(raw.get("model", {}))
        _take(m, "model", ("dimension", "convention", "rates"))
        dim = int(m.get("dimension", 1))
        conv = m.get("convention", "standard")
        if conv == "standard":
            if "rates" in m:
                raise ValueError("rates are fixed at 1 in the standard convention")
            model = GaussianModel.standard(dim)
        elif conv == "general":
            rates = [float(r) for r in m.get("rates", [1.0] * dim)]
            if len(rates) != dim:
                raise ValueError("rates length must match dimension")
            model = GaussianModel.general(rates)
        else:
            raise ValueError(f"unknown convention {conv!r}")

        q = dict(raw.get("quadrature", {}))
        _take(q, "quadrature", ("order",))
        order = int(q.get("order", 32))

        tg = dict(raw.get("t_grid", {}))
        _take(tg, "t_grid", ("t_min", "t_max", "per_decade"))
        tgrid = TGrid(float(tg.get("t_min", 1e-3)), float(tg.get("t_max", 10.0)),
                      int(tg.get("per_decade", 16)))

        mcd = dict(raw.get("mc", {}))
        _take(mcd, "mc", ("dt", "paths", "t_max", "seed", "start_level", "jump_level"))
        mccfg = MC.PathConfig(
            dt=float(mcd.get("dt", 2e-3)),
            t_max=float(mcd.get("t_max", 1e6)),
            paths=int(mcd.get("paths", 20_000)),
            seed=int(mcd.get("seed", 0)),
            start_level=float(mcd.get("start_level", 1.0)),
            jump_level=float(mcd.get("jump_level", 12.0)),
        )

        suites = tuple(raw.get("suites", SUITE_NAMES))
        for s in suites:
            if s not in SUITE_NAMES:
                raise ValueError(f"unknown suite {s!r}")
        epsilons = tuple(float(e) for e in raw.get("epsilons", [0.1]))
        out = str(raw.get("out", "out"))
        return cls(model, int(raw.get("cap", 8)), order, tgrid, mccfg,
                   suites, epsilons, out)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def with_seed(self, seed: int) -> "RunConfig":
        mc2 = MC.PathConfig(self.mc.dt, self.mc.t_max, self.mc.paths, seed,
                            self.mc.start_level, self.mc.jump_level)
        return RunConfig(self.model, self.cap, self.order, self.tgrid, mc2,
                         self.suites, self.epsilons, self.out)

    def to_dict(self) -> dict:
        # rates are implied (all 1) in the standard convention; emitting
        # them would make the dict unreadable by from_dict
        m = {"dimension": self.model.d, "convention": self.model.convention}
        if self.model.convention == "general":
            m["rates"] = [float(r) for r in self.model.rates]
        return {
            "model": m,
            "cap": self.cap,
            "quadrature": {"order": self.order},
            "t_grid": {"t_min": self.tgrid.t_min, "t_max": self.tgrid.t_max,
                       "per_decade": self.tgrid.per_decade},
            "mc": {"dt": self.mc.dt, "paths": self.mc.paths, "t_max": self.mc.t_max,
                   "seed": self.mc.seed, "start_level": self.mc.start_level,
                   "jump_level": self.mc.jump_level},
            "suites": list(self.suites),
            "epsilons": list(self.epsilons),
            "out": self.out,
        }


def _rec(suite: str, cid: str, claim: str, ok, value=None, tolerance=None,
         inconclusive: bool = False) -> dict:
    if inconclusive:
        status = "inconclusive"
    else:
        status = "pass" if ok else "fail"
    return {
        "suite": suite,
        "id": cid,
        "claim": claim,
        "status": status,
        "value": None if value is None else float(value),
        "tolerance": None if tolerance is None else float(tolerance),
    }


def _rng(cfg: RunConfig, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([cfg.mc.seed, tag])))


def _random_series(model: GaussianModel, cap: int, rng: np.random.Generator,
                   modes: int = 6) -> HermiteSeries:
    universe = multi_indices_up_to(model.d, cap)
    take = min(modes, len(universe))
    picks = rng.choice(len(universe), size=take, replace=False)
    coeffs = {universe[int(p)]: float(rng.normal()) for p in picks}
    return HermiteSeries(model, cap, coeffs)


# ---------------------------------------------------------------- kernels

def run_kernels(cfg: RunConfig):
    records = []
    kc = K.KernelConfig()
    mus = [0.01, 0.1, 1.0, 10.0, 100.0]

    rincr = max(K.increment_identity_residual(mu, r, kc)
                for mu in mus for r in (0.1, 1.0, 10.0))
    records.append(_rec("kernels", "increment-identity",
                        "increment kernel reproduces the semigroup increment",
                        rincr <= 1e-6, rincr, 1e-6))

    rsm = max(K.smoothing_identity_residual(mu, t, kc)
              for mu in mus for t in (0.1, 1.0, 10.0))
    records.append(_rec("kernels", "smoothing-identity",
                        "slope kernel reproduces the smoothing multiplier",
                        rsm <= 1e-6, rsm, 1e-6))

    below, mid, above = K.slope_kernel_mass_pieces(1.0, kc)
    piece_err = abs(below - 1.0 / math.sqrt(math.pi))
    records.append(_rec("kernels", "slope-mass-piece",
                        "slope kernel mass below the first breakpoint",
                        piece_err <= 1e-8, piece_err, 1e-8))

    scale_err = max(abs(K.slope_kernel_mass(t, kc)
                        - math.sqrt(t) * K.SLOPE_KERNEL_MASS_UNIT)
                    for t in (0.25, 4.0))
    records.append(_rec("kernels", "slope-mass-scaling",
                        "slope kernel mass scales like sqrt(t)",
                        scale_err <= 1e-6, scale_err, 1e-6))

    mass = K.slope_kernel_mass(1.0, kc)
    ref_err = abs(mass - K.slope_kernel_mass(1.0, kc.refined()))
    records.append(_rec("kernels", "slope-mass-refinement",
                        "slope kernel mass is stable under refinement",
                        ref_err <= 1e-6, ref_err, 1e-6))
    mass_rows = [{"t": t, "mass": K.slope_kernel_mass(t, kc),
                  "closed_form": math.sqrt(t) * K.SLOPE_KERNEL_MASS_UNIT}
                 for t in (0.25, 1.0, 4.0)]

    rng = _rng(cfg, 0x6B65)
    worst = math.inf
    for _ in range(3):
        f = _random_series(cfg.model, min(cfg.cap, 6), rng)
        X = cfg.model.sample(200, rng)
        rb = K.smoothing_rate_slack(f, cfg.tgrid.values, X)
        worst = min(worst, rb.min_slack)
    records.append(_rec("kernels", "rate-bound",
                        "smoothing error is bounded by sqrt(t) times the root sup",
                        worst >= 0.0, worst, 0.0))
    return records, {"kernel_mass": mass_rows}


# ---------------------------------------------------------------- spectral

def run_spectral(cfg: RunConfig):
    records = []
    rng = _rng(cfg, 0x7370)
    models = [cfg.model, GaussianModel.general([1.0, 2.0, 3.0])]
    worst = 0.0
    for model in models:
        for _ in range(10):
            f = _random_series(model, min(cfg.cap, 6), rng)
            t = float(rng.uniform(0.05, 2.0))
            a0 = float(rng.uniform(0.0, 2.0))
            i = int(rng.integers(model.d))
            worst = max(worst, check_commutation(f, t, a0, i))
    records.append(_rec("spectral", "commutation",
                        "coordinate derivatives intertwine the semigroup and "
                        "level operators",
                        worst <= 1e-12, worst, 1e-12))

    worst = 0.0
    for _ in range(10):
        f = _random_series(cfg.model, min(cfg.cap, 6), rng)
        g = _random_series(cfg.model, min(cfg.cap, 6), rng)
        spec_val, parts_val = dirichlet_pairing(f, g)
        worst = max(worst, abs(spec_val - parts_val) / (1.0 + abs(spec_val)))
    records.append(_rec("spectral", "dirichlet-pairing",
                        "weighted gradient pairing matches the spectral form",
                        worst <= 1e-10, worst, 1e-10))

    lo = _smoothing_factor(np.array([1e-6 * (1 - 1e-3)]))[0]
    hi = _smoothing_factor(np.array([1e-6 * (1 + 1e-3)]))[0]
    jump = abs(hi - lo)
    records.append(_rec("spectral", "multiplier-continuity",
                        "smoothing multiplier is continuous across its series switch",
                        jump <= 1e-8, jump, 1e-8))
    return records, {}


# ---------------------------------------------------------------- mehler

def _agreement(models, rng, cfg: RunConfig, use_smoothing: bool) -> float:
    worst = 0.0
    for model in models:
        f = _random_series(model, min(cfg.cap, 5), rng, modes=5)
        X = model.sample(20, rng)
        fn = lambda pts: series_eval(f, pts)
        for t in (0.1, 1.0, 10.0):
            if use_smoothing:
                via_kernel = smoothing_apply_batch(fn, model, t, X, order=cfg.order)
                via_spectral = series_eval(apply(f, smoothing(t)), X)
            else:
                via_kernel = mehler_apply_batch(fn, model, t, X, order=cfg.order)
                via_spectral = series_eval(apply(f, semigroup(t)), X)
            worst = max(worst, float(np.abs(via_kernel - via_spectral).max()))
    return worst


def run_mehler(cfg: RunConfig):
    records = []
    rng = _rng(cfg, 0x6D65)
    models = [GaussianModel.standard(2), GaussianModel.general([0.7, 1.9])]

    worst = _agreement(models, rng, cfg, use_smoothing=False)
    records.append(_rec("mehler", "semigroup-agreement",
                        "kernel quadrature matches the spectral semigroup",
                        worst <= 1e-7, worst, 1e-7))

    worst = _agreement(models, rng, cfg, use_smoothing=True)
    records.append(_rec("mehler", "smoothing-agreement",
                        "kernel quadrature matches the spectral smoothing operator",
                        worst <= 1e-7, worst, 1e-7))

    model = GaussianModel.standard(2)
    bump = PointwiseFunction("bump", lambda X: np.exp(-0.5 * (X * X).sum(axis=1)),
                             nonneg=True)
    n = 200
    X0 = model.sample(n, rng)
    X1 = model.sample(n, rng)
    S = rng.uniform(0.05, 0.95, size=n)
    worst = math.inf
    for t in (0.1, 1.0):
        slack = log_convexity_slacks(bump, model, t, X0, X1, S, order=cfg.order)
        lhs_cap = np.abs(slack) + 1.0
        worst = min(worst, float((slack + 1e-8 * lhs_cap).min()))
    records.append(_rec("mehler", "log-convexity",
                        "semigroup values are log-convex along segments",
                        worst >= 0.0, worst, 0.0))

    worst = math.inf
    for t in (0.1, 1.0):
        slack = smoothing_log_convexity_slacks(bump, model, t, X0, X1, S,
                                               order=cfg.order)
        lhs_cap = np.abs(slack) + 1.0
        worst = min(worst, float((slack + 1e-8 * lhs_cap).min()))
    records.append(_rec("mehler", "smoothing-log-convexity",
                        "smoothing values are log-convex along segments",
                        worst >= 0.0, worst, 0.0))

    f = _random_series(model, 4, rng, modes=5)
    worst = math.inf
    for t in (0.1, 1.0):
        slack = lipschitz_bound_slacks(f, t, X0[:50], X1[:50], order=16)
        worst = min(worst, float(slack.min()))
    records.append(_rec("mehler", "lipschitz-bound",
                        "smoothing increments obey the gradient average bound",
                        worst >= -1e-10, worst, 1e-10))
    return records, {}


# ---------------------------------------------------------------- orlicz

def run_orlicz(cfg: RunConfig):
    records = []
    rng = _rng(cfg, 0x6F72)
    m1 = GaussianModel.standard(1)

    err = abs(phi(_E_MINUS_1) - 1.0)
    records.append(_rec("orlicz", "phi-unit",
                        "the Young function equals 1 at e - 1",
                        err <= 1e-12, err, 1e-12))

    err = 0.0
    for c in (0.5, 2.0):
        got = luxemburg_norm(HermiteSeries(m1, 2, {(0,): c})).value
        err = max(err, abs(got - c / _E_MINUS_1))
    records.append(_rec("orlicz", "constant-norm",
                        "constants have norm c / (e - 1)",
                        err <= 1e-10, err, 1e-10))

    f = HermiteSeries(m1, 4, {(1,): 1.0, (2,): 0.5})
    g = HermiteSeries(m1, 4, {(0,): 0.3, (3,): 0.8})
    nf, ng, nfg = (luxemburg_norm(h).value for h in (f, g, f.add(g)))
    n2f = luxemburg_norm(f.scale(2.0)).value
    hom = abs(n2f - 2.0 * nf)
    records.append(_rec("orlicz", "homogeneity",
                        "the norm is positively homogeneous",
                        hom <= 1e-7, hom, 1e-7))
    tri = nf + ng - nfg
    records.append(_rec("orlicz", "triangle",
                        "the norm is subadditive",
                        tri >= -1e-7, tri, 1e-7))

    small = luxemburg_norm(lambda x: np.abs(np.atleast_2d(x)[:, 0]), m1).value
    large = luxemburg_norm(lambda x: np.abs(np.atleast_2d(x)[:, 0]) + 1.0, m1).value
    mono = large - small
    records.append(_rec("orlicz", "monotonicity",
                        "the norm is monotone in the pointwise modulus",
                        mono >= -1e-7, mono, 1e-7))

    a = np.geomspace(1e-6, 1e3, 40)
    slack = phi_product_bound_check(a[:, None], a[None, :])
    worst = float(slack.min())
    records.append(_rec("orlicz", "product-bound",
                        "the Young function obeys the product upper bound",
                        worst >= -1e-12, worst, 1e-12))

    h = HermiteSeries(m1, 4, {(0,): 0.5, (1,): 1.0, (3,): 0.4})
    nh = luxemburg_norm(h).value
    worst = -math.inf
    for t in (0.1, 1.0):
        worst = max(worst, luxemburg_norm(apply(h, semigroup(t))).value - nh)
    records.append(_rec("orlicz", "jensen-contraction",
                        "the semigroup contracts the norm",
                        worst <= 1e-7, worst, 1e-7))

    m2 = GaussianModel.standard(2)
    grid = QuadratureGrid.gauss_hermite(m2, max(cfg.order, 24))
    nodes = grid.tensor_nodes()
    w = grid.tensor_weights()
    worst = 0.0
    for t in (0.1, 1.0):
        c, s = math.exp(-t), math.sqrt(-math.expm1(-2.0 * t))
        R = np.array([[c, s], [-s, c]])
        for _ in range(5):
            p = _random_series(m2, 4, rng, modes=5)
            lhs = float(series_eval(p, nodes @ R.T) @ w)
            rhs = p.mean()
            worst = max(worst, abs(lhs - rhs))
    records.append(_rec("orlicz", "rotation-moments",
                        "the averaging rotation preserves the measure",
                        worst <= 1e-9, worst, 1e-9))

    ratios = []
    for fam in (HermiteSeries(m1, 4, {(1,): 1.0}),
                HermiteSeries(m1, 4, {(2,): 1.0, (1,): 0.3}),
                HermiteSeries(m1, 6, {(3,): 0.5, (0,): 1.0}),
                HermiteSeries(m2, 4, {(1, 0): 1.0, (0, 2): 0.5}),
                HermiteSeries(m2, 4, {(1, 1): 1.0})):
        ratios.append(poincare_check(fam, order=cfg.order))
    worst = max(ratios)
    records.append(_rec("orlicz", "poincare",
                        "centered norm is controlled by the gradient norm",
                        math.isfinite(worst), worst, None))
    return records, {}


# ---------------------------------------------------------------- meyer

def _meyer_family(cfg: RunConfig, rng: np.random.Generator):
    fams = []
    for model in (GaussianModel.standard(1), GaussianModel.general([1.4]),
                  GaussianModel.standard(2)):
        fams.append(HermiteSeries(model, 4, {(1,) * model.d: 1.0}))
        for _ in range(3):
            fams.append(_random_series(model, 4, rng, modes=4))
    return fams


def run_meyer(cfg: RunConfig):
    records = []
    rng = _rng(cfg, 0x6D79)
    fams = _meyer_family(cfg, rng)
    rows = []
    fmax = rmax = 0.0
    for i, f in enumerate(fams):
        for alpha in (0.0, 1.0):
            fwd = meyer_forward_check(f, alpha, order=cfg.order)
            rev = meyer_reverse_check(f, alpha, order=cfg.order)
            fmax = max(fmax, fwd)
            rmax = max(rmax, rev)
            rows.append({"function": f"f{i}", "dimension": f.model.d,
                         "convention": f.model.convention, "alpha": alpha,
                         "forward": fwd, "reverse": rev})
    records.append(_rec("meyer", "forward-ratio",
                        "root norm is controlled by gradient and mass norms",
                        math.isfinite(fmax), fmax, None))
    records.append(_rec("meyer", "reverse-ratio",
                        "gradient norm is controlled by the root norm",
                        math.isfinite(rmax), rmax, None))

    m1 = GaussianModel.standard(1)
    h1 = HermiteSeries(m1, 2, {(1,): 1.0})
    got = meyer_forward_check(h1, 0.0, order=cfg.order)
    expected = math.sqrt(2.0 / math.pi) * _E_MINUS_1
    err = abs(got - expected)
    records.append(_rec("meyer", "forward-unit",
                        "first mode forward ratio matches its closed form",
                        err <= 1e-6, err, 1e-6))

    probe = fams[0]
    base = meyer_forward_check(probe, 1.0, order=cfg.order)
    fine = meyer_forward_check(probe, 1.0, order=int(cfg.order * 1.5))
    drift = abs(base - fine) / base
    records.append(_rec("meyer", "refinement-stability",
                        "ratios are stable under quadrature refinement",
                        drift <= 0.05, drift, 0.05))

    worst = math.inf
    for f in fams[:4]:
        for alpha in (0.5, 2.0):
            s = resolvent_root_l1_check(f, alpha, order=cfg.order)
            scale = math.sqrt(alpha) * l1_norm(f, order=cfg.order)
            worst = min(worst, s + 1e-8 * scale)
    records.append(_rec("meyer", "resolvent-root",
                        "the normalized resolvent root is an L1 contraction",
                        worst >= 0.0, worst, 0.0))
    return records, {"meyer": rows}


# ---------------------------------------------------------------- lusin

def run_lusin(cfg: RunConfig):
    records = []
    rng = _rng(cfg, 0x6C75)
    model = cfg.model
    tgrid = cfg.tgrid

    fn = PointwiseFunction("square", lambda X: (np.atleast_2d(X) ** 2).sum(axis=1),
                           nonneg=True)
    lams = np.array([0.5, 1.0, 2.0, 4.0])
    wk = weak11_check(fn, model, lams, tgrid, samples=min(cfg.mc.paths, 20_000),
                      seed=cfg.mc.seed, order=cfg.order)
    excess = float((wk.lhs - wk.rhs - 3.0 * wk.stderr).max())
    records.append(_rec("lusin", "weak11",
                        "maximal exceedance stays below the integral bound",
                        excess <= 0.0, excess, 0.0))
    drift = float((np.abs(wk.lhs - wk.lhs_refined) - 3.0 * wk.stderr).max())
    records.append(_rec("lusin", "weak11-grid-stability",
                        "exceedance is stable under time-grid doubling",
                        drift <= 0.0, drift, 0.0))

    d = model.d
    f = HermiteSeries(model, 4, {(1,) + (0,) * (d - 1): 1.0,
                                 (2,) + (0,) * (d - 1): 0.4})
    X0 = model.sample(200, rng)
    X1 = X0 + 0.3 * model.sample(200, rng)
    res = lusin_pair_check(f, X0, X1, tgrid, order=16, u_per_decade=64)
    if np.any(res.conclusive):
        worst = float(res.slack[res.conclusive].min())
        records.append(_rec("lusin", "pair-bound",
                            "pair increments are bounded by the maximal function",
                            worst >= 0.0, worst, 0.0))
    else:
        records.append(_rec("lusin", "pair-bound",
                            "pair increments are bounded by the maximal function",
                            False, None, None, inconclusive=True))

    reports = lusin_sweep(f, cfg.epsilons, tgrid,
                          samples=min(cfg.mc.paths, 20_000), seed=cfg.mc.seed,
                          order=16, u_per_decade=64)
    rows = []
    worst_excess = -math.inf
    worst_ratio = 0.0
    worst_anchor = 0.0
    for rep in reports:
        rows.append({"eps": rep.eps, "lam_used": rep.lam_used,
                     "complement_mass": rep.complement_mass,
                     "stderr": rep.complement_stderr})
        worst_excess = max(worst_excess, rep.complement_mass - rep.eps
                           - 3.0 * rep.complement_stderr)
        P0 = model.sample(500, rng)
        P1 = model.sample(500, rng)
        worst_ratio = max(worst_ratio, extension_lipschitz_ratio(rep.anchors, P0, P1))
        back = mcshane_extend(rep.anchors, rep.anchors.points)
        worst_anchor = max(worst_anchor,
                           float(np.abs(back - rep.anchors.values).max()))
    records.append(_rec("lusin", "complement-mass",
                        "bad set mass stays within the eps budget",
                        worst_excess <= 0.0, worst_excess, 0.0))
    records.append(_rec("lusin", "extension-lipschitz",
                        "the extension is Lipschitz with the advertised constant",
                        worst_ratio <= 1.0 + 1e-9, worst_ratio, 1.0 + 1e-9))
    records.append(_rec("lusin", "extension-anchors",
                        "the extension interpolates the anchors",
                        worst_anchor <= 1e-9, worst_anchor, 1e-9))
    return records, {"lusin": rows}


# ---------------------------------------------------------------- mc

def run_mc(cfg: RunConfig):
    records = []
    sub = MC.subordination_check()
    records.append(_rec("mc", "subordination-mass",
                        "the subordinating density integrates to one",
                        sub.mass_residual <= 1e-8, sub.mass_residual, 1e-8))
    lap = float(sub.residuals.max())
    records.append(_rec("mc", "subordination-laplace",
                        "the subordinating density reproduces the root decay",
                        lap <= 1e-8, lap, 1e-8))

    hit_cfg = MC.PathConfig(cfg.mc.dt, min(cfg.mc.t_max, 1e4),
                            min(cfg.mc.paths, 20_000), cfg.mc.seed,
                            1.0, cfg.mc.jump_level)
    hs = MC.sample_hitting(hit_cfg)
    worst_z = 0.0
    for t in (0.5, 2.0, 8.0):
        emp = float(((hs.tau <= t) & ~hs.censored).mean())
        ana = MC.hitting_cdf(1.0, t)
        se = math.sqrt(ana * (1.0 - ana) / hit_cfg.paths)
        worst_z = max(worst_z, abs(emp - ana) / se)
    records.append(_rec("mc", "hitting-law",
                        "absorption times match the closed-form law",
                        worst_z <= 4.0, worst_z, 4.0))

    model = cfg.model
    occ = MC.occupation_check(lambda a, x: np.exp(-a), model, cfg.mc,
                              order=cfg.order)
    gap = abs(occ.lhs.mean - occ.rhs)
    tol = 3.0 * occ.lhs.stderr + occ.bias_bound
    records.append(_rec("mc", "occupation",
                        "path occupation matches the level-measure integral",
                        (not occ.diverged) and gap <= tol, gap, tol))

    mart_cfg = MC.PathConfig(cfg.mc.dt, cfg.mc.t_max,
                             max(cfg.mc.paths // 2, 1000), cfg.mc.seed,
                             min(2.0, cfg.mc.jump_level), cfg.mc.jump_level)
    f = HermiteSeries(model, 3, {(1,) + (0,) * (model.d - 1): 1.0,
                                 (2,) + (0,) * (model.d - 1): 0.6})
    mm = MC.martingale_moment_check(f, 0.5, mart_cfg)
    gap = abs(mm.level.mean - mm.level_pred)
    tol = 3.0 * mm.level.stderr + mm.level_bias
    records.append(_rec("mc", "martingale-level",
                        "level martingale second moment matches its prediction",
                        gap <= tol, gap, tol))
    gap = abs(mm.space.mean - mm.space_pred)
    tol = 3.0 * mm.space.stderr + mm.space_bias
    records.append(_rec("mc", "martingale-space",
                        "state martingale second moment matches its prediction",
                        gap <= tol, gap, tol))
    gap = abs(mm.level_first.mean)
    tol = 3.0 * mm.level_first.stderr
    records.append(_rec("mc", "martingale-centered",
                        "stopped martingales have mean zero",
                        gap <= tol, gap, tol))
    return records, {}


_RUNNERS = {
    "kernels": run_kernels,
    "spectral": run_spectral,
    "mehler": run_mehler,
    "orlicz": run_orlicz,
    "meyer": run_meyer,
    "lusin": run_lusin,
    "mc": run_mc,
}


def run_suites(cfg: RunConfig) -> dict:
    """Run the configured suites and assemble the report dictionary."""
    checks = []
    tables = {}
    runtimes = {}
    for name in cfg.suites:
        start = time.perf_counter()
        try:
            recs, tabs = _RUNNERS[name](cfg)
            checks.extend(recs)
            tables.update(tabs)
        except Exception as exc:  # a broken suite must not take the run down
            checks.append({**_rec(name, "run", "suite runs to completion", False),
                           "detail": f"{type(exc).__name__}: {exc}"})
        runtimes[name] = round(time.perf_counter() - start, 3)
    summary = {
        "pass": sum(1 for c in checks if c["status"] == "pass"),
        "fail": sum(1 for c in checks if c["status"] == "fail"),
        "inconclusive": sum(1 for c in checks if c["status"] == "inconclusive"),
    }
    return {
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "config": cfg.to_dict(),
        "checks": checks,
        "summary": summary,
        "tables": tables,
        "timestamp": {
            "written_at": datetime.now(timezone.utc).isoformat(),
            "runtimes": runtimes,
        },
    }


def write_report(report: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def summarize(report: dict) -> str:
    lines = []
    for c in report["checks"]:
        mark = {"pass": "PASS", "fail": "FAIL", "inconclusive": "INCONCLUSIVE"}[c["status"]]
        val = "-" if c["value"] is None else f"{c['value']:.6g}"
        tol = "-" if c["tolerance"] is None else f"{c['tolerance']:.6g}"
        lines.append(f"[{mark}] {c['suite']}/{c['id']}: {c['claim']} "
                     f"(value {val}, tolerance {tol})")
    s = report["summary"]
    lines.append(f"summary: {s['pass']} pass, {s['fail']} fail, "
                 f"{s['inconclusive']} inconclusive")
    return "\n".join(lines)


def _write_csv(path: Path, rows: list, fieldnames: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def emit_plot_data(kind: str, out_dir, report: dict | None = None) -> Path:
    """Write one plot-ready CSV; table-backed kinds need a report that ran
    the corresponding suite."""
    out = Path(out_dir)
    if kind == "kernel-curves":
        s = np.geomspace(1e-2, 1e2, 241)
        s[np.isclose(s, 1.0) | np.isclose(s, 2.0)] *= 1.0 + 1e-9
        rows = [{"s": float(v),
                 "averaged": float(K.averaged_kernel(v, 1.0)),
                 "slope": float(K.slope_kernel(v, 1.0))}
                for v in s]
        path = out / "kernel_curves.csv"
        _write_csv(path, rows, ["s", "averaged", "slope"])
        return path
    if kind == "ratio-tables":
        if report is None or "meyer" not in report.get("tables", {}):
            raise ValueError("ratio-tables needs a report with the meyer suite")
        rows = report["tables"]["meyer"]
        path = out / "ratio_tables.csv"
        _write_csv(path, rows, ["function", "dimension", "convention",
                                "alpha", "forward", "reverse"])
        return path
    if kind == "lusin-mass":
        if report is None or "lusin" not in report.get("tables", {}):
            raise ValueError("lusin-mass needs a report with the lusin suite")
        rows = report["tables"]["lusin"]
        path = out / "lusin_mass.csv"
        _write_csv(path, rows, ["eps", "lam_used", "complement_mass", "stderr"])
        return path
    raise ValueError(f"unknown plot-data kind {kind!r}")
