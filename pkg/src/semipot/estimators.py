"""Estimators of the spectral value from finite time grids.

Every route produces a :class:`ConvergenceReport`.  Limits of ratios are
never read off at the largest ``t``; an affine model ``value ~ a + b t`` is
fitted instead, so the O(1/t) intercept bias drops out.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .capacity import hyperbolic_capacity, image_plate, sample_boundary
from .disk import green_disk_from_gaps, hyperbolic_distance_from_gaps
from .fields import (
    KoenigsImage,
    SolverError,
    condenser_capacity,
    extremal_distance,
    harmonic_measure_koenigs,
    harmonic_measure_koenigs_wos,
    koenigs_plate,
)
from .models import ConditioningError, KoenigsModel, hyperbolic_step, phi_gap, slope_fit
from .sets import CompactSet, Disk


class EstimatorId(str, enum.Enum):
    HYP_DIST = "HypDist"
    GREEN = "Green"
    HARMONIC = "HarmonicMeasure"
    EXTREMAL = "ExtremalDistance"
    CONDENSER = "CondenserCapacity"
    STEP = "HyperbolicStep"


class FitKind(str, enum.Enum):
    RATIO_TAIL = "RatioTail"
    SLOPE = "SlopeRegression"


DEFAULT_PLATE = Disk(0.0, 0.2)


@dataclass
class SolverConfig:
    spacing: float = math.pi / 32
    eps: float = 1e-4
    n_samples: int = 100_000
    seed: int = 0
    omega_floor: float = 1e-6
    margin: float = 4.0
    tol: float = 1e-10
    method: str = "grid"
    workers: int = 1
    r_max: float = 1e6
    richardson_tol: float = 0.04

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if self.method not in ("grid", "wos"):
            raise ValueError("method must be 'grid' or 'wos'")


@dataclass
class ConvergenceReport:
    estimator_id: EstimatorId
    t_grid: np.ndarray
    raw_values: np.ndarray
    fitted_lambda: float
    fit_kind: FitKind
    flags: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def tainted(self) -> bool:
        return bool(self.diagnostics.get("tainted", False))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["estimator_id"] = self.estimator_id.value
        d["fit_kind"] = self.fit_kind.value
        d["t_grid"] = [float(x) for x in self.t_grid]
        d["raw_values"] = [_num(x) for x in self.raw_values]
        d["diagnostics"] = _plain(self.diagnostics)
        return d


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise ValueError("need a one-dimensional grid of at least three times")
    if np.any(np.diff(t) <= 0) or not np.all(np.isfinite(t)):
        raise ValueError("grid must be finite and strictly increasing")
    return t


def upper_half(t: np.ndarray) -> np.ndarray:
    """Mask of ``t >= t_max / 2`` (at least the last three points)."""
    m = t >= 0.5 * t[-1]
    if m.sum() < 3:
        m = np.zeros_like(m)
        m[-3:] = True
    return m


def _map(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _fit(t, y, mask, flags, scale=1.0):
    ok = mask & np.isfinite(y)
    diag = {"fit_points": int(ok.sum())}
    if ok.sum() < 2:
        diag.update(slope=float("nan"), intercept=float("nan"), stderr=float("nan"), residuals=[], tainted=True)
        return 0.0, diag
    slope, icpt, se, resid = slope_fit(t[ok], y[ok])
    tainted = any(flags[i] for i in np.flatnonzero(mask))
    diag.update(slope=slope, intercept=icpt, stderr=se * scale, residuals=resid.tolist(), tainted=tainted)
    return max(scale * slope, 0.0), diag


def _per_t(model, z, w, t):
    gz = 1.0 - complex(z)
    flags, gws = [], []
    for tt in t:
        try:
            gws.append(phi_gap(model, tt, w))
            flags.append("")
        except ConditioningError:
            gws.append(np.nan)
            flags.append("conditioning")
    return gz, np.asarray(gws, dtype=complex), flags


def lambda_via_hyp_dist(model: KoenigsModel, z, w, t_grid) -> ConvergenceReport:
    """``2 d_D(z, phi_t(w)) / t``; the fit regresses ``d_D`` on ``t`` over the upper half of the grid."""
    t = _grid(t_grid)
    gz, gw, flags = _per_t(model, z, w, t)
    ok = np.array([not f for f in flags])
    d = np.full(t.shape, np.nan)
    d[ok] = hyperbolic_distance_from_gaps(np.full(ok.sum(), gz), gw[ok])
    lam, diag = _fit(t, d, upper_half(t), flags, scale=2.0)
    diag["fitted_raw_slope"] = 2.0 * diag["slope"]
    return ConvergenceReport(EstimatorId.HYP_DIST, t, 2.0 * d / t, lam, FitKind.SLOPE, flags, diag)


def lambda_via_green(model: KoenigsModel, z, w, t_grid) -> ConvergenceReport:
    """``-log g_D(z, phi_t(w)) / t``; slope regression of ``-log g_D`` on ``t``."""
    t = _grid(t_grid)
    gz, gw, flags = _per_t(model, z, w, t)
    ok = np.array([not f for f in flags])
    y = np.full(t.shape, np.nan)
    with np.errstate(divide="ignore"):
        y[ok] = -np.log(green_disk_from_gaps(np.full(ok.sum(), gz), gw[ok]))
    lam, diag = _fit(t, y, upper_half(t), flags)
    return ConvergenceReport(EstimatorId.GREEN, t, y / t, lam, FitKind.SLOPE, flags, diag)


def lambda_via_step(model: KoenigsModel, z, u_grid, r_max: float = 1e6, tol: float = 1e-4) -> ConvergenceReport:
    """``2 s_u / u``; the fit regresses ``s_u`` on ``u`` over the upper half of the grid."""
    u = _grid(u_grid)
    s = np.full(u.shape, np.nan)
    flags, radii, diags = [], [], []
    for k, uu in enumerate(u):
        try:
            est = hyperbolic_step(model, float(uu), z, r_max, tol)
        except ConditioningError:
            flags.append("conditioning")
            radii.append(float("nan"))
            diags.append(float("nan"))
            continue
        s[k] = est.value
        radii.append(est.r_max)
        diags.append(est.diagnostic)
        flags.append("" if est.stabilized else "unstabilized")
    lam, diag = _fit(u, s, upper_half(u), flags, scale=2.0)
    diag.update(step=s.tolist(), r_max=radii, stabilization=diags)
    return ConvergenceReport(EstimatorId.STEP, u, 2.0 * s / u, lam, FitKind.SLOPE, flags, diag)


def per_t_seeds(seed: int, n: int) -> list[int]:
    """Independent integer seeds, one per grid point, spawned from ``seed``."""
    return [int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1)) for ss in np.random.SeedSequence(seed).spawn(n)]


def _omega_at(model, K, z, t, cfg, seed):
    if cfg.method == "wos":
        est = harmonic_measure_koenigs_wos(model, K, z, t, n_samples=cfg.n_samples, seed=seed, eps=cfg.eps)
    else:
        est = harmonic_measure_koenigs(model, K, z, t, cfg.spacing / 2.0, cfg.margin, cfg.tol)
    return est.value, est.std_error


def sandwich_bounds(model: KoenigsModel, K: CompactSet, z, t: float, n_max: int = 32, samples: int = 256):
    """Bounds on ``log omega(z, phi_t(K), D) / t`` from the Green equilibrium potential.

    ``omega = G_nu(z) / V`` with ``V = -log caph`` and ``G_nu`` an average of
    ``g_D(z, .)`` over ``phi_t(K)``, so ``log omega`` lies between
    ``-log V + log min g`` and ``-log V + log max g`` (extremes over the
    boundary of ``phi_t(K)``, where the harmonic ``g_D(z, .)`` attains them).
    """
    plate = image_plate(model, t, K)
    V = -math.log(hyperbolic_capacity(plate, n_max=n_max).value)
    g = green_disk_from_gaps(np.full(samples, 1.0 - complex(z)), sample_boundary(plate, samples).gaps)
    return (math.log(g.min()) - math.log(V)) / t, (math.log(g.max()) - math.log(V)) / t


def lambda_via_harmonic(model: KoenigsModel, K: CompactSet, z, t_grid, cfg: SolverConfig | None = None,
                        sandwich: bool = False) -> ConvergenceReport:
    """``-log omega(z, phi_t(K), D) / t`` from solves in Koenigs coordinates.

    Points with ``omega`` below ``cfg.omega_floor`` end the usable prefix;
    ``lambda`` is minus the slope of ``log omega`` over that prefix.
    """
    cfg = cfg or SolverConfig()
    t = _grid(t_grid)
    seeds = per_t_seeds(cfg.seed, t.size)

    def one(k):
        try:
            return _omega_at(model, K, z, float(t[k]), cfg, seeds[k]) + ("",)
        except (SolverError, ConditioningError) as exc:
            return float("nan"), float("nan"), f"solver: {exc}"

    res = _map(one, range(t.size), cfg.workers)
    om = np.array([r[0] for r in res])
    se = [r[1] for r in res]
    flags = [r[2] for r in res]
    with np.errstate(divide="ignore", invalid="ignore"):
        logom = np.log(om)
    usable = np.ones(t.size, dtype=bool)
    below = np.flatnonzero(~(om >= cfg.omega_floor) & np.array([not f for f in flags]))
    if below.size:
        usable[below[0]:] = False
        for i in range(below[0], t.size):
            flags[i] = flags[i] or "floor"
    lam, diag = _fit(t, -logom, usable, flags)
    diag.update(omega=om.tolist(), std_error=se, usable=usable.tolist(), seeds=seeds, method=cfg.method,
                spacing=cfg.spacing / 2.0)
    if sandwich:
        bounds = [sandwich_bounds(model, K, z, float(tt)) for tt in t]
        inside = [bool(b[0] - 1e-12 <= lo / tt <= b[1] + 1e-12) if np.isfinite(lo) else False
                  for b, lo, tt in zip(bounds, logom, t)]
        diag.update(sandwich=bounds, sandwich_ok=inside)
    return ConvergenceReport(EstimatorId.HARMONIC, t, -logom / t, lam, FitKind.SLOPE, flags, diag)


@dataclass
class CondenserPoint:
    t: float
    cap: float
    cap_coarse: float
    flag: str


def condenser_series(model: KoenigsModel, K: CompactSet, t_grid, cfg: SolverConfig | None = None) -> list[CondenserPoint]:
    """``Cap(Omega, h(K), h(K) + t)`` on each ``t``, i.e. ``Cap(D, K, phi_t(K))``."""
    cfg = cfg or SolverConfig()
    base = koenigs_plate(model, K, 0.0)

    def one(tt):
        try:
            r = condenser_capacity(KoenigsImage(model), base, koenigs_plate(model, K, tt), cfg.spacing, cfg.tol)
        except SolverError as exc:
            return CondenserPoint(tt, float("nan"), float("nan"), f"solver: {exc}")
        flag = "" if r.richardson_gap <= cfg.richardson_tol else "richardson"
        return CondenserPoint(tt, r.cap, r.cap_coarse, flag)

    return _map(one, [float(x) for x in t_grid], cfg.workers)


def _cap_diag(series):
    return {"cap": [p.cap for p in series], "cap_coarse": [p.cap_coarse for p in series],
            "richardson_gap": [abs(p.cap - p.cap_coarse) / p.cap if p.cap > 0 else float("nan") for p in series]}


def lambda_via_extremal(model: KoenigsModel, K: CompactSet, t_grid, cfg: SolverConfig | None = None,
                        series: list[CondenserPoint] | None = None) -> ConvergenceReport:
    """``pi lambda_D(K, phi_t(K)) / t``; slope regression of ``pi lambda_D`` on ``t``."""
    t = _grid(t_grid)
    series = series or condenser_series(model, K, t, cfg)
    cap = np.array([p.cap for p in series])
    flags = [p.flag for p in series]
    pl = np.array([math.pi * extremal_distance(c) if c > 0 else float("nan") for c in cap])
    lam, diag = _fit(t, pl, np.ones(t.size, dtype=bool), flags)
    diag.update(_cap_diag(series))
    return ConvergenceReport(EstimatorId.EXTREMAL, t, pl / t, lam, FitKind.SLOPE, flags, diag)


def divergence_verdict(t, raw) -> tuple[str, float]:
    """``"divergent"`` when ``raw`` increases strictly with increments not decaying like ``t^-2``.

    A convergent ``raw = L - c/t + ...`` has increments of order ``t^-2``;
    the log-log slope of the increments separates the two regimes at -1.5.
    """
    raw = np.asarray(raw, dtype=float)
    inc = np.diff(raw)
    if not np.all(np.isfinite(inc)) or np.any(inc <= 0):
        return "convergent", float("nan")
    tm = np.sqrt(np.asarray(t[1:]) * np.asarray(t[:-1]))
    slope = slope_fit(np.log(tm), np.log(inc / np.diff(t)))[0]
    return ("divergent" if slope > -1.5 else "convergent"), slope


def lambda_via_condenser(model: KoenigsModel, K: CompactSet, t_grid, cfg: SolverConfig | None = None,
                         series: list[CondenserPoint] | None = None) -> ConvergenceReport:
    """``t Cap / pi``; its tail limit is ``1 / lambda``, infinite for parabolic semigroups.

    The tail (upper half of the grid) is fitted as ``a + b / t``; ``a`` is the
    limit and ``fitted_lambda = 1 / a``.  A divergent series reports 0.
    """
    t = _grid(t_grid)
    series = series or condenser_series(model, K, t, cfg)
    cap = np.array([p.cap for p in series])
    flags = [p.flag for p in series]
    raw = t * cap / math.pi
    verdict, inc_slope = divergence_verdict(t, raw)
    mask = upper_half(t)
    ok = mask & np.isfinite(raw)
    diag = _cap_diag(series)
    diag.update(verdict=verdict, increment_loglog_slope=inc_slope, tainted=any(flags[i] for i in np.flatnonzero(mask)))
    if ok.sum() >= 2:
        b, a, se, resid = slope_fit(1.0 / t[ok], raw[ok])
        diag.update(limit=a, limit_stderr=float("nan"), tail_coef=b, residuals=resid.tolist())
    else:
        a = float("nan")
        diag.update(limit=a, tainted=True)
    lam = 0.0 if verdict == "divergent" or not a > 0 else 1.0 / a
    diag["inverse_lambda"] = a if verdict != "divergent" else float("inf")
    return ConvergenceReport(EstimatorId.CONDENSER, t, raw, lam, FitKind.RATIO_TAIL, flags, diag)


@dataclass
class ResidualReport:
    u_grid: np.ndarray
    residual: np.ndarray
    step: np.ndarray
    pi_half_extremal: np.ndarray
    tail_decreasing: bool
    doubling_ratios: dict
    flags: list


def proposition_residual(model: KoenigsModel, K: CompactSet, z, u_grid, cfg: SolverConfig | None = None) -> ResidualReport:
    """``(s_u - (pi / 2) lambda_D(K, phi_u(K))) / u`` along ``u_grid``."""
    cfg = cfg or SolverConfig()
    u = _grid(u_grid)
    step = lambda_via_step(model, z, u, cfg.r_max)
    s = np.asarray(step.diagnostics["step"])
    series = condenser_series(model, K, u, cfg)
    lam_d = np.array([extremal_distance(p.cap) if p.cap > 0 else float("nan") for p in series])
    res = (s - 0.5 * math.pi * lam_d) / u
    flags = [a or b for a, b in zip(step.flags, (p.flag for p in series))]
    tail = np.abs(res[upper_half(u)])
    ratios = {}
    for k, uu in enumerate(u):
        j = np.flatnonzero(np.isclose(u, 2 * uu))
        if j.size and res[k] != 0:
            ratios[float(uu)] = float(abs(res[j[0]] / res[k]))
    return ResidualReport(u, res, s, 0.5 * math.pi * lam_d, bool(np.all(np.diff(tail) < 0)), ratios, flags)
