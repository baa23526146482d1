"""Harmonic measure and condenser capacity on grids and by walk-on-spheres.

Grid problems use a five-point Laplacian on a uniform lattice.  Dirichlet
boundaries (plates, and the outer boundary for harmonic measure) are cut
with Shortley-Weller weights ``1/theta`` where ``theta h`` is the distance to
the crossing; Neumann boundaries drop the outgoing edge, which is the mirror
ghost-node condition.  Straight faces of the region are placed half-way
between nodes, so a strip or half-plane wall is resolved exactly.

The discrete system is the minimiser of the edge energy
``sum (u_a - u_b)^2 + sum (u - g)^2 / theta``, which is reported as the
Dirichlet integral (condenser capacity).
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .models import KoenigsModel
from .regions import UNIT_DISK, Intersection, Rectangle, Region
from .sets import CompactSet, MappedSet, Segment


class SolverError(RuntimeError):
    pass


class PlatesTouchingError(SolverError):
    pass


class NonConvergenceError(SolverError):
    pass


class WalkFailure(SolverError):
    pass


class BcTag(enum.IntEnum):
    INTERIOR = 0
    PLATE_ZERO = 1
    PLATE_ONE = 2
    NEUMANN_OUTER = 3
    OUTER_ZERO = 4


# (di, dj) for east, west, north, south; arrays are indexed [j, i]
_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class Grid:
    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    @property
    def x(self):
        return self.x0 + self.h * np.arange(self.nx)

    @property
    def y(self):
        return self.y0 + self.h * np.arange(self.ny)

    def mesh(self):
        return np.meshgrid(self.x, self.y)


def aligned_spacing(region: Region, h: float) -> float:
    """Shrink ``h`` so parallel faces of ``region`` sit a whole number of cells apart."""
    for faces in (region.x_faces, region.y_faces):
        if len(faces) >= 2:
            width = max(faces) - min(faces)
            h = width / math.ceil(width / h - 1e-9)
    return h


def _anchor(faces, h):
    # nodes sit at anchor + (k + 1/2) h; without faces, nodes sit on multiples of h
    return min(faces) if faces else -0.5 * h


def _snap(v, anchor, h, up):
    k = (v - anchor) / h
    return anchor + h * (math.ceil(k - 1e-9) if up else math.floor(k + 1e-9))


def build_grid(region: Region, bbox, h: float, pad: int = 2) -> Grid:
    ax, ay = _anchor(region.x_faces, h), _anchor(region.y_faces, h)
    x0, x1, y0, y1 = bbox
    i0 = math.floor((x0 - ax) / h - 0.5) - pad
    i1 = math.ceil((x1 - ax) / h - 0.5) + pad
    j0 = math.floor((y0 - ay) / h - 0.5) - pad
    j1 = math.ceil((y1 - ay) / h - 0.5) + pad
    return Grid(ax + (i0 + 0.5) * h, ay + (j0 + 0.5) * h, h, i1 - i0 + 1, j1 - j0 + 1)


def snapped_window(region: Region, bbox, h: float) -> Rectangle:
    """Rectangle covering ``bbox`` whose edges lie half-way between lattice nodes."""
    ax, ay = _anchor(region.x_faces, h), _anchor(region.y_faces, h)
    x0, x1, y0, y1 = bbox
    return Rectangle(_snap(x0, ax, h, False), _snap(x1, ax, h, True), _snap(y0, ay, h, False), _snap(y1, ay, h, True))


def _bisect(hit, px, py, dx, dy, iters=42):
    """Fraction ``theta`` in (0, 1] along (dx, dy) where ``hit`` first becomes true."""
    lo = np.zeros(px.shape)
    hi = np.ones(px.shape)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        m = hit(px + mid * dx, py + mid * dy)
        hi = np.where(m, mid, hi)
        lo = np.where(m, lo, mid)
    return np.maximum(hi, 1e-6)


@dataclass
class LaplaceSystem:
    grid: Grid
    tags: np.ndarray
    kind: np.ndarray
    coef: tuple
    rhs: np.ndarray
    diag: np.ndarray
    weights: tuple
    cut_values: tuple
    fixed: np.ndarray
    outer: str


def discretize(grid: Grid, domain: Region, plates, outer: str = "dirichlet") -> LaplaceSystem:
    """Classify nodes and assemble the five-point system.

    ``plates`` is a sequence of ``(CompactSet, value)`` with values 0 or 1;
    ``outer`` is ``"dirichlet"`` (zero outside ``domain``) or ``"neumann"``.
    """
    if outer not in ("dirichlet", "neumann"):
        raise ValueError("outer must be 'dirichlet' or 'neumann'")
    X, Y = grid.mesh()
    h = grid.h
    inside = np.asarray(domain.contains(X, Y), dtype=bool)
    plate_id = np.full(X.shape, -1)
    fixed = np.zeros(X.shape)
    values = []
    for k, (plate, value) in enumerate(plates):
        if isinstance(plate, Segment):
            raise SolverError("segment plates have no interior and cannot be resolved on a grid")
        m = np.asarray(plate.contains(X, Y), dtype=bool) & inside
        if not m.any():
            raise SolverError(f"plate {plate!r} contains no grid node at spacing {h:g}")
        plate_id[m] = k
        fixed[m] = value
        values.append(float(value))
    free = inside & (plate_id < 0)
    if free[0].any() or free[-1].any() or free[:, 0].any() or free[:, -1].any():
        raise SolverError("free nodes on the grid rim; enlarge the padding")
    tags = np.full(X.shape, int(BcTag.INTERIOR), dtype=np.int8)
    tags[~inside] = BcTag.OUTER_ZERO if outer == "dirichlet" else BcTag.NEUMANN_OUTER
    for k, v in enumerate(values):
        tags[plate_id == k] = BcTag.PLATE_ONE if v > 0.5 else BcTag.PLATE_ZERO

    # neighbouring plates of different value
    for di, dj in ((1, 0), (0, 1)):
        a = plate_id[: plate_id.shape[0] - dj, : plate_id.shape[1] - di]
        b = plate_id[dj:, di:]
        both = (a >= 0) & (b >= 0)
        if np.any(both & (fixed[: fixed.shape[0] - dj, : fixed.shape[1] - di] != fixed[dj:, di:])):
            raise PlatesTouchingError(f"plates touch after discretisation at spacing {h:g}")

    coef, weights, cuts = [], [], []
    rhs = np.zeros(X.shape)
    diag = np.zeros(X.shape)
    for di, dj in _DIRS:
        nb_free = np.roll(free, (-dj, -di), axis=(0, 1))
        nb_plate = np.roll(plate_id, (-dj, -di), axis=(0, 1))
        nb_in = np.roll(inside, (-dj, -di), axis=(0, 1))
        w = np.where(free & nb_free, 1.0, 0.0)
        g = np.full(X.shape, np.nan)
        for k, (plate, value) in enumerate(plates):
            sel = free & (nb_plate == k)
            if sel.any():
                theta = _bisect(plate.contains, X[sel], Y[sel], di * h, dj * h)
                w[sel] = 1.0 / theta
                g[sel] = value
        sel = free & ~nb_in
        if outer == "dirichlet" and sel.any():
            theta = _bisect(lambda x, y: ~np.asarray(domain.contains(x, y), dtype=bool), X[sel], Y[sel], di * h, dj * h)
            w[sel] = 1.0 / theta
            g[sel] = 0.0
        cut = ~np.isnan(g)
        rhs += np.where(cut, w * np.nan_to_num(g), 0.0)
        diag += w
        coef.append(np.where(nb_free & free, w, 0.0))
        weights.append(w)
        cuts.append(g)

    kind = np.full(X.shape, K.NODE_FIXED, dtype=np.int8)
    regular = free & np.all([c == 1.0 for c in coef], axis=0)
    kind[free] = K.NODE_GENERAL
    kind[regular] = K.NODE_REGULAR
    # a free node with no connection at all keeps its initial value
    kind[free & (diag == 0.0)] = K.NODE_FIXED
    diag[diag == 0.0] = 1.0
    return LaplaceSystem(grid, tags, kind, tuple(coef), rhs, diag, tuple(weights), tuple(cuts), fixed, outer)


@dataclass
class FieldSolution:
    grid: Grid
    u: np.ndarray
    tags: np.ndarray
    energy: float
    residual: float
    sweeps: int
    converged: bool

    @property
    def spacing(self):
        return self.grid.h

    def value_at(self, z) -> float:
        """Bilinear read-off at the point ``z``."""
        return float(bilinear(self.grid, self.u, np.real(z), np.imag(z)))

    def dump(self, path) -> None:
        """Plain-text grid: header ``nx ny spacing origin_x origin_y`` then row-major values."""
        g = self.grid
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{g.nx} {g.ny} {g.h:.17g} {g.x0:.17g} {g.y0:.17g}\n")
            np.savetxt(fh, self.u, fmt="%.17g")


def bilinear(grid: Grid, u: np.ndarray, x, y):
    fx = np.clip((np.asarray(x, dtype=float) - grid.x0) / grid.h, 0.0, grid.nx - 1 - 1e-12)
    fy = np.clip((np.asarray(y, dtype=float) - grid.y0) / grid.h, 0.0, grid.ny - 1 - 1e-12)
    i = np.floor(fx).astype(int)
    j = np.floor(fy).astype(int)
    a = fx - i
    b = fy - j
    return ((1 - a) * (1 - b) * u[j, i] + a * (1 - b) * u[j, i + 1]
            + (1 - a) * b * u[j + 1, i] + a * b * u[j + 1, i + 1])


def dirichlet_energy(system: LaplaceSystem, u: np.ndarray) -> float:
    free = system.kind != K.NODE_FIXED
    e = 0.0
    # free-free edges, each once (east and north)
    for axis in (1, 0):
        a = [slice(None), slice(None)]
        b = [slice(None), slice(None)]
        a[axis] = slice(None, -1)
        b[axis] = slice(1, None)
        both = free[tuple(a)] & free[tuple(b)]
        d = u[tuple(b)] - u[tuple(a)]
        e += float(np.sum(np.where(both, d * d, 0.0)))
    for w, g in zip(system.weights, system.cut_values):
        cut = free & ~np.isnan(g)
        e += float(np.sum(np.where(cut, w * (u - np.nan_to_num(g)) ** 2, 0.0)))
    return e


def _omega(system: LaplaceSystem) -> float:
    g = system.grid
    scale = 2.0 if system.outer == "neumann" else 1.0
    rho = 0.5 * (math.cos(math.pi / (scale * g.nx)) + math.cos(math.pi / (scale * g.ny)))
    return 2.0 / (1.0 + math.sqrt(max(1.0 - rho * rho, 0.0)))


def relax(system: LaplaceSystem, initial: np.ndarray | None = None, tol: float = 1e-10,
          max_sweeps: int = 200_000, omega: float | None = None) -> FieldSolution:
    kind = system.kind
    u = system.fixed.copy()
    if initial is not None:
        u = np.where(kind != K.NODE_FIXED, initial, u)
    om = _omega(system) if omega is None else omega
    ce, cw, cn, cs = system.coef
    sweeps, res = K.sor_red_black(u, kind, ce, cw, cn, cs, system.rhs, system.diag, om, tol, max_sweeps)
    converged = res < tol
    if not converged:
        raise NonConvergenceError(f"SOR stalled at max update {res:.3g} after {sweeps} sweeps")
    # fill Neumann ghosts from their free neighbours for read-off
    if system.outer == "neumann":
        ghost = system.tags == BcTag.NEUMANN_OUTER
        free = kind != K.NODE_FIXED
        acc = np.zeros_like(u)
        cnt = np.zeros_like(u)
        for di, dj in _DIRS:
            nf = np.roll(free, (-dj, -di), axis=(0, 1))
            acc += np.where(nf, np.roll(u, (-dj, -di), axis=(0, 1)), 0.0)
            cnt += nf
        u = np.where(ghost & (cnt > 0), acc / np.maximum(cnt, 1), u)
    return FieldSolution(system.grid, u, system.tags, dirichlet_energy(system, u), float(res), int(sweeps), bool(converged))


def solve_nested(build, h: float, min_nodes: int = 24, tol: float = 1e-10) -> list[FieldSolution]:
    """Solve on ``h``, ``2h``, ... coarsest first, each level seeding the next.

    ``build(h)`` returns a :class:`LaplaceSystem`.  Solutions are returned
    finest first.
    """
    systems = [build(h)]
    while min(systems[-1].grid.nx, systems[-1].grid.ny) >= 2 * min_nodes and len(systems) < 6:
        systems.append(build(2.0 * systems[-1].grid.h))
    sols = []
    guess = None
    for sysm in reversed(systems):
        init = None
        if guess is not None:
            X, Y = sysm.grid.mesh()
            init = bilinear(guess.grid, guess.u, X, Y)
        guess = relax(sysm, init, tol=tol)
        sols.append(guess)
    return sols[::-1]


# -- harmonic measure ---------------------------------------------------------

class Method(str, enum.Enum):
    WOS = "WoS"
    GRID = "Grid"


@dataclass
class HarmonicMeasureEstimate:
    value: float
    std_error: float
    samples: int
    method: Method
    seed: int | None = None
    discards: int = 0
    mean_steps: float = 0.0
    solution: FieldSolution | None = field(default=None, repr=False)


def _disk_bbox(domain: Region, extra):
    x0, x1, y0, y1 = domain.bbox()
    ex0, ex1, ey0, ey1 = extra
    return min(x0, ex0), max(x1, ex1), min(y0, ey0), max(y1, ey1)


def harmonic_measure_grid(z, E: CompactSet, spacing: float, domain: Region = UNIT_DISK,
                          tol: float = 1e-10) -> HarmonicMeasureEstimate:
    """``omega(z, E, domain)`` by relaxation with ``u = 1`` on ``E`` and ``0`` outside ``domain``."""
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    h = aligned_spacing(domain, spacing)
    bbox = domain.bbox()
    if not all(np.isfinite(bbox)):
        raise ValueError("unbounded domain: intersect it with a window first")

    def build(hh):
        return discretize(build_grid(domain, bbox, hh), domain, [(E, 1.0)], "dirichlet")

    sol = solve_nested(build, h, tol=tol)[0]
    z = complex(z)
    val = 1.0 if E.contains(z.real, z.imag) else min(max(sol.value_at(z), 0.0), 1.0)
    return HarmonicMeasureEstimate(val, 0.0, 0, Method.GRID, solution=sol)


def _wos_setup(E: CompactSet, domain: Region):
    if isinstance(E, MappedSet):
        E = E.as_polygon()
    tkind, tpar, tvx, tvy = E.wos_spec()
    dkind, dpar = domain.wos_spec()
    return (tkind, np.asarray(tpar, float), np.ascontiguousarray(tvx, float), np.ascontiguousarray(tvy, float),
            dkind, np.asarray(dpar, float))


def _batches(n, batch):
    sizes = [batch] * (n // batch)
    if n % batch:
        sizes.append(n % batch)
    return sizes


def harmonic_measure_wos(z, E: CompactSet, eps: float | None = None, n_samples: int = 100_000, seed: int = 0,
                         domain: Region = UNIT_DISK, max_steps: int = 100_000, batch: int = 1 << 14,
                         workers: int = 1, scale: float = 1.0) -> HarmonicMeasureEstimate:
    """Fraction of walk-on-spheres walkers from ``z`` absorbed at ``E`` before ``domain``'s boundary.

    Batches draw from independent streams spawned from ``seed`` and are summed
    in batch order, so the result does not depend on ``workers``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    eps = 1e-4 * scale if eps is None else eps
    if not eps > 0:
        raise ValueError("eps must be positive")
    spec = _wos_setup(E, domain)
    z = complex(z)
    sizes = _batches(n_samples, batch)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(k):
        rng = np.random.Generator(np.random.PCG64(streams[k]))
        return K.wos_batch(rng, z.real, z.imag, sizes[k], *spec[:4], *spec[4:], eps, max_steps)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            tallies = list(pool.map(run, range(len(sizes))))
    else:
        tallies = [run(k) for k in range(len(sizes))]
    hits = sum(t[0] for t in tallies)
    discards = sum(t[2] for t in tallies)
    steps = sum(t[3] for t in tallies)
    if discards > 1e-3 * n_samples:
        raise WalkFailure(f"{discards} of {n_samples} walkers hit the step cap")
    n = n_samples - discards
    p = hits / n
    se = math.sqrt(max(p * (1.0 - p), 0.0) / n)
    return HarmonicMeasureEstimate(p, se, n, Method.WOS, seed, discards, steps / n_samples)


def wos_exit_points(z, E: CompactSet, eps: float = 1e-4, n_samples: int = 10_000, seed: int = 0,
                    domain: Region = UNIT_DISK, max_steps: int = 100_000):
    """Status (1 target, 0 outer, -1 discarded) and absorption point of each walker."""
    spec = _wos_setup(E, domain)
    z = complex(z)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    status, px, py = K.wos_exit_points(rng, z.real, z.imag, n_samples, *spec[:4], *spec[4:], eps, max_steps)
    return status, px + 1j * py


# -- condensers ---------------------------------------------------------------

@dataclass(frozen=True)
class UnitDiskDomain:
    pass


@dataclass(frozen=True)
class KoenigsImage:
    """Koenigs domain of ``model`` truncated to ``window`` (automatic when ``None``)."""

    model: KoenigsModel
    window: Rectangle | None = None
    margin: float | None = None


@dataclass
class CondenserResult:
    cap: float
    cap_coarse: float
    spacing: float
    solution: FieldSolution = field(repr=False)

    @property
    def richardson_gap(self) -> float:
        """Relative difference of the pair ``(spacing, spacing / 2)``."""
        return abs(self.cap - self.cap_coarse) / self.cap

    @property
    def extrapolated(self) -> float:
        return (4.0 * self.cap - self.cap_coarse) / 3.0


def _union_bbox(*boxes):
    return (min(b[0] for b in boxes), max(b[1] for b in boxes), min(b[2] for b in boxes), max(b[3] for b in boxes))


def _inflate(box, m):
    return box[0] - m, box[1] + m, box[2] - m, box[3] + m


def _clip_box(box, region: Region):
    r = region.bbox()
    return max(box[0], r[0]), min(box[1], r[1]), max(box[2], r[2]), min(box[3], r[3])


def koenigs_window(model: KoenigsModel, items, margin: float) -> Rectangle:
    """Bounding rectangle of ``items`` (plates or points) inflated by ``margin`` and clipped to Omega."""
    boxes = []
    for it in items:
        if isinstance(it, CompactSet):
            boxes.append(it.bbox())
        else:
            w = complex(it)
            boxes.append((w.real, w.real, w.imag, w.imag))
    x0, x1, y0, y1 = _clip_box(_inflate(_union_bbox(*boxes), margin), model.omega_region())
    return Rectangle(x0, x1, y0, y1)


def koenigs_plate(model: KoenigsModel, K_set: CompactSet, t: float = 0.0, samples: int = 256) -> MappedSet:
    """``h(K) + t`` as a polygonal plate in Koenigs coordinates."""
    h = model.h
    return MappedSet(K_set, lambda z: h(z) + t, label=f"h({K_set!r})+{t:g} [{model.name}]", polygon_samples=samples)


def _separation(a: CompactSet, b: CompactSet) -> float:
    pa, pb = a.boundary(128), b.boundary(128)
    return float(np.min(np.abs(pa[:, None] - pb[None, :])))


def condenser_capacity(domain, K_plate: CompactSet, E_plate: CompactSet, spacing: float,
                       tol: float = 1e-10) -> CondenserResult:
    """Capacity of the condenser ``(domain, K_plate, E_plate)``.

    ``u = 0`` on ``K_plate``, ``u = 1`` on ``E_plate``, homogeneous Neumann on
    the outer boundary.  The solve is done at ``spacing`` and ``spacing / 2``;
    ``cap`` is the finer value.
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    if isinstance(domain, KoenigsImage):
        omega = domain.model.omega_region()
        window = domain.window
        if window is None:
            diam = max(K_plate.diameter, E_plate.diameter)
            margin = domain.margin if domain.margin is not None else max(3.0 * diam, 0.5 * _separation(K_plate, E_plate))
            window = koenigs_window(domain.model, [K_plate, E_plate], margin)
        region = omega
    elif isinstance(domain, UnitDiskDomain) or domain is UNIT_DISK:
        region, window = UNIT_DISK, None
    else:
        raise TypeError("domain must be UnitDiskDomain() or KoenigsImage(model, window)")
    h = aligned_spacing(region, spacing) / 2.0

    def build(hh):
        if window is None:
            dom, bbox = region, region.bbox()
        else:
            win = snapped_window(region, (window.x0, window.x1, window.y0, window.y1), hh)
            dom, bbox = Intersection(region, win), (win.x0, win.x1, win.y0, win.y1)
        return discretize(build_grid(region, bbox, hh), dom, [(K_plate, 0.0), (E_plate, 1.0)], "neumann")

    sols = solve_nested(build, h, tol=tol)
    return CondenserResult(sols[0].energy, sols[1].energy if len(sols) > 1 else relax(build(2 * h)).energy,
                           2.0 * h, sols[0])


def extremal_distance(cap: float) -> float:
    """Extremal distance of a condenser from its capacity."""
    if not cap > 0:
        raise ValueError("capacity must be positive")
    return 1.0 / cap


def harmonic_measure_koenigs(model: KoenigsModel, K_set: CompactSet, z, t: float, spacing: float,
                             margin: float = 4.0, tol: float = 1e-10) -> HarmonicMeasureEstimate:
    """``omega(z, phi_t(K), D)`` computed as ``omega(h(z), h(K) + t, Omega)`` on a window.

    The window around the plate and ``h(z)`` carries the zero condition of
    ``partial Omega`` on its walls.
    """
    target = koenigs_plate(model, K_set, t)
    wz = complex(model.h(np.asarray(z, dtype=complex)))
    if target.contains(wz.real, wz.imag):
        return HarmonicMeasureEstimate(1.0, 0.0, 0, Method.GRID)
    omega = model.omega_region()
    sep = float(np.min(np.abs(target.boundary(256) - wz)))
    m = max(margin, 3.0 * target.diameter, 0.5 * sep)
    window = koenigs_window(model, [target, wz], m)
    h = aligned_spacing(omega, spacing)

    def build(hh):
        win = snapped_window(omega, (window.x0, window.x1, window.y0, window.y1), hh)
        dom = Intersection(omega, win)
        return discretize(build_grid(omega, (win.x0, win.x1, win.y0, win.y1), hh), dom, [(target, 1.0)], "dirichlet")

    sol = solve_nested(build, h, tol=tol)[0]
    return HarmonicMeasureEstimate(min(max(sol.value_at(wz), 0.0), 1.0), 0.0, 0, Method.GRID, solution=sol)


def harmonic_measure_koenigs_wos(model: KoenigsModel, K_set: CompactSet, z, t: float, n_samples: int = 100_000,
                                 seed: int = 0, eps: float = 1e-4, workers: int = 1) -> HarmonicMeasureEstimate:
    """Walk-on-spheres counterpart of :func:`harmonic_measure_koenigs` on the full Omega."""
    target = koenigs_plate(model, K_set, t)
    wz = complex(model.h(np.asarray(z, dtype=complex)))
    return harmonic_measure_wos(wz, target, eps=eps, n_samples=n_samples, seed=seed,
                                domain=model.omega_region(), workers=workers)


@dataclass
class BeurlingRow:
    t: float
    log_omega: float
    pi_extremal: float
    value: float


@dataclass
class BeurlingReport:
    rows: list
    bound: float

    @property
    def bound_exp(self) -> float:
        return math.exp(self.bound)


def beurling_slope_check(model: KoenigsModel, K_set: CompactSet, z, t_grid, spacing: float = math.pi / 32,
                         margin: float = 4.0) -> BeurlingReport:
    """Series ``log omega(z, phi_t(K), D) + pi lambda_D(K, phi_t(K))`` and its maximum."""
    rows = []
    base = koenigs_plate(model, K_set, 0.0)
    for t in np.asarray(t_grid, dtype=float):
        om = harmonic_measure_koenigs(model, K_set, z, t, spacing / 2.0, margin).value
        cap = condenser_capacity(KoenigsImage(model), base, koenigs_plate(model, K_set, t), spacing).cap
        pl = math.pi * extremal_distance(cap)
        lo = math.log(om) if om > 0 else -math.inf
        rows.append(BeurlingRow(float(t), lo, pl, lo + pl))
    vals = [r.value for r in rows]
    if not all(np.isfinite(vals)):
        raise SolverError("non-finite entry in the Beurling series")
    return BeurlingReport(rows, max(vals))
