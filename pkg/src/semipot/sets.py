"""Compact plates: disks, annuli, polygons, segments and their conformal images.

Every shape can sample its boundary, answer point-membership and distance
queries (vectorised), and describe itself to the compiled walk-on-spheres
kernel.  Finite point clouds are deliberately not representable: plates must
be non-polar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as K


class PolarSetError(ValueError):
    """The requested plate has zero logarithmic capacity."""


class CompactSet:
    """Base class; subclasses implement the geometric queries."""

    def boundary(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def boundary_gaps(self, n: int) -> np.ndarray:
        """``1 - z`` for the boundary samples (exact unless overridden)."""
        return 1.0 - self.boundary(n)

    def contains(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x, y) -> np.ndarray:
        """Distance to the set (zero inside)."""
        raise NotImplementedError

    def bbox(self) -> tuple[float, float, float, float]:
        raise NotImplementedError

    def wos_spec(self):
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        b = self.boundary(512)
        return float(np.max(np.abs(b[:, None] - b[None, :])))

    def check_in_disk(self, margin: float = 1e-9) -> None:
        if np.max(np.abs(self.boundary(512))) >= 1.0 - margin:
            raise ValueError(f"{self!r} is not compactly contained in the unit disk")

    def translate(self, shift: complex) -> CompactSet:
        return MappedSet(self, lambda z: np.asarray(z) + shift, label=f"{self!r}+{shift}")


def _xy(x, y):
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


@dataclass(frozen=True)
class Disk(CompactSet):
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise PolarSetError("disk plates need a positive radius")
        object.__setattr__(self, "center", complex(self.center))

    def boundary(self, n):
        return self.center + self.radius * np.exp(2j * np.pi * np.arange(n) / n)

    def contains(self, x, y):
        x, y = _xy(x, y)
        return np.hypot(x - self.center.real, y - self.center.imag) <= self.radius

    def distance(self, x, y):
        x, y = _xy(x, y)
        return np.maximum(np.hypot(x - self.center.real, y - self.center.imag) - self.radius, 0.0)

    def bbox(self):
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    @property
    def diameter(self):
        return 2.0 * self.radius

    def wos_spec(self):
        par = np.array([self.center.real, self.center.imag, self.radius])
        return K.SHAPE_DISK, par, np.zeros(1), np.zeros(1)

    def translate(self, shift):
        return Disk(self.center + shift, self.radius)


@dataclass(frozen=True)
class Annulus(CompactSet):
    center: complex
    inner: float
    outer: float

    def __post_init__(self):
        if not 0.0 < self.inner < self.outer:
            raise PolarSetError("annulus needs 0 < inner < outer")
        object.__setattr__(self, "center", complex(self.center))

    def boundary(self, n):
        # outer circle only: it carries the equilibrium measure
        return self.center + self.outer * np.exp(2j * np.pi * np.arange(n) / n)

    def contains(self, x, y):
        x, y = _xy(x, y)
        r = np.hypot(x - self.center.real, y - self.center.imag)
        return (r >= self.inner) & (r <= self.outer)

    def distance(self, x, y):
        x, y = _xy(x, y)
        r = np.hypot(x - self.center.real, y - self.center.imag)
        return np.where(r < self.inner, self.inner - r, np.maximum(r - self.outer, 0.0))

    def bbox(self):
        c, r = self.center, self.outer
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    @property
    def diameter(self):
        return 2.0 * self.outer

    def wos_spec(self):
        par = np.array([self.center.real, self.center.imag, self.inner, self.outer])
        return K.SHAPE_ANNULUS, par, np.zeros(1), np.zeros(1)


def _resample_closed(vertices: np.ndarray, n: int) -> np.ndarray:
    closed = np.append(vertices, vertices[0])
    seg = np.abs(np.diff(closed))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.arange(n) * s[-1] / n
    idx = np.clip(np.searchsorted(s, target, side="right") - 1, 0, len(seg) - 1)
    frac = (target - s[idx]) / np.where(seg[idx] > 0, seg[idx], 1.0)
    return closed[idx] + frac * (closed[idx + 1] - closed[idx])


@dataclass(frozen=True, eq=False)
class Polygon(CompactSet):
    """Closed polygon given by its vertices (no repeated end vertex)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex).ravel()
        if v.size < 3:
            raise PolarSetError("a polygon plate needs at least three vertices")
        area = 0.5 * np.sum(v.real * np.roll(v.imag, -1) - np.roll(v.real, -1) * v.imag)
        if abs(area) == 0.0:
            raise PolarSetError("degenerate polygon")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "_vx", np.ascontiguousarray(v.real))
        object.__setattr__(self, "_vy", np.ascontiguousarray(v.imag))

    def __repr__(self):
        return f"Polygon(<{self.vertices.size} vertices>)"

    def boundary(self, n):
        return _resample_closed(self.vertices, n)

    def contains(self, x, y):
        x, y = _xy(x, y)
        shape = np.broadcast(x, y).shape
        px = np.ascontiguousarray(np.broadcast_to(x, shape).ravel())
        py = np.ascontiguousarray(np.broadcast_to(y, shape).ravel())
        return K.points_in_polygon(px, py, self._vx, self._vy).reshape(shape)

    def distance(self, x, y):
        x, y = _xy(x, y)
        shape = np.broadcast(x, y).shape
        px = np.ascontiguousarray(np.broadcast_to(x, shape).ravel())
        py = np.ascontiguousarray(np.broadcast_to(y, shape).ravel())
        d = K.polygon_boundary_distance(px, py, self._vx, self._vy).reshape(shape)
        return np.where(self.contains(x, y), 0.0, d)

    def bbox(self):
        v = self.vertices
        return v.real.min(), v.real.max(), v.imag.min(), v.imag.max()

    def wos_spec(self):
        return K.SHAPE_POLYGON, np.zeros(1), self._vx, self._vy

    def translate(self, shift):
        return Polygon(self.vertices + shift)


@dataclass(frozen=True)
class Segment(CompactSet):
    a: complex
    b: complex

    def __post_init__(self):
        if complex(self.a) == complex(self.b):
            raise PolarSetError("a segment plate needs distinct endpoints")
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    def boundary(self, n):
        return self.a + (self.b - self.a) * np.linspace(0.0, 1.0, n)

    def contains(self, x, y):
        # zero area: no grid node is ever inside
        x, y = _xy(x, y)
        return np.zeros(np.broadcast(x, y).shape, dtype=bool)

    def distance(self, x, y):
        x, y = _xy(x, y)
        ab = self.b - self.a
        z = x + 1j * y - self.a
        s = np.clip((z * np.conj(ab)).real / abs(ab) ** 2, 0.0, 1.0)
        return np.abs(z - s * ab)

    def bbox(self):
        return (min(self.a.real, self.b.real), max(self.a.real, self.b.real),
                min(self.a.imag, self.b.imag), max(self.a.imag, self.b.imag))

    @property
    def diameter(self):
        return abs(self.b - self.a)

    def wos_spec(self):
        par = np.array([self.a.real, self.a.imag, self.b.real, self.b.imag])
        return K.SHAPE_SEGMENT, par, np.zeros(1), np.zeros(1)


@dataclass(frozen=True, eq=False)
class MappedSet(CompactSet):
    """Image ``f(base)`` of a plate under a conformal map.

    Boundary samples are images of the base samples, so sample ``k`` of the
    image is always ``f`` of sample ``k`` of the base.  ``gap_map`` returns
    ``1 - f(z)`` accurately when the image crowds the boundary point 1.
    Region queries use the polygon through ``polygon_samples`` boundary images.
    """

    base: CompactSet
    forward: Callable[[np.ndarray], np.ndarray]
    gap_map: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = "mapped"
    polygon_samples: int = 256
    _polygon: Polygon | None = field(default=None, init=False, repr=False)

    def __repr__(self):
        return f"MappedSet({self.label})"

    def boundary(self, n):
        return np.asarray(self.forward(self.base.boundary(n)), dtype=complex)

    def boundary_gaps(self, n):
        if self.gap_map is None:
            return 1.0 - self.boundary(n)
        return np.asarray(self.gap_map(self.base.boundary(n)), dtype=complex)

    def as_polygon(self) -> Polygon:
        if self._polygon is None:
            object.__setattr__(self, "_polygon", Polygon(self.boundary(self.polygon_samples)))
        return self._polygon

    def contains(self, x, y):
        return self.as_polygon().contains(x, y)

    def distance(self, x, y):
        return self.as_polygon().distance(x, y)

    def bbox(self):
        return self.as_polygon().bbox()

    def wos_spec(self):
        return self.as_polygon().wos_spec()


def parse_set(text: str) -> CompactSet:
    """Parse ``disk:c,r``, ``annulus:c,r1,r2``, ``segment:a,b`` or ``polygon:z1;z2;...``.

    Numbers use Python complex syntax, e.g. ``disk:0.1+0.2j,0.3``.
    """
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "disk":
            c, r = rest.split(",")
            return Disk(complex(c), float(r))
        if kind == "annulus":
            c, r1, r2 = rest.split(",")
            return Annulus(complex(c), float(r1), float(r2))
        if kind == "segment":
            a, b = rest.split(",")
            return Segment(complex(a), complex(b))
        if kind == "polygon":
            return Polygon(np.array([complex(p) for p in rest.split(";")]))
    except PolarSetError:
        raise
    except ValueError as exc:
        raise ValueError(f"malformed set spec {text!r}: {exc}") from None
    if kind in ("points", "point"):
        raise PolarSetError("finite point sets are polar and cannot be plates")
    raise ValueError(f"unknown set kind {kind!r} in {text!r}")
