"""Open domains hosting the field problems: the unit disk and Koenigs images.

A region answers ``contains`` for grid classification and ``boundary_distance``
for walk-on-spheres.  ``faces`` lists straight horizontal/vertical boundary
lines so the grid can put them exactly half-way between nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as K


class Region:
    x_faces: tuple[float, ...] = ()
    y_faces: tuple[float, ...] = ()

    def contains(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def boundary_distance(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def wos_spec(self):
        raise NotImplementedError(f"{type(self).__name__} has no walk-on-spheres description")

    def bbox(self):
        return (-np.inf, np.inf, -np.inf, np.inf)


@dataclass(frozen=True)
class DiskRegion(Region):
    center: complex = 0j
    radius: float = 1.0

    def contains(self, x, y):
        return np.hypot(np.asarray(x) - self.center.real, np.asarray(y) - self.center.imag) < self.radius

    def boundary_distance(self, x, y):
        return self.radius - np.hypot(np.asarray(x) - self.center.real, np.asarray(y) - self.center.imag)

    def wos_spec(self):
        return K.DOMAIN_DISK, np.array([self.center.real, self.center.imag, self.radius])

    def bbox(self):
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r


UNIT_DISK = DiskRegion()


@dataclass(frozen=True)
class Strip(Region):
    """Horizontal strip ``lower < Im w < upper``."""

    lower: float
    upper: float

    @property
    def y_faces(self):
        return (self.lower, self.upper)

    def contains(self, x, y):
        y = np.asarray(y)
        return (y > self.lower) & (y < self.upper) & np.isfinite(np.asarray(x))

    def boundary_distance(self, x, y):
        y = np.asarray(y)
        return np.minimum(y - self.lower, self.upper - y)

    def wos_spec(self):
        return K.DOMAIN_STRIP, np.array([self.lower, self.upper])

    def bbox(self):
        return (-np.inf, np.inf, self.lower, self.upper)


@dataclass(frozen=True)
class HalfPlane(Region):
    """Axis-aligned half-plane ``{Re w > c}``, ``{Im w > c}`` and the like.

    ``axis`` is ``"x"`` or ``"y"``; ``sign`` +1 keeps the side above ``offset``.
    """

    axis: str
    offset: float
    sign: int = 1

    @property
    def x_faces(self):
        return (self.offset,) if self.axis == "x" else ()

    @property
    def y_faces(self):
        return (self.offset,) if self.axis == "y" else ()

    def _coord(self, x, y):
        return np.asarray(x) if self.axis == "x" else np.asarray(y)

    def contains(self, x, y):
        return self.sign * (self._coord(x, y) - self.offset) > 0

    def boundary_distance(self, x, y):
        return self.sign * (self._coord(x, y) - self.offset)

    def wos_spec(self):
        nx, ny = (self.sign, 0.0) if self.axis == "x" else (0.0, self.sign)
        return K.DOMAIN_HALFPLANE, np.array([nx, ny, self.sign * self.offset])

    def bbox(self):
        lo, hi = (self.offset, np.inf) if self.sign > 0 else (-np.inf, self.offset)
        return (lo, hi, -np.inf, np.inf) if self.axis == "x" else (-np.inf, np.inf, lo, hi)


@dataclass(frozen=True)
class Rectangle(Region):
    x0: float
    x1: float
    y0: float
    y1: float

    def contains(self, x, y):
        x, y = np.asarray(x), np.asarray(y)
        return (x > self.x0) & (x < self.x1) & (y > self.y0) & (y < self.y1)

    def boundary_distance(self, x, y):
        x, y = np.asarray(x), np.asarray(y)
        return np.minimum(np.minimum(x - self.x0, self.x1 - x), np.minimum(y - self.y0, self.y1 - y))

    def wos_spec(self):
        return K.DOMAIN_RECT, np.array([self.x0, self.x1, self.y0, self.y1])

    def bbox(self):
        return self.x0, self.x1, self.y0, self.y1


@dataclass(frozen=True)
class Intersection(Region):
    first: Region
    second: Region

    @property
    def x_faces(self):
        return tuple(self.first.x_faces) + tuple(self.second.x_faces)

    @property
    def y_faces(self):
        return tuple(self.first.y_faces) + tuple(self.second.y_faces)

    def contains(self, x, y):
        return self.first.contains(x, y) & self.second.contains(x, y)

    def boundary_distance(self, x, y):
        return np.minimum(self.first.boundary_distance(x, y), self.second.boundary_distance(x, y))

    def bbox(self):
        a, b = self.first.bbox(), self.second.bbox()
        return max(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), min(a[3], b[3])


@dataclass(frozen=True, eq=False)
class KoenigsImageRegion(Region):
    """Generic ``Omega = h(D)`` recognised through the inverse map.

    ``w`` belongs to Omega when ``h_inverse(w)`` lands in the disk and maps
    back to ``w``.  No distance function is available, so walk-on-spheres is
    not supported here.
    """

    h: Callable
    h_inverse: Callable
    tol: float = 1e-8

    def contains(self, x, y):
        w = np.asarray(x) + 1j * np.asarray(y)
        z = self.h_inverse(w)
        ok = np.isfinite(z) & (np.abs(z) < 1.0)
        back = self.h(np.where(ok, z, 0.0))
        return ok & (np.abs(back - w) <= self.tol * (1.0 + np.abs(w)))
