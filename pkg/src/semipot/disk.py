"""Closed-form conformal geometry of the unit disk and the Koebe domain.

All functions accept Python scalars or numpy arrays and broadcast.  Points
close to the boundary point 1 lose their distance to the circle when stored
as plain complex numbers, so every metric quantity has a ``*_from_gaps``
variant that takes ``1 - z`` instead of ``z``.  The plain functions simply
form the gaps themselves (``1 - z`` is exact in floating point for
``Re z >= 1/2``).
"""

from __future__ import annotations

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain of the requested map."""


class BranchCutError(DomainError):
    """An argument lies on the slit of the Koebe domain."""


def _scalar_or_array(x):
    if np.ndim(x) == 0:
        return x.item() if isinstance(x, np.generic | np.ndarray) else x
    return x


def _check_disk(*points):
    for p in points:
        if np.any(~np.isfinite(p)) or np.any(np.abs(p) >= 1.0):
            raise DomainError("point(s) outside the open unit disk")


def _check_gaps(*gaps):
    for g in gaps:
        g = np.asarray(g)
        inside = 2.0 * g.real - (g.real**2 + g.imag**2)
        if np.any(~np.isfinite(g)) or np.any(inside <= 0.0):
            raise DomainError("gap(s) do not describe points of the open unit disk")


def one_minus_modulus_sq(gap):
    """``1 - |z|**2`` for ``z = 1 - gap`` without cancellation near z = 1."""
    gap = np.asarray(gap, dtype=complex)
    return 2.0 * gap.real - (gap.real**2 + gap.imag**2)


def _kernel(gz, gw, diff=None):
    # z = 1 - gz, w = 1 - gw:  z - w = gw - gz,  1 - conj(z) w = conj(gz) + gw - conj(gz) gw
    gz = np.asarray(gz, dtype=complex)
    gw = np.asarray(gw, dtype=complex)
    # callers holding z and w pass z - w: forming gaps first loses it near the origin
    diff = gw - gz if diff is None else np.asarray(diff, dtype=complex)
    den = np.conj(gz) + gw - np.conj(gz) * gw
    # moduli via hypot and ratios before products: gaps may sit near 1e-300
    aden = np.abs(den)
    rho2 = (np.abs(diff) / aden) ** 2
    s = (one_minus_modulus_sq(gz) / aden) * (one_minus_modulus_sq(gw) / aden)
    return rho2, s


def pseudo_hyperbolic_from_gaps(gz, gw, diff=None):
    rho2, _ = _kernel(gz, gw, diff)
    return _scalar_or_array(np.sqrt(rho2))


def hyperbolic_distance_from_gaps(gz, gw, diff=None):
    rho2, s = _kernel(gz, gw, diff)
    rho = np.sqrt(rho2)
    # near rho = 1 use arctanh(rho) = log(1 + rho) - log(1 - rho^2) / 2 with 1 - rho^2 taken from s
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(rho < 0.5, np.arctanh(np.minimum(rho, 0.5)), np.log1p(rho) - 0.5 * np.log(s))
    return _scalar_or_array(np.where(rho2 == 0.0, 0.0, d))


def green_disk_from_gaps(gz, gw, diff=None):
    rho2, s = _kernel(gz, gw, diff)
    with np.errstate(divide="ignore"):
        g = np.where(s < 0.5, -0.5 * np.log1p(-s), -0.5 * np.log(rho2))
    return _scalar_or_array(np.where(rho2 == 0.0, np.inf, g))


def _point_gaps(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return 1.0 - z, 1.0 - w, z - w


def pseudo_hyperbolic(z, w):
    """Pseudo-hyperbolic distance ``|z - w| / |1 - conj(z) w|``."""
    _check_disk(z, w)
    return pseudo_hyperbolic_from_gaps(*_point_gaps(z, w))


def hyperbolic_distance(z, w):
    """Hyperbolic distance ``arctanh(rho(z, w))`` (curvature -4 normalisation)."""
    _check_disk(z, w)
    return hyperbolic_distance_from_gaps(*_point_gaps(z, w))


def green_disk(z, w):
    """Green function of the disk, ``log |(1 - z conj(w)) / (z - w)|``.

    Returns ``inf`` at coincident points instead of clamping.
    """
    _check_disk(z, w)
    return green_disk_from_gaps(*_point_gaps(z, w))


def neg_log_tanh(x):
    """``-log tanh x`` evaluated as ``2 artanh(exp(-2x))`` (no cancellation for large x)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return _scalar_or_array(2.0 * np.arctanh(np.exp(-2.0 * x)))


def sigma(x):
    """``log(-log tanh x) / x`` on ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0.0)) or np.any(~np.isfinite(x)):
        raise DomainError("sigma is defined for finite x > 0 only")
    return _scalar_or_array(np.log(neg_log_tanh(x)) / x)


def koebe(z):
    """Koebe function ``z / (1 - z)**2``."""
    _check_disk(z)
    z = np.asarray(z, dtype=complex)
    return _scalar_or_array(z / (1.0 - z) ** 2)


def _koebe_root(w):
    w = np.asarray(w, dtype=complex)
    if np.any(~np.isfinite(w)):
        raise DomainError("non-finite Koebe-domain point")
    on_slit = (w.imag == 0.0) & (w.real <= -0.25)
    if np.any(on_slit):
        raise BranchCutError("point on the slit (-inf, -1/4]")
    return np.sqrt(4.0 * w + 1.0)


def koebe_inverse(w):
    """Inverse Koebe map ``(sqrt(4w+1) - 1) / (sqrt(4w+1) + 1)`` on the principal branch."""
    r = _koebe_root(w)
    return _scalar_or_array((r - 1.0) / (r + 1.0))


def koebe_hyperbolic_distance(z, w):
    """Hyperbolic distance of the slit plane ``C \\ (-inf, -1/4]``.

    ``sqrt(4w + 1)`` maps the slit plane onto the right half-plane, where the
    pseudo-hyperbolic distance is ``|p - q| / |conj(p) + q|``.
    """
    p = _koebe_root(z)
    q = _koebe_root(w)
    diff = p - q
    den = np.conj(p) + q
    den2 = den.real**2 + den.imag**2
    rho = np.sqrt((diff.real**2 + diff.imag**2) / den2)
    s = 4.0 * p.real * q.real / den2
    with np.errstate(divide="ignore"):
        d = np.log1p(rho) - 0.5 * np.log(s)
    return _scalar_or_array(np.where(rho == 0.0, 0.0, d))


def automorphism(a, theta=0.0):
    """Disk automorphism ``z -> exp(i theta) (z - a) / (1 - conj(a) z)``."""
    _check_disk(a)
    rot = np.exp(1j * theta)

    def m(z):
        z = np.asarray(z, dtype=complex)
        return _scalar_or_array(rot * (z - a) / (1.0 - np.conj(a) * z))

    return m
