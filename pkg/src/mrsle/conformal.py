"""Geometric kernels on the unit disc.

Points of the disc are plain Python complex numbers; boundary points are
given by their (lifted) angle.  Everything here is closed form.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "wrap_angle",
    "conformal_radius_disc",
    "poisson_kernel_interior",
    "boundary_poisson",
    "MobiusMap",
    "mobius_to_origin",
    "SlitHull",
    "SlitHullMap",
    "slit_hull_map",
]


def wrap_angle(x):
    """Reduce an angle (or array of angles) to (-pi, pi]."""
    y = np.remainder(np.asarray(x, dtype=float) + math.pi, 2 * math.pi) - math.pi
    y = np.where(y == -math.pi, math.pi, y)
    return float(y) if np.ndim(y) == 0 else y


def _check_disc(z: complex) -> complex:
    z = complex(z)
    if not abs(z) < 1.0:
        raise DomainError(f"point {z} is not inside the unit disc")
    return z


def conformal_radius_disc(z: complex) -> float:
    z = _check_disc(z)
    return 1.0 - abs(z) ** 2


def poisson_kernel_interior(theta: float, z: complex) -> float:
    z = _check_disc(z)
    return (1.0 - abs(z) ** 2) / abs(z - cmath.exp(1j * theta)) ** 2


def boundary_poisson(theta: float, vartheta: float) -> float:
    s = math.sin(wrap_angle(vartheta - theta) / 2)
    if s == 0.0:
        raise DomainError("boundary Poisson kernel at coincident points")
    return 1.0 / (4.0 * s * s)


@dataclass(frozen=True)
class MobiusMap:
    """Disc automorphism w -> (w - z0) / (1 - conj(z0) w)."""

    z0: complex

    def __call__(self, w):
        return (w - self.z0) / (1 - np.conj(self.z0) * w)

    def deriv(self, w):
        return (1 - abs(self.z0) ** 2) / (1 - np.conj(self.z0) * w) ** 2

    def inverse(self, w):
        return (w + self.z0) / (1 + np.conj(self.z0) * w)

    def angle(self, theta):
        """Continuous lift of the boundary action theta -> arg phi(e^{i theta}).

        The lift is chosen so that it agrees with theta up to the bounded
        correction arg((1 - z0 e^{-i theta}) / (1 - conj(z0) e^{i theta})),
        which never wraps because |z0| < 1.
        """
        e = np.exp(1j * np.asarray(theta, dtype=float))
        return theta + np.angle((1 - self.z0 / e)) - np.angle(1 - np.conj(self.z0) * e)

    def angle_deriv(self, theta):
        """|phi'(e^{i theta})|, the derivative of the boundary lift."""
        return np.abs(self.deriv(np.exp(1j * np.asarray(theta, dtype=float))))


def mobius_to_origin(z0: complex) -> MobiusMap:
    return MobiusMap(_check_disc(z0))


@dataclass(frozen=True)
class SlitHull:
    """Radial slit {rho e^{i anchor} : 1 - depth <= rho <= 1}."""

    anchor: float
    depth: float

    def __post_init__(self):
        if not 0.0 < self.depth < 1.0:
            raise DomainError(f"slit depth {self.depth} outside (0, 1)")

    @property
    def tip_radius(self) -> float:
        return 1.0 - self.depth


class SlitHullMap:
    """Uniformizer of the disc minus a radial slit, normalized at 0.

    In the rotated frame where the slit is [r, 1], the map solves
    g / (1 + g)^2 = L * z / (1 + z)^2 with L = (1 + r)^2 / (4 r) = g'(0); this
    is the Koebe-function form of the frozen-driving radial Loewner slit.
    """

    def __init__(self, hull: SlitHull):
        self.hull = hull
        r = hull.tip_radius
        self.cap = (1 + r) ** 2 / (4 * r)
        self._rot = cmath.exp(1j * hull.anchor)

    @property
    def log_capacity(self) -> float:
        return math.log(self.cap)

    def derivative_at_origin(self) -> float:
        return self.cap

    def _solve(self, c, z):
        # c g^2 + (2c - 1) g + c = 0 ; roots g and 1/g, keep the one in the disc
        c = np.asarray(c, dtype=complex)
        s = np.sqrt(1 - 4 * c)
        b = 2 * c - 1
        q = -0.5 * (b + np.where(np.real(np.conj(b) * s) >= 0, s, -s))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            g1 = np.where(q != 0, q / c, 0.0)
            g2 = np.where(q != 0, c / q, 0.0)
        g = np.where(np.abs(g1) <= np.abs(g2), g1, g2)
        # on the circle the roots are conjugate; the map preserves the sign of Im
        tie = np.abs(np.abs(g1) - np.abs(g2)) < 1e-9
        flip = tie & (np.imag(g) * np.imag(z) < 0)
        return np.where(flip, np.conj(g), g)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex) / self._rot
        with np.errstate(divide="ignore", invalid="ignore"):
            c = self.cap * z / (1 + z) ** 2
            g = np.where(z == 0, 0.0, self._solve(c, z))
        out = g * self._rot
        return complex(out) if out.ndim == 0 else out

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        g = np.asarray(self(z), dtype=complex) / self._rot
        zr = z / self._rot
        out = self.cap * (1 - zr) * (1 + g) ** 3 / ((1 + zr) ** 3 * (1 - g))
        return complex(out) if out.ndim == 0 else out

    def boundary_image(self, theta):
        """Angles of the images of boundary points e^{i theta} (off the slit base)."""
        return np.angle(np.asarray(self(np.exp(1j * np.asarray(theta, dtype=float)))))

    def conformal_radius(self, z: complex) -> float:
        z = _check_disc(z)
        g = self(z)
        return (1 - abs(g) ** 2) / abs(self.deriv(z))

    def poisson_kernel(self, theta: float, z: complex) -> float:
        """H(U minus K; e^{i theta}; z) by conformal covariance."""
        x = cmath.exp(1j * theta)
        gx = self(x)
        return abs(self.deriv(x)) * poisson_kernel_interior(cmath.phase(gx), self(_check_disc(z)))


def slit_hull_map(hull: SlitHull) -> SlitHullMap:
    return SlitHullMap(hull)
