"""Flight geometry for a bistatic pair flying one straight track.

Transmitter and receiver share height ``h`` and move along the x1 axis a
fixed distance ``2 * alpha`` apart.  Every function here broadcasts over
numpy arrays, so ``GroundPoint(x1_array, x2_array)`` works wherever a
single point does.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# prolate inversion degeneracy threshold, relative to alpha
DEGENERACY_EPS = 1e-12


class DegenerateCoordinatesError(ValueError):
    """Raised when a point has no (or an ambiguous) prolate representation."""


@dataclass(frozen=True)
class AcquisitionGeometry:
    alpha: float
    h: float
    c0: float = 1.0
    s_window: tuple[float, float] = (-2.0, 2.0)
    t_window: tuple[float, float] = (2.0, 9.0)
    mute_halfwidth: float = 0.05
    taper_fraction: float = 0.1

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if not self.c0 > 0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        s0, s1 = self.s_window
        t0, t1 = self.t_window
        if not s0 < s1:
            raise ValueError(f"empty slow-time window {self.s_window}")
        if not t0 < t1:
            raise ValueError(f"empty fast-time window {self.t_window}")
        if not self.mute_halfwidth >= 0:
            raise ValueError("mute_halfwidth must be non-negative")
        if not 0 <= self.taper_fraction < 0.5:
            raise ValueError("taper_fraction must lie in [0, 0.5)")

    @property
    def min_range(self) -> float:
        """Smallest possible bistatic range, attained directly under the track."""
        return 2.0 * np.hypot(self.alpha, self.h)

    @property
    def mute_time(self) -> float:
        return self.min_range / self.c0


class GroundPoint(NamedTuple):
    x1: float | np.ndarray
    x2: float | np.ndarray


class ProlateCoords(NamedTuple):
    rho: float | np.ndarray
    theta: float | np.ndarray
    phi_angle: float | np.ndarray
    degenerate: bool | np.ndarray = False


def transmitter_pos(geom: AcquisitionGeometry, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.stack(np.broadcast_arrays(s + geom.alpha, 0.0 * s, geom.h + 0.0 * s), axis=-1)


def receiver_pos(geom: AcquisitionGeometry, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.stack(np.broadcast_arrays(s - geom.alpha, 0.0 * s, geom.h + 0.0 * s), axis=-1)


def focal_distances(geom: AcquisitionGeometry, s, x):
    """Return (X1, X2): distances from ground point ``x`` to transmitter and receiver."""
    x1, x2 = x
    u = np.asarray(x1, dtype=float) - s
    lateral2 = np.asarray(x2, dtype=float) ** 2 + geom.h**2
    X1 = np.sqrt((u - geom.alpha) ** 2 + lateral2)
    X2 = np.sqrt((u + geom.alpha) ** 2 + lateral2)
    return X1, X2


def bistatic_range(geom: AcquisitionGeometry, s, x):
    X1, X2 = focal_distances(geom, s, x)
    return X1 + X2


def range_gradient(geom: AcquisitionGeometry, s, x):
    """Closed-form (dR/ds, dR/dx1, dR/dx2)."""
    x1, x2 = x
    X1, X2 = focal_distances(geom, s, x)
    u = np.asarray(x1, dtype=float) - s
    x2 = np.asarray(x2, dtype=float)
    d1 = (u - geom.alpha) / X1 + (u + geom.alpha) / X2
    d2 = x2 / X1 + x2 / X2
    return -d1, d1, d2


def range_hessian(geom: AcquisitionGeometry, s, x):
    """Second partials (R_11, R_12, R_22) in the ground coordinates.

    Mixed partials with s follow from translation invariance:
    R_1s = -R_11 and R_2s = -R_12.
    """
    x1, x2 = x
    X1, X2 = focal_distances(geom, s, x)
    u = np.asarray(x1, dtype=float) - s
    x2 = np.asarray(x2, dtype=float)
    lateral2 = x2**2 + geom.h**2
    r11 = lateral2 / X1**3 + lateral2 / X2**3
    r12 = -(u - geom.alpha) * x2 / X1**3 - (u + geom.alpha) * x2 / X2**3
    r22 = ((u - geom.alpha) ** 2 + geom.h**2) / X1**3 + ((u + geom.alpha) ** 2 + geom.h**2) / X2**3
    return r11, r12, r22


def ground_to_prolate(geom: AcquisitionGeometry, s, x, *, strict: bool = False) -> ProlateCoords:
    """Prolate spheroidal coordinates of a ground point, foci at the two antennas.

    theta is taken in [0, pi] and the azimuth branch is fixed by the sign of
    x2; x2 == 0 maps to phi = 3*pi/2.  Points directly under the track
    midpoint, x = (s, 0), come back flagged ``degenerate``; with
    ``strict=True`` they raise instead.
    """
    alpha, h = geom.alpha, geom.h
    x1, x2 = (np.asarray(v, dtype=float) for v in x)
    X1, X2 = focal_distances(geom, s, x)
    total = X1 + X2
    cosh_rho = total / (2 * alpha)
    cos_theta = 2 * (x1 - s) / total
    sinh2_rho = (total - 2 * alpha) * (total + 2 * alpha) / (4 * alpha**2)
    lateral2 = x2**2 + h**2
    # alpha^2 sinh^2(rho) sin^2(theta) = x2^2 + h^2 on the ground plane
    sin2_theta = np.minimum(lateral2 / (alpha**2 * sinh2_rho), 1.0)
    if np.any(alpha * np.sqrt(sinh2_rho * sin2_theta) < h - DEGENERACY_EPS * alpha):
        raise DegenerateCoordinatesError("no real azimuth: point is off the ground plane")
    rho = np.arccosh(cosh_rho)
    theta = np.arctan2(np.sqrt(sin2_theta), cos_theta)
    phi_angle = np.mod(np.arctan2(-h + 0.0 * x2, x2), 2 * np.pi)
    degenerate = (x1 == s) & (x2 == 0)
    if strict and np.any(degenerate):
        raise DegenerateCoordinatesError("point lies directly under the track midpoint")
    if np.ndim(degenerate) == 0:
        degenerate = bool(degenerate)
    return ProlateCoords(rho, theta, phi_angle, degenerate)


def prolate_to_ground(geom: AcquisitionGeometry, s, p: ProlateCoords) -> np.ndarray:
    """Inverse map; returns the full 3-vector (x1, x2, x3)."""
    alpha = geom.alpha
    radial = alpha * np.sinh(p.rho) * np.sin(p.theta)
    x1 = s + alpha * np.cosh(p.rho) * np.cos(p.theta)
    x2 = radial * np.cos(p.phi_angle)
    x3 = geom.h + radial * np.sin(p.phi_angle)
    return np.stack(np.broadcast_arrays(x1, x2, x3), axis=-1)


@dataclass(frozen=True)
class Ellipse:
    center: tuple[float, float]
    semi_axis_x1: float
    semi_axis_x2: float

    def sample(self, n: int) -> GroundPoint:
        angle = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return GroundPoint(
            self.center[0] + self.semi_axis_x1 * np.cos(angle),
            self.center[1] + self.semi_axis_x2 * np.sin(angle),
        )


def iso_range_ellipse(geom: AcquisitionGeometry, s: float, t: float) -> Ellipse | None:
    """Ground trace of the iso-range surface R(s, x) = c0 * t, or None if empty."""
    if not t > 0:
        raise ValueError("t must be positive")
    if geom.c0 * t <= geom.min_range:
        return None
    a = geom.c0 * t / 2
    b2 = a * a - geom.alpha**2
    B = np.sqrt(max(b2 - geom.h**2, 0.0))
    A = a * B / np.sqrt(b2)
    return Ellipse((float(s), 0.0), float(A), float(B))
