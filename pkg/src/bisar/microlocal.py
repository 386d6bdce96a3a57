"""Canonical relation of the forward operator and the singularities of its projections.

The relation is parameterized globally by the chart (x1, x2, s, omega).  Its
left projection to the data cotangent space folds on Sigma = {x2 = 0}; its
right projection to the scene cotangent space is a blowdown along Sigma.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import (
    AcquisitionGeometry,
    GroundPoint,
    bistatic_range,
    focal_distances,
    range_gradient,
    range_hessian,
)

SIGMA_TOL = 1e-9
RANK_TOL = 1e-8
KERNEL_TOL = 1e-8


class AmbiguousSingularityError(ValueError):
    """Jacobian is numerically singular at a point that is not on Sigma."""


class ChartPoint(NamedTuple):
    x1: float
    x2: float
    s: float
    omega: float


class CanonicalPoint(NamedTuple):
    left: tuple  # (s, t, sigma, tau)
    right: tuple  # (x1, x2, xi1, xi2)


class Verdict(str, enum.Enum):
    REGULAR = "regular"
    FOLD = "fold"
    BLOWDOWN = "blowdown"


@dataclass(frozen=True)
class SingularityReport:
    projection: str
    det_closed_form: float
    det_finite_diff: float
    kernel_direction: np.ndarray
    kernel_in_TSigma: bool
    d_det_along_x2: float
    sigma_ratio: float
    verdict: Verdict


def _require_omega(c: ChartPoint):
    if np.any(np.asarray(c.omega) == 0):
        raise ValueError("omega must be nonzero on the canonical relation")


def lambda_point(geom: AcquisitionGeometry, c: ChartPoint) -> CanonicalPoint:
    _require_omega(c)
    x = GroundPoint(c.x1, c.x2)
    rs, r1, r2 = range_gradient(geom, c.s, x)
    k = c.omega / geom.c0
    t = bistatic_range(geom, c.s, x) / geom.c0
    left = (c.s, t, -k * r1, -c.omega)
    right = (c.x1, c.x2, -k * r1, -k * r2)
    return CanonicalPoint(left, right)


def _left_map(geom, x1, x2, s, omega):
    cp = lambda_point(geom, ChartPoint(x1, x2, s, omega))
    return np.stack(np.broadcast_arrays(*cp.left), axis=-1)


def _right_map(geom, x1, x2, s, omega):
    cp = lambda_point(geom, ChartPoint(x1, x2, s, omega))
    return np.stack(np.broadcast_arrays(*cp.right), axis=-1)


def _pieces(geom, c):
    x = GroundPoint(c.x1, c.x2)
    rs, r1, r2 = range_gradient(geom, c.s, x)
    r11, r12, r22 = range_hessian(geom, c.s, x)
    return r1, r2, r11, r12, r22


def dpi_left(geom: AcquisitionGeometry, c: ChartPoint) -> np.ndarray:
    """Jacobian of (s, t, sigma, tau) with respect to (x1, x2, s, omega)."""
    _require_omega(c)
    r1, r2, r11, r12, _ = _pieces(geom, c)
    k = c.omega / geom.c0
    c0 = geom.c0
    return np.array(
        [
            [0.0, 0.0, 1.0, 0.0],
            [r1 / c0, r2 / c0, -r1 / c0, 0.0],
            [-k * r11, -k * r12, k * r11, -r1 / c0],
            [0.0, 0.0, 0.0, -1.0],
        ]
    )


def dpi_right(geom: AcquisitionGeometry, c: ChartPoint) -> np.ndarray:
    """Jacobian of (x1, x2, xi1, xi2) with respect to (x1, x2, s, omega)."""
    _require_omega(c)
    r1, r2, r11, r12, r22 = _pieces(geom, c)
    k = c.omega / geom.c0
    c0 = geom.c0
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [-k * r11, -k * r12, k * r11, -r1 / c0],
            [-k * r12, -k * r22, k * r12, -r2 / c0],
        ]
    )


def finite_diff_jacobian(geom: AcquisitionGeometry, c: ChartPoint, side: str = "left") -> np.ndarray:
    """Central-difference Jacobian of either projection (oracle for dpi_left/dpi_right)."""
    fn = _left_map if side == "left" else _right_map
    base = np.array(c, dtype=float)
    jac = np.empty((4, 4))
    for j in range(4):
        step = 1e-6 * max(1.0, abs(base[j]))
        hi = base.copy()
        lo = base.copy()
        hi[j] += step
        lo[j] -= step
        jac[:, j] = (fn(geom, *hi) - fn(geom, *lo)) / (hi[j] - lo[j])
    return jac


def positivity_value(alpha, h, u, x2):
    """1 + (u^2 + x2^2 + h^2 - alpha^2) / (X1 X2) with u = x1 - s, free of cancellation.

    With P = u^2 + x2^2 + h^2 - alpha^2 the numerator X1 X2 + P equals
    4 alpha^2 (x2^2 + h^2) / (X1 X2 - P), which is the form used when P < 0.
    Broadcasts over all four arguments.
    """
    u, x2 = np.asarray(u, dtype=float), np.asarray(x2, dtype=float)
    lateral2 = x2**2 + np.asarray(h, dtype=float) ** 2
    prod = np.sqrt((u - alpha) ** 2 + lateral2) * np.sqrt((u + alpha) ** 2 + lateral2)
    p = u**2 + lateral2 - np.asarray(alpha, dtype=float) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.where(p >= 0, prod + p, 4 * np.asarray(alpha, dtype=float) ** 2 * lateral2 / (prod - p))
    return num / prod


def positivity_term(geom: AcquisitionGeometry, s, x):
    return positivity_value(geom.alpha, geom.h, np.asarray(x[0], dtype=float) - s, x[1])


def det_dpi_left(geom: AcquisitionGeometry, c: ChartPoint):
    """Closed-form determinant of dpi_left (equal to that of dpi_right).

    -(omega / c0^2) x2 (1/X1^2 + 1/X2^2) * positivity_term.  The leading
    minus sign is what the Jacobian in the (x1, x2, s, omega) chart gives;
    the determinant vanishes exactly when x2 = 0.
    """
    _require_omega(c)
    x = GroundPoint(c.x1, c.x2)
    X1, X2 = focal_distances(geom, c.s, x)
    return (
        -c.omega / geom.c0**2 * np.asarray(c.x2, dtype=float)
        * (1 / X1**2 + 1 / X2**2)
        * positivity_term(geom, c.s, x)
    )


def d_det_dx2(geom: AcquisitionGeometry, c: ChartPoint):
    """Partial of the closed-form determinant along x2 (central difference of the closed form)."""
    step = 1e-6 * max(1.0, abs(float(c.x2)))
    hi = det_dpi_left(geom, c._replace(x2=c.x2 + step))
    lo = det_dpi_left(geom, c._replace(x2=c.x2 - step))
    return (hi - lo) / (2 * step)


def on_sigma(c: ChartPoint) -> bool:
    return abs(c.x2) <= SIGMA_TOL * max(1.0, abs(c.x1) + abs(c.s))


def classify_singularity(geom: AcquisitionGeometry, c: ChartPoint, projection: str = "left") -> SingularityReport:
    """Classify the singularity of the left (fold) or right (blowdown) projection at ``c``.

    The kernel direction is the right singular vector of the smallest
    singular value.  A rank drop away from Sigma is ambiguous and raises.
    """
    if projection not in ("left", "right"):
        raise ValueError(f"projection must be 'left' or 'right', got {projection!r}")
    jac = dpi_left(geom, c) if projection == "left" else dpi_right(geom, c)
    _, sv, vt = np.linalg.svd(jac)
    kernel = vt[-1]
    ratio = sv[-1] / sv[0]
    det_cf = float(det_dpi_left(geom, c))
    det_fd = float(np.linalg.det(finite_diff_jacobian(geom, c, projection)))
    ddet = float(d_det_dx2(geom, c))
    in_tsigma = bool(abs(kernel[1]) <= KERNEL_TOL)

    if ratio > RANK_TOL:
        verdict = Verdict.REGULAR
    elif not on_sigma(c):
        raise AmbiguousSingularityError(
            f"rank drop (sigma_min/sigma_max = {ratio:.3e}) at x2 = {c.x2!r}, off Sigma"
        )
    elif projection == "left":
        if in_tsigma or abs(abs(kernel[1]) - 1) > KERNEL_TOL or ddet == 0:
            raise AmbiguousSingularityError("left projection degenerates but is not a fold")
        verdict = Verdict.FOLD
    else:
        if not in_tsigma:
            raise AmbiguousSingularityError("right projection kernel is transverse to Sigma")
        verdict = Verdict.BLOWDOWN
    return SingularityReport(projection, det_cf, det_fd, kernel, in_tsigma, ddet, float(ratio), verdict)
