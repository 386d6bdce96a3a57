"""Decompositions of the generators p~1..p~6 in terms of d_s phi and d_omega phi.

The ideal of functions vanishing on the diagonal and on the mirror relation
is generated by

    p~1 = x1 - y1            p~2 = x2^2 - y2^2        p~3 = xi1 - eta1
    p~4 = (x2+y2)(xi2-eta2)  p~5 = (x2-y2)(xi2+eta2)  p~6 = xi2^2 - eta2^2

and each one is a smooth combination of the two phase derivatives:

    p~i = omega^-e_i f_i1 d_s phi + omega^d_i f_i2 d_omega phi,
    (e, d) = (1, 0), (1, 0), -, (0, 1), (0, 1), (-1, 2).

Coefficients are assembled in prolate spheroidal coordinates (C = cosh rho,
c = cos theta, primes for y).  Two building blocks carry the whole chain:

    C' - C  = c0 d_omega phi / (2 alpha)
    c - c'  = K (c0 d_s phi / (2 omega) + M (C' - C))

with K = (C^2-c^2)(C^2-c'^2) / (sinh^2 rho (C^2+cc')) and
M = c' sin^2 theta' (C+C') / ((C'^2-c'^2)(C^2-c'^2)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import (
    AcquisitionGeometry,
    DegenerateCoordinatesError,
    GroundPoint,
    ProlateCoords,
    focal_distances,
    ground_to_prolate,
)
from .phase import KernelPhasePoint, phi_derivs

EPS_FLOOR = 1e-30
DENOM_TOL = 1e-12
# omega weights (e_i, d_i); identity 3 has no coefficients
OMEGA_WEIGHTS = {1: (1, 0), 2: (1, 0), 4: (0, 1), 5: (0, 1), 6: (-1, 2)}


class PairPoint(NamedTuple):
    x: GroundPoint
    y: GroundPoint
    s: float
    omega: float
    prolate_x: ProlateCoords
    prolate_y: ProlateCoords

    @property
    def kernel_point(self) -> KernelPhasePoint:
        return KernelPhasePoint(self.x, self.y, self.s, self.omega)


def make_pair(geom: AcquisitionGeometry, x, y, s, omega) -> PairPoint:
    """Build a PairPoint, caching both prolate conversions; rejects the under-track point."""
    if np.any(np.asarray(omega) == 0):
        raise ValueError("omega must be nonzero")
    x = GroundPoint(*x)
    y = GroundPoint(*y)
    px = ground_to_prolate(geom, s, x, strict=True)
    py = ground_to_prolate(geom, s, y, strict=True)
    return PairPoint(x, y, s, omega, px, py)


@dataclass
class IdentityResidual:
    identity_index: int
    lhs: np.ndarray
    rhs: np.ndarray
    abs_residual: np.ndarray
    rel_residual: np.ndarray
    coefficients: list = field(default_factory=list)


def ptilde(geom: AcquisitionGeometry, i: int, p: PairPoint):
    x1, x2 = (np.asarray(v, dtype=float) for v in p.x)
    y1, y2 = (np.asarray(v, dtype=float) for v in p.y)
    d = phi_derivs(geom, p.kernel_point)
    xi1, xi2 = d.xi
    eta1, eta2 = d.eta
    if i == 1:
        return x1 - y1
    if i == 2:
        return x2**2 - y2**2
    if i == 3:
        return xi1 - eta1
    if i == 4:
        return (x2 + y2) * (xi2 - eta2)
    if i == 5:
        return (x2 - y2) * (xi2 + eta2)
    if i == 6:
        return xi2**2 - eta2**2
    raise ValueError(f"identity index must be in 1..6, got {i}")


class _Prolate(NamedTuple):
    C: np.ndarray
    c: np.ndarray
    sinh2: np.ndarray
    sin2: np.ndarray


def _unpack(pc: ProlateCoords) -> _Prolate:
    return _Prolate(np.cosh(pc.rho), np.cos(pc.theta), np.sinh(pc.rho) ** 2, np.sin(pc.theta) ** 2)


class _Blocks(NamedTuple):
    """Linear forms in (Sn/omega, Wn) where Sn = c0 d_s phi and Wn = c0 d_omega phi."""

    K: np.ndarray
    M: np.ndarray
    a1: tuple  # x1 - y1
    a2: tuple  # x2^2 - y2^2
    hdiff: tuple  # H - H', H = C / (C^2 - c^2)
    H: np.ndarray
    Hp: np.ndarray


def _blocks(geom: AcquisitionGeometry, p: PairPoint) -> _Blocks:
    alpha = geom.alpha
    C, c, sh2, _ = _unpack(p.prolate_x)
    Cp, cp, _, sn2p = _unpack(p.prolate_y)
    D = C**2 - c**2
    Dp = Cp**2 - cp**2
    Dx = C**2 - cp**2
    cross = C**2 + c * cp
    if np.any(np.abs(cross) < DENOM_TOL) or np.any(sh2 < DENOM_TOL):
        raise DegenerateCoordinatesError("prolate denominator below tolerance")
    K = D * Dx / (sh2 * cross)
    M = cp * sn2p * (C + Cp) / (Dp * Dx)
    # c - c' = (K/2) Sn/omega + (K M / (2 alpha)) Wn
    b = (K / 2, K * M / (2 * alpha))
    # x1 - y1 = -(c/2) Wn + alpha C' (c - c')
    a1 = (alpha * Cp * b[0], -c / 2 + alpha * Cp * b[1])
    # x2^2 - y2^2 = (alpha/2)(-(C+C') + (Cc+C'c')c) Wn + Q2 (c - c')
    q2 = alpha**2 * ((c + cp) - (C * c + Cp * cp) * Cp)
    a2 = (q2 * b[0], alpha / 2 * (-(C + Cp) + (C * c + Cp * cp) * c) + q2 * b[1])
    # handy identity: H - H' = P1 (C' - C) + P2 (c - c')
    P1 = (C * Cp + c**2) / (D * Dp)
    P2 = C * (c + cp) / (D * Dp)
    hdiff = (P2 * b[0], P1 / (2 * alpha) + P2 * b[1])
    return _Blocks(K, M, a1, a2, hdiff, C / D, Cp / Dp)


def coefficient_pair(geom: AcquisitionGeometry, i: int, p: PairPoint):
    """Smooth coefficients (f_i1, f_i2) of identity ``i``, built in prolate coordinates."""
    if i == 3:
        raise ValueError("identity 3 is coefficient-free: p~3 = -d_s phi")
    if i not in OMEGA_WEIGHTS:
        raise ValueError(f"identity index must be in 1..6, got {i}")
    c0, alpha = geom.c0, geom.alpha
    blk = _blocks(geom, p)
    x2 = np.asarray(p.x.x2, dtype=float)
    y2 = np.asarray(p.y.x2, dtype=float)
    if i == 1:
        return c0 * blk.a1[0], c0 * blk.a1[1]
    if i == 2:
        return c0 * blk.a2[0], c0 * blk.a2[1]
    # xi2 = kappa x2 H and eta2 = kappa y2 H' with kappa = -2 omega / (c0 alpha)
    if i in (4, 5):
        # p~4 = kappa [(x2^2 + x2 y2)(H - H') + A2 H'], p~5 flips the x2 y2 sign
        mixed = x2**2 + x2 * y2 if i == 4 else x2**2 - x2 * y2
        f1 = mixed * blk.hdiff[0] + blk.Hp * blk.a2[0]
        f2 = mixed * blk.hdiff[1] + blk.Hp * blk.a2[1]
        return -2 / alpha * f1, -2 / alpha * f2
    # p~6 = kappa^2 [x2^2 (H + H')(H - H') + A2 H'^2]
    hsum = blk.H + blk.Hp
    f1 = x2**2 * hsum * blk.hdiff[0] + blk.Hp**2 * blk.a2[0]
    f2 = x2**2 * hsum * blk.hdiff[1] + blk.Hp**2 * blk.a2[1]
    return 4 / (c0 * alpha**2) * f1, 4 / (c0 * alpha**2) * f2


def identity1_cartesian(geom: AcquisitionGeometry, p: PairPoint):
    """(f_11, f_12) written directly in the focal distances X1, X2, Y1, Y2."""
    alpha, s, c0 = geom.alpha, p.s, geom.c0
    X1, X2 = focal_distances(geom, s, p.x)
    Y1, Y2 = focal_distances(geom, s, p.y)
    u = np.asarray(p.x.x1, dtype=float) - s
    v = np.asarray(p.y.x1, dtype=float) - s
    C = (X1 + X2) / (2 * alpha)
    Cp = (Y1 + Y2) / (2 * alpha)
    c = 2 * u / (X1 + X2)
    cp = 2 * v / (Y1 + Y2)
    sinh2 = (X1 + X2 - 2 * alpha) * (X1 + X2 + 2 * alpha) / (4 * alpha**2)
    cross = C**2 + c * cp
    f11 = alpha * Cp * (X1 * X2 / alpha**2) * (C**2 - cp**2) / (2 * sinh2 * cross)
    # C' c' = (y1 - s) / alpha
    tail = X1 * X2 * (v / alpha) * (1 - cp**2) * (C + Cp) / (Y1 * Y2 * sinh2 * cross)
    f12 = -0.5 * (c - tail)
    return c0 * f11, c0 * f12


def rhs(geom: AcquisitionGeometry, i: int, p: PairPoint, coeffs=None):
    d = phi_derivs(geom, p.kernel_point)
    if i == 3:
        return -d.ds
    f1, f2 = coeffs if coeffs is not None else coefficient_pair(geom, i, p)
    e, dw = OMEGA_WEIGHTS[i]
    w = np.asarray(p.omega, dtype=float)
    return f1 * d.ds / w**e + w**dw * f2 * d.domega


def check_identity(geom: AcquisitionGeometry, i: int, p: PairPoint) -> IdentityResidual:
    lhs = ptilde(geom, i, p)
    coeffs = [] if i == 3 else coefficient_pair(geom, i, p)
    right = rhs(geom, i, p, coeffs or None)
    ab = np.abs(lhs - right)
    rel = ab / (np.abs(lhs) + np.abs(right) + EPS_FLOOR)
    return IdentityResidual(i, lhs, right, ab, rel, list(coeffs))


def cos_theta_difference(geom: AcquisitionGeometry, p: PairPoint):
    """cos(theta) - cos(theta'): directly from the coordinates, and rebuilt from the phase derivatives."""
    direct = np.cos(p.prolate_x.theta) - np.cos(p.prolate_y.theta)
    blk = _blocks(geom, p)
    d = phi_derivs(geom, p.kernel_point)
    sn = geom.c0 * d.ds
    wn = geom.c0 * d.domega
    formula = blk.K * (sn / (2 * np.asarray(p.omega, dtype=float)) + blk.M * wn / (2 * geom.alpha))
    return direct, formula


def handy_identity_check(geom: AcquisitionGeometry, p: PairPoint):
    """Relative residual of the rational identity for C/(C^2-c^2) - C'/(C'^2-c'^2)."""
    C, c, _, _ = _unpack(p.prolate_x)
    Cp, cp, _, _ = _unpack(p.prolate_y)
    D = C**2 - c**2
    Dp = Cp**2 - cp**2
    left = C / D - Cp / Dp
    right = ((C * Cp + c**2) * (Cp - C) + C * (c + cp) * (c - cp)) / (D * Dp)
    return np.abs(left - right) / (np.abs(left) + np.abs(right) + EPS_FLOOR)


def sample_pairs(geom: AcquisitionGeometry, n: int, rng: np.random.Generator) -> PairPoint:
    """Random non-degenerate pairs: |x - (s,0)|, |y - (s,0)| >= 1e-3 alpha and |omega| >= 1e-3."""
    scale = geom.alpha + geom.h
    s = rng.uniform(-2 * scale, 2 * scale, n)

    def ground():
        u = rng.uniform(-5 * scale, 5 * scale, (2, n))
        bad = np.hypot(u[0], u[1]) < 1e-3 * geom.alpha
        while bad.any():
            u[:, bad] = rng.uniform(-5 * scale, 5 * scale, (2, int(bad.sum())))
            bad = np.hypot(u[0], u[1]) < 1e-3 * geom.alpha
        return (s + u[0], u[1])

    x = ground()
    y = ground()
    omega = rng.uniform(1e-3, 10.0, n) * rng.choice([-1.0, 1.0], n)
    return make_pair(geom, x, y, s, omega)


def identity_suite(geom: AcquisitionGeometry, samples: int, seed: int = 0) -> dict:
    """Worst relative residual per identity over seeded random pairs."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    p = sample_pairs(geom, samples, np.random.default_rng(seed))
    return {i: float(np.max(check_identity(geom, i, p).rel_residual)) for i in range(1, 7)}
