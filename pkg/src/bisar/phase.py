"""Phase functions of the forward operator and of the normal-operator kernel.

``psi`` is the phase of the forward scattering integral, ``phi`` the phase
of the kernel of F*F.  Derivatives are closed form; finite differences only
appear in :func:`check_phase_gradients`, which is the oracle for them.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .geometry import AcquisitionGeometry, GroundPoint, bistatic_range, range_gradient


class ForwardPhasePoint(NamedTuple):
    s: float
    t: float
    x: GroundPoint
    omega: float


class KernelPhasePoint(NamedTuple):
    x: GroundPoint
    y: GroundPoint
    s: float
    omega: float


class PhiDerivs(NamedTuple):
    dx1: np.ndarray
    dx2: np.ndarray
    dy1: np.ndarray
    dy2: np.ndarray
    ds: np.ndarray
    domega: np.ndarray

    @property
    def xi(self):
        return self.dx1, self.dx2

    @property
    def eta(self):
        return -self.dy1, -self.dy2


def psi(geom: AcquisitionGeometry, p: ForwardPhasePoint):
    return -p.omega * (p.t - bistatic_range(geom, p.s, p.x) / geom.c0)


def psi_derivs(geom: AcquisitionGeometry, p: ForwardPhasePoint):
    """(d/ds, d/dt, d/dx1, d/dx2, d/domega) of psi."""
    rs, r1, r2 = range_gradient(geom, p.s, p.x)
    k = p.omega / geom.c0
    dt = -p.omega + 0.0 * rs
    domega = -(p.t - bistatic_range(geom, p.s, p.x) / geom.c0)
    return k * rs, dt, k * r1, k * r2, domega


def phi(geom: AcquisitionGeometry, p: KernelPhasePoint):
    return p.omega / geom.c0 * (bistatic_range(geom, p.s, p.y) - bistatic_range(geom, p.s, p.x))


def phi_derivs(geom: AcquisitionGeometry, p: KernelPhasePoint) -> PhiDerivs:
    _, x1, x2 = range_gradient(geom, p.s, p.x)
    _, y1, y2 = range_gradient(geom, p.s, p.y)
    k = p.omega / geom.c0
    domega = (bistatic_range(geom, p.s, p.y) - bistatic_range(geom, p.s, p.x)) / geom.c0
    dx1 = -k * x1
    dy1 = k * y1
    # translation invariance: d_s phi = -(d_x1 + d_y1) phi
    return PhiDerivs(dx1, -k * x2, dy1, k * y2, -(dx1 + dy1), domega)


def _fd_step(v):
    return 1e-6 * np.maximum(1.0, np.abs(v))


def _central(f, args, i):
    args = [np.asarray(a, dtype=float) for a in args]
    step = _fd_step(args[i])
    hi = list(args)
    lo = list(args)
    hi[i] = args[i] + step
    lo[i] = args[i] - step
    # use the representable step actually taken
    return (f(*hi) - f(*lo)) / (hi[i] - lo[i])


def _rel_err(analytic, numeric, scale):
    return np.abs(analytic - numeric) / np.maximum(scale, 1e-300)


def sample_kernel_points(geom: AcquisitionGeometry, n: int, rng: np.random.Generator):
    """Random (x, y, s, omega) away from the under-track point and omega = 0."""
    scale = geom.alpha + geom.h
    s = rng.uniform(-2 * scale, 2 * scale, n)

    def ground():
        while True:
            u = rng.uniform(-5 * scale, 5 * scale, (2, n))
            ok = np.hypot(u[0], u[1]) >= 1e-3 * geom.alpha
            if ok.all():
                return GroundPoint(s + u[0], u[1])

    x = ground()
    y = ground()
    omega = rng.uniform(0.1, 10.0, n) * rng.choice([-1.0, 1.0], n)
    return KernelPhasePoint(x, y, s, omega)


def check_phase_gradients(geom: AcquisitionGeometry, samples: int, seed: int = 0) -> float:
    """Worst relative error of the analytic psi/phi partials against central differences.

    The error of each partial is measured relative to the size of the full
    gradient at that point, so components that happen to vanish do not
    produce spurious blow-ups.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    kp = sample_kernel_points(geom, samples, rng)
    x1, x2 = kp.x
    y1, y2 = kp.y
    s, omega = kp.s, kp.omega
    t = rng.uniform(geom.t_window[0], geom.t_window[1], samples)

    def phi_flat(x1, x2, y1, y2, s, omega):
        return phi(geom, KernelPhasePoint(GroundPoint(x1, x2), GroundPoint(y1, y2), s, omega))

    def psi_flat(s, t, x1, x2, omega):
        return psi(geom, ForwardPhasePoint(s, t, GroundPoint(x1, x2), omega))

    worst = 0.0
    analytic = phi_derivs(geom, kp)
    args = (x1, x2, y1, y2, s, omega)
    numeric = [_central(phi_flat, args, i) for i in range(6)]
    scale = np.sqrt(sum(np.square(a) for a in analytic))
    for a, n in zip(analytic, numeric):
        worst = max(worst, float(np.max(_rel_err(a, n, scale))))

    analytic = psi_derivs(geom, ForwardPhasePoint(s, t, kp.x, omega))
    args = (s, t, x1, x2, omega)
    numeric = [_central(psi_flat, args, i) for i in range(5)]
    scale = np.sqrt(sum(np.square(a) for a in analytic))
    for a, n in zip(analytic, numeric):
        worst = max(worst, float(np.max(_rel_err(a, n, scale))))
    return worst
