"""Compiled loops behind the forward and adjoint operators.

Both loops call ``_band`` and ``_weight`` for every (slow time, cell) pair,
so the forward map and its adjoint share bit-identical weights.  Sums use
Neumaier compensation and a fixed traversal order: slow time, then cells in
row-major order, then fast time.
"""
import math

import numpy as np
from numba import njit

RICKER = 0
RAISED_COSINE = 1

_FOUR_PI_SQ = (4.0 * math.pi) ** 2


@njit(cache=True, inline="always")
def _pulse(kind, wc, support, tau):
    if abs(tau) > support:
        return 0.0
    if kind == RICKER:
        q = (wc * tau) ** 2
        return (1.0 - 0.5 * q) * math.exp(-0.25 * q)
    window = 0.5 * (1.0 + math.cos(math.pi * tau / support))
    return math.cos(wc * tau) * window


@njit(cache=True, inline="always")
def _band(alpha, h, c0, s, x1, x2, support, t0, dt, nt):
    """(delay, amplitude, first j, last j) for one cell at one slow time."""
    u = x1 - s
    lat = x2 * x2 + h * h
    X1 = math.sqrt((u - alpha) ** 2 + lat)
    X2 = math.sqrt((u + alpha) ** 2 + lat)
    delay = (X1 + X2) / c0
    amp = 1.0 / (_FOUR_PI_SQ * X1 * X2)
    jlo = max(int(math.ceil((delay - support - t0) / dt)), 0)
    jhi = min(int(math.floor((delay + support - t0) / dt)), nt - 1)
    return delay, amp, jlo, jhi


@njit(cache=True, inline="always")
def _weight(kind, wc, support, amp, delay, t0, dt, j):
    return amp * _pulse(kind, wc, support, (t0 + j * dt) - delay)


@njit(cache=True)
def forward_kernel(alpha, h, c0, kind, wc, support, s_samples, t0, dt, nt, x1, x2, v):
    ns = s_samples.size
    out = np.zeros((ns, nt))
    comp = np.zeros(nt)
    for i in range(ns):
        s = s_samples[i]
        comp[:] = 0.0
        for c in range(v.size):
            if v[c] == 0.0:
                continue
            delay, amp, jlo, jhi = _band(alpha, h, c0, s, x1[c], x2[c], support, t0, dt, nt)
            for j in range(jlo, jhi + 1):
                term = _weight(kind, wc, support, amp, delay, t0, dt, j) * v[c]
                acc = out[i, j]
                tot = acc + term
                if abs(acc) >= abs(term):
                    comp[j] += (acc - tot) + term
                else:
                    comp[j] += (term - tot) + acc
                out[i, j] = tot
        for j in range(nt):
            out[i, j] += comp[j]
    return out


@njit(cache=True)
def adjoint_kernel(alpha, h, c0, kind, wc, support, s_samples, t0, dt, nt, x1, x2, data):
    ncell = x1.size
    out = np.zeros(ncell)
    for c in range(ncell):
        acc = 0.0
        comp = 0.0
        for i in range(s_samples.size):
            delay, amp, jlo, jhi = _band(alpha, h, c0, s_samples[i], x1[c], x2[c], support, t0, dt, nt)
            for j in range(jlo, jhi + 1):
                term = _weight(kind, wc, support, amp, delay, t0, dt, j) * data[i, j]
                tot = acc + term
                if abs(acc) >= abs(term):
                    comp += (acc - tot) + term
                else:
                    comp += (term - tot) + acc
                acc = tot
        out[c] = acc + comp
    return out
