"""Batch verification suites and the flat key=value report they produce."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import identities as ids
from . import microlocal as ml
from .config import RunConfig
from .geometry import AcquisitionGeometry
from .operators import dot_product_test
from .phase import check_phase_gradients


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool


@dataclass
class VerificationReport:
    suite: str
    config_hash: str
    tolerances: dict
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def check_at_most(self, name, value, tol):
        self.checks.append(Check(name, float(value), tol, bool(value <= tol)))

    def check_at_least(self, name, value, tol):
        self.checks.append(Check(name, float(value), tol, bool(value >= tol)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"suite={self.suite}", f"config_hash={self.config_hash}"]
        lines += [f"tolerance.{k}={v!r}" for k, v in self.tolerances.items()]
        lines += [f"info.{k}={v}" for k, v in self.info.items()]
        for c in self.checks:
            lines.append(f"check.{c.name}.value={c.value!r}")
            lines.append(f"check.{c.name}.tolerance={c.tolerance!r}")
            lines.append(f"check.{c.name}.result={'pass' if c.passed else 'fail'}")
        lines.append(f"verdict={'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


def sample_charts(geom: AcquisitionGeometry, n: int, rng: np.random.Generator, on_sigma: bool):
    """Chart points; on Sigma x2 = 0, otherwise 1e-2 <= |x2| <= 5 (alpha + h)."""
    scale = geom.alpha + geom.h
    s = rng.uniform(-2 * scale, 2 * scale, n)
    x1 = s + rng.uniform(-5 * scale, 5 * scale, n)
    if on_sigma:
        x2 = np.zeros(n)
    else:
        x2 = rng.uniform(1e-2, 5 * scale, n) * rng.choice([-1.0, 1.0], n)
    omega = rng.uniform(0.5, 20.0, n) * rng.choice([-1.0, 1.0], n)
    return [ml.ChartPoint(*map(float, row)) for row in zip(x1, x2, s, omega)]


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def determinant_checks(geom, charts):
    """(worst closed-form vs finite-difference, worst left vs right) relative determinant errors."""
    worst_fd = worst_lr = 0.0
    for c in charts:
        closed = float(ml.det_dpi_left(geom, c))
        fd = float(np.linalg.det(ml.finite_diff_jacobian(geom, c, "left")))
        left = np.linalg.det(ml.dpi_left(geom, c))
        right = np.linalg.det(ml.dpi_right(geom, c))
        worst_fd = max(worst_fd, _rel(closed, fd))
        worst_lr = max(worst_lr, _rel(left, right))
    return worst_fd, worst_lr


def positivity_samples(n: int, rng: np.random.Generator):
    """Worst (smallest) positivity term over random geometries and wide offsets."""
    alpha = rng.uniform(0.0, 10.0, n)
    h = rng.uniform(0.0, 10.0, n)
    # uniform on [0, 10) can return 0; the half-open (0, 10] interval is what is wanted
    alpha = 10.0 - alpha
    h = 10.0 - h
    s = rng.uniform(-1e3, 1e3, n)
    x1 = s + rng.uniform(-1e3, 1e3, n)
    x2 = rng.uniform(-1e3, 1e3, n)
    worst = float(np.min(ml.positivity_value(alpha, h, x1 - s, x2)))
    at_track = ml.positivity_value(alpha, h, 0.0, 0.0)
    track_err = float(np.max(np.abs(at_track - 2 * h**2 / (h**2 + alpha**2))))
    return worst, track_err


def microlocal_suite(cfg: RunConfig, samples: int, seed: int) -> VerificationReport:
    geom = cfg.geometry()
    rng = np.random.default_rng(seed)
    rep = VerificationReport("microlocal", cfg.digest(), cfg.tolerances())
    rep.info.update(samples=samples, seed=seed, positivity_samples=100 * samples)

    off = sample_charts(geom, samples, rng, on_sigma=False)
    worst_fd, worst_lr = determinant_checks(geom, off)
    rep.check_at_most("det_closed_vs_fd", worst_fd, cfg.tol_det_fd)
    rep.check_at_most("det_left_vs_right", worst_lr, cfg.tol_det_lr)

    regular = sum(
        ml.classify_singularity(geom, c, side).verdict is ml.Verdict.REGULAR
        for c in off
        for side in ("left", "right")
    )
    rep.check_at_least("regular_fraction_off_sigma", regular / (2 * len(off)), 1.0)

    on = sample_charts(geom, samples, rng, on_sigma=True)
    folds = blowdowns = 0
    worst_align = 1.0
    worst_tangent = 0.0
    min_ddet = np.inf
    for c in on:
        left = ml.classify_singularity(geom, c, "left")
        right = ml.classify_singularity(geom, c, "right")
        folds += left.verdict is ml.Verdict.FOLD
        blowdowns += right.verdict is ml.Verdict.BLOWDOWN
        worst_align = min(worst_align, abs(left.kernel_direction[1]))
        worst_tangent = max(worst_tangent, abs(right.kernel_direction[1]))
        min_ddet = min(min_ddet, abs(left.d_det_along_x2))
    rep.check_at_least("fold_fraction_on_sigma", folds / len(on), 1.0)
    rep.check_at_least("blowdown_fraction_on_sigma", blowdowns / len(on), 1.0)
    rep.check_at_most("fold_kernel_misalignment", 1.0 - worst_align, cfg.tol_kernel)
    rep.check_at_most("blowdown_kernel_x2_component", worst_tangent, cfg.tol_kernel)
    rep.checks.append(Check("min_abs_ddet_dx2_on_sigma", float(min_ddet), 0.0, bool(min_ddet > 0)))

    worst_pos, track_err = positivity_samples(100 * samples, rng)
    rep.checks.append(Check("min_positivity_term", worst_pos, 0.0, bool(worst_pos > 0)))
    rep.check_at_most("positivity_track_value_error", track_err, cfg.tol_positivity_track)
    return rep


def identity_geometries(cfg: RunConfig, rng: np.random.Generator, extra: int = 10):
    base = cfg.geometry()
    geoms = [base]
    for a, h in rng.uniform(0.2, 5.0, (extra, 2)):
        geoms.append(AcquisitionGeometry(float(a), float(h), base.c0))
    return geoms


def identities_suite(cfg: RunConfig, samples: int, seed: int) -> VerificationReport:
    rng = np.random.default_rng(seed)
    rep = VerificationReport("identities", cfg.digest(), cfg.tolerances())
    rep.info.update(samples=samples, seed=seed)
    worst = {i: 0.0 for i in range(1, 7)}
    worst_b = worst_handy = worst_cart = 0.0
    bounded = True
    geoms = identity_geometries(cfg, rng)
    rep.info["geometries"] = len(geoms)
    for geom in geoms:
        p = ids.sample_pairs(geom, samples, rng)
        for i in range(1, 7):
            res = ids.check_identity(geom, i, p)
            worst[i] = max(worst[i], float(np.max(res.rel_residual)))
            bounded &= all(np.all(np.isfinite(f)) for f in res.coefficients)
        direct, formula = ids.cos_theta_difference(geom, p)
        worst_b = max(worst_b, float(np.max(np.abs(direct - formula) / (1 + np.abs(direct)))))
        worst_handy = max(worst_handy, float(np.max(ids.handy_identity_check(geom, p))))
        prolate = ids.coefficient_pair(geom, 1, p)
        cart = ids.identity1_cartesian(geom, p)
        for a, b in zip(prolate, cart):
            worst_cart = max(worst_cart, float(np.max(np.abs(a - b) / (np.abs(a) + np.abs(b) + ids.EPS_FLOOR))))
    for i in range(1, 7):
        tol = cfg.tol_identity3 if i == 3 else cfg.tol_identity
        rep.check_at_most(f"identity{i}_max_rel_residual", worst[i], tol)
    rep.check_at_most("cos_theta_difference", worst_b, 1e-9)
    rep.check_at_most("handy_identity", worst_handy, 1e-10)
    rep.check_at_most("identity1_cartesian_vs_prolate", worst_cart, 1e-9)
    rep.checks.append(Check("coefficients_finite", float(bounded), 1.0, bool(bounded)))
    return rep


def selftest_suite(cfg: RunConfig, seeds: int = 1) -> VerificationReport:
    rep = VerificationReport("selftest", cfg.digest(), cfg.tolerances())
    geom = cfg.geometry()
    rep.info.update(seed=cfg.seed, dot_seeds=seeds)
    worst = max(
        dot_product_test(geom, cfg.scene_grid(), cfg.sinogram_grid(), cfg.pulse(), cfg.seed + k)
        for k in range(seeds)
    )
    rep.check_at_most("dot_product_test", worst, cfg.tol_dot)
    rep.check_at_most("phase_gradient_oracle", check_phase_gradients(geom, 1000, cfg.seed), cfg.tol_gradient)
    return rep
