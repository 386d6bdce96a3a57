import math

import numpy as np
import pytest

from bisar.geometry import AcquisitionGeometry, GroundPoint, bistatic_range, focal_distances, iso_range_ellipse
from bisar.operators import (
    NyquistError,
    Pulse,
    Scene,
    SceneGrid,
    Sinogram,
    SinogramGrid,
    adjoint,
    artifact_demo,
    data_window,
    dot_product_test,
    forward,
    mute,
    normal_image,
    taper,
)

GEOM = AcquisitionGeometry(1.0, 1.0)
PULSE = Pulse()
SMALL_SCENE = SceneGrid.square(1.5, 24)
SMALL_SINO = SinogramGrid.from_geometry(GEOM, 32, 128)


def random_scene(grid, seed):
    return Scene(grid.origin, grid.spacing, np.random.default_rng(seed).standard_normal(grid.shape))


def test_ricker_shape():
    p = Pulse("ricker", 4.0)
    assert p(0.0) == 1.0
    tau = 0.3
    q = (4.0 * tau) ** 2
    assert p(tau) == pytest.approx((1 - q / 2) * math.exp(-q / 4), rel=1e-15)
    # zero crossing of (1 - q/2) at w tau = sqrt(2)
    assert abs(p(math.sqrt(2) / 4.0)) < 1e-15
    assert p(p.support * 1.01) == 0.0
    assert abs(p(p.support)) < 1e-9


def test_raised_cosine_pulse_compact():
    p = Pulse("raised_cosine_band", 6.0, 3.0)
    assert p(0.0) == 1.0
    assert abs(p(p.support)) < 1e-15
    assert p(p.support + 1e-9) == 0.0


@pytest.mark.parametrize("kw", [dict(kind="gauss"), dict(center_freq=0.0), dict(bandwidth=-1.0)])
def test_pulse_validation(kw):
    with pytest.raises(ValueError):
        Pulse(**kw)


def test_window_functions():
    s, t = SMALL_SINO.s_samples, SMALL_SINO.t_samples
    assert taper(GEOM, s[0], 5.0) == 0.0 and taper(GEOM, s[-1], 5.0) == 0.0
    assert taper(GEOM, 0.0, t[0]) == 0.0 and taper(GEOM, 0.0, t[-1]) == 0.0
    assert taper(GEOM, 0.0, 5.5) == 1.0
    tm = 2 * math.sqrt(2)
    hw = GEOM.mute_halfwidth
    assert mute(GEOM, tm) == 0.0 and mute(GEOM, tm + hw) == 0.0 and mute(GEOM, tm - hw) == 0.0
    assert mute(GEOM, tm + 2 * hw) == 1.0
    assert mute(GEOM, tm + 1.5 * hw) == pytest.approx(0.5, abs=1e-12)


def test_nyquist_guard():
    coarse = SinogramGrid.from_geometry(GEOM, 8, 16)
    with pytest.raises(NyquistError):
        forward(GEOM, Scene.zeros(SMALL_SCENE), PULSE, coarse)


def test_zero_in_zero_out():
    d = forward(GEOM, Scene.zeros(SMALL_SCENE), PULSE, SMALL_SINO)
    assert not d.values.any()
    img = adjoint(GEOM, Sinogram(SMALL_SINO.s_samples, SMALL_SINO.t_samples, np.zeros(SMALL_SINO.shape)), PULSE, SMALL_SCENE)
    assert not img.values.any()
    assert not normal_image(GEOM, Scene.zeros(SMALL_SCENE), PULSE, SMALL_SINO).values.any()


def test_forward_matches_direct_sum():
    scene = random_scene(SMALL_SCENE, 1)
    d = forward(GEOM, scene, PULSE, SMALL_SINO)
    pts = SMALL_SCENE.points()
    v = scene.values.ravel()
    rng = np.random.default_rng(2)
    for i, j in zip(rng.integers(0, 32, 20), rng.integers(0, 128, 20)):
        s, t = SMALL_SINO.s_samples[i], SMALL_SINO.t_samples[j]
        X1, X2 = focal_distances(GEOM, s, pts)
        amp = 1 / ((4 * np.pi) ** 2 * X1 * X2)
        direct = np.sum(SMALL_SCENE.cell_area * amp * PULSE(t - (X1 + X2) / GEOM.c0) * v)
        direct *= taper(GEOM, s, t) * mute(GEOM, t)
        assert d.values[i, j] == pytest.approx(direct, rel=1e-10, abs=1e-14)


def test_point_scatterer_band_support():
    grid = SceneGrid.square(1.5, 31)
    vals = np.zeros(grid.shape)
    vals[20, 25] = 1.0
    x = GroundPoint(*[a[k] for a, k in zip(grid.axes(), (20, 25))])
    d = forward(GEOM, Scene(grid.origin, grid.spacing, vals), PULSE, SMALL_SINO)
    delay = bistatic_range(GEOM, SMALL_SINO.s_samples[:, None], x) / GEOM.c0
    outside = np.abs(SMALL_SINO.t_samples[None, :] - delay) > PULSE.support
    assert not d.values[outside].any()
    assert np.abs(d.values).max() > 0


def test_linearity():
    a, b = random_scene(SMALL_SCENE, 3), random_scene(SMALL_SCENE, 4)
    mix = Scene(a.origin, a.spacing, 2.0 * a.values - 0.5 * b.values)
    lhs = forward(GEOM, mix, PULSE, SMALL_SINO).values
    rhs = 2.0 * forward(GEOM, a, PULSE, SMALL_SINO).values - 0.5 * forward(GEOM, b, PULSE, SMALL_SINO).values
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-13 * np.abs(rhs).max())


def test_sinogram_zero_on_mute_and_edges():
    d = forward(GEOM, random_scene(SMALL_SCENE, 5), PULSE, SMALL_SINO)
    t = SMALL_SINO.t_samples
    notch = np.abs(t - GEOM.mute_time) <= GEOM.mute_halfwidth
    assert notch.any()
    assert not d.values[:, notch].any()
    assert not d.values[[0, -1], :].any() and not d.values[:, [0, -1]].any()
    assert np.all(data_window(GEOM, SMALL_SINO)[:, notch] == 0)


def test_impulse_backprojects_onto_iso_range_ellipse():
    vals = np.zeros(SMALL_SINO.shape)
    i0, j0 = 16, 60
    vals[i0, j0] = 1.0
    grid = SceneGrid.square(1.5, 61)
    img = adjoint(GEOM, Sinogram(SMALL_SINO.s_samples, SMALL_SINO.t_samples, vals), PULSE, grid)
    s0, t0 = SMALL_SINO.s_samples[i0], SMALL_SINO.t_samples[j0]
    assert iso_range_ellipse(GEOM, s0, t0) is not None
    pts = grid.points()
    off = np.abs(bistatic_range(GEOM, s0, pts) / GEOM.c0 - t0) > PULSE.support
    flat = img.values.ravel()
    assert not flat[off].any()
    assert np.abs(flat).max() > 0


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("pulse", [Pulse(), Pulse("raised_cosine_band", 6.0, 4.0)])
def test_dot_product_small(seed, pulse):
    assert dot_product_test(GEOM, SMALL_SCENE, SMALL_SINO, pulse, seed) <= 1e-12
    assert dot_product_test(GEOM, SMALL_SCENE, SMALL_SINO, pulse, seed) == dot_product_test(
        GEOM, SMALL_SCENE, SMALL_SINO, pulse, seed
    )


def test_dot_product_zero_scene():
    assert dot_product_test(GEOM, SMALL_SCENE, SMALL_SINO, PULSE, 0, zero_scene=True) == 0.0


def test_normal_image_mirror_symmetric():
    rng = np.random.default_rng(6)
    half = rng.standard_normal((24, 12))
    vals = np.concatenate([half, half[:, ::-1]], axis=1)
    img = normal_image(GEOM, Scene(SMALL_SCENE.origin, SMALL_SCENE.spacing, vals), PULSE, SMALL_SINO).values
    np.testing.assert_allclose(img, img[:, ::-1], rtol=0, atol=1e-12 * np.abs(img).max())


def test_artifact_demo_small_grid_and_swap():
    grid = SceneGrid.square(1.5, 61)
    sino = SinogramGrid.from_geometry(GEOM, 64, 256)
    res = artifact_demo(GEOM, (0.5, 1.0), PULSE, grid, sino)
    assert res.peaks_match
    assert res.mirror_peak.x2 == pytest.approx(-res.true_peak.x2)
    swapped = artifact_demo(GEOM, (0.5, -1.0), PULSE, grid, sino)
    assert swapped.true_peak == res.mirror_peak and swapped.mirror_peak == res.true_peak
    with pytest.raises(ValueError):
        artifact_demo(GEOM, (0.5, 0.0), PULSE, grid, sino)
