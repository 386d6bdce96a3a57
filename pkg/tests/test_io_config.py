import struct

import numpy as np
import pytest

from bisar import io
from bisar.config import ConfigError, RunConfig, load_config, parse_config_text
from bisar.operators import Scene, Sinogram


def test_scene_roundtrip_and_layout(tmp_path):
    vals = np.arange(12.0).reshape(3, 4)
    scene = Scene((-1.0, -2.0), (0.5, 0.25), vals)
    blob = io.scene_to_bytes(scene)
    assert blob[:8] == b"BISARSCN"
    assert struct.unpack_from("<II", blob, 8) == (1, 0)
    assert struct.unpack_from("<QQdddd", blob, 16) == (3, 4, -1.0, 0.5, -2.0, 0.25)
    assert len(blob) == 64 + 8 * 12
    assert np.frombuffer(blob[64:], "<f8")[5] == 5.0  # row-major
    io.write_scene(tmp_path / "a.bin", scene)
    back = io.read_scene(tmp_path / "a.bin")
    np.testing.assert_array_equal(back.values, vals)
    assert back.origin == (-1.0, -2.0) and back.spacing == (0.5, 0.25)


def test_sinogram_roundtrip(tmp_path):
    s = np.linspace(-2, 2, 5)
    t = np.linspace(2, 9, 7)
    sino = Sinogram(s, t, np.random.default_rng(0).standard_normal((5, 7)))
    io.write_sinogram(tmp_path / "d.bin", sino)
    back = io.read_sinogram(tmp_path / "d.bin")
    np.testing.assert_array_equal(back.values, sino.values)
    np.testing.assert_allclose(back.t_samples, t, rtol=1e-15)


def test_format_errors():
    scene = Scene((0.0, 0.0), (1.0, 1.0), np.ones((2, 2)))
    blob = io.scene_to_bytes(scene)
    with pytest.raises(io.FormatError):
        io.sinogram_from_bytes(blob)
    with pytest.raises(io.FormatError):
        io.scene_from_bytes(blob[:-8])
    with pytest.raises(io.FormatError):
        io.scene_from_bytes(blob[:10])


def test_csv_export(tmp_path):
    scene = Scene((0.0, 1.0), (1.0, 0.5), np.array([[1.0, 2.0], [3.0, 4.0]]))
    io.scene_to_csv(tmp_path / "s.csv", scene)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "x1,x2,value"
    assert lines[2] == "0,1.5,2"
    assert len(lines) == 5


def test_pgm(tmp_path):
    vals = np.array([[0.0, 1.0], [-3.0, 4.0], [2.0, 2.0]])
    io.write_pgm(tmp_path / "i.pgm", vals)
    assert (tmp_path / "i.pgm").read_bytes().startswith(b"P5\n3 2\n65535\n")
    img = io.read_pgm(tmp_path / "i.pgm")
    # columns are x1, the top row is the largest x2
    np.testing.assert_array_equal(img, [[16384, 65535, 32768], [0, 0, 32768]])
    io.write_pgm(tmp_path / "z.pgm", np.zeros((2, 2)))
    assert not io.read_pgm(tmp_path / "z.pgm").any()


def test_parse_config_text():
    text = "# comment\nalpha = 2.5  # trailing\n\nns=64\npulse_kind = raised_cosine_band\n"
    assert parse_config_text(text) == {"alpha": 2.5, "ns": 64, "pulse_kind": "raised_cosine_band"}
    with pytest.raises(ConfigError):
        parse_config_text("alpha 2")
    with pytest.raises(ConfigError):
        parse_config_text("nope = 1")
    with pytest.raises(ConfigError):
        parse_config_text("ns = 1.5")


def test_load_config_overrides_and_validation(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("alpha = 2\nseed = 3\n", encoding="utf-8")
    cfg = load_config(path, {"seed": "9"})
    assert cfg.alpha == 2.0 and cfg.seed == 9
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
    with pytest.raises(ConfigError):
        load_config(None, {"h": "-1"})
    with pytest.raises(ConfigError):
        load_config(None, {"tol_dot": "0"})
    with pytest.raises(ConfigError):
        load_config(None, {"pulse_kind": "square"})


def test_config_digest_stable():
    assert RunConfig().digest() == RunConfig().digest()
    assert RunConfig().digest() != RunConfig(seed=1).digest()
    assert len(RunConfig().digest()) == 16
