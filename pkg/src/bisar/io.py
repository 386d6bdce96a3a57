"""Flat binary, CSV and graymap serialization for scenes and sinograms.

Binary layout (all little-endian)::

    offset  size  field
    0       8     magic: b"BISARSCN" (scene) or b"BISARSIN" (sinogram)
    8       4     uint32 format version (1)
    12      4     uint32 reserved, zero
    16      8     uint64 n_rows     (n1 for scenes, number of s samples for sinograms)
    24      8     uint64 n_cols     (n2, number of t samples)
    32      8     float64 row axis origin   (x1 origin / first s)
    40      8     float64 row axis step     (dx1 / ds)
    48      8     float64 column axis origin (x2 origin / first t)
    56      8     float64 column axis step   (dx2 / dt)
    64      ...   float64 payload, row-major, n_rows * n_cols values
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .operators import Scene, Sinogram

SCENE_MAGIC = b"BISARSCN"
SINOGRAM_MAGIC = b"BISARSIN"
VERSION = 1
_HEADER = struct.Struct("<8sII")
_META = struct.Struct("<QQdddd")
HEADER_SIZE = _HEADER.size + _META.size


class FormatError(ValueError):
    pass


def _pack(magic, values, o0, d0, o1, d1) -> bytes:
    values = np.ascontiguousarray(values, dtype="<f8")
    n0, n1 = values.shape
    return _HEADER.pack(magic, VERSION, 0) + _META.pack(n0, n1, o0, d0, o1, d1) + values.tobytes()


def _unpack(blob: bytes, magic):
    if len(blob) < HEADER_SIZE:
        raise FormatError("file too short for header")
    got, version, _ = _HEADER.unpack_from(blob, 0)
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}")
    n0, n1, o0, d0, o1, d1 = _META.unpack_from(blob, _HEADER.size)
    payload = blob[HEADER_SIZE:]
    if len(payload) != 8 * n0 * n1:
        raise FormatError(f"payload has {len(payload)} bytes, expected {8 * n0 * n1}")
    values = np.frombuffer(payload, dtype="<f8").reshape(n0, n1).astype(float)
    return values, o0, d0, o1, d1


def scene_to_bytes(scene: Scene) -> bytes:
    return _pack(SCENE_MAGIC, scene.values, scene.origin[0], scene.spacing[0], scene.origin[1], scene.spacing[1])


def scene_from_bytes(blob: bytes) -> Scene:
    values, o0, d0, o1, d1 = _unpack(blob, SCENE_MAGIC)
    return Scene((o0, o1), (d0, d1), values)


def sinogram_to_bytes(sino: Sinogram) -> bytes:
    g = sino.grid
    return _pack(SINOGRAM_MAGIC, sino.values, g.s_samples[0], g.ds, g.t_samples[0], g.dt)


def sinogram_from_bytes(blob: bytes) -> Sinogram:
    values, s0, ds, t0, dt = _unpack(blob, SINOGRAM_MAGIC)
    ns, nt = values.shape
    return Sinogram(s0 + ds * np.arange(ns), t0 + dt * np.arange(nt), values)


def write_scene(path, scene: Scene):
    Path(path).write_bytes(scene_to_bytes(scene))


def read_scene(path) -> Scene:
    return scene_from_bytes(Path(path).read_bytes())


def write_sinogram(path, sino: Sinogram):
    Path(path).write_bytes(sinogram_to_bytes(sino))


def read_sinogram(path) -> Sinogram:
    return sinogram_from_bytes(Path(path).read_bytes())


def _csv(path, header, a0, a1, values):
    g0, g1 = np.meshgrid(a0, a1, indexing="ij")
    table = np.column_stack([g0.ravel(), g1.ravel(), values.ravel()])
    np.savetxt(path, table, delimiter=",", header=header, comments="", fmt="%.17g")


def scene_to_csv(path, scene: Scene):
    a1, a2 = scene.grid.axes()
    _csv(path, "x1,x2,value", a1, a2, scene.values)


def sinogram_to_csv(path, sino: Sinogram):
    _csv(path, "s,t,value", sino.s_samples, sino.t_samples, sino.values)


def write_pgm(path, values: np.ndarray):
    """16-bit binary graymap, linear in value and normalized to the image max.

    Negative values clip to black.  Rows are written with the second axis
    increasing upward, so a scene renders with +x2 at the top.
    """
    values = np.asarray(values, dtype=float)
    peak = values.max()
    scaled = np.clip(values / peak, 0.0, 1.0) if peak > 0 else np.zeros_like(values)
    pixels = np.rint(scaled * 65535).astype(">u2")
    image = pixels.T[::-1]
    height, width = image.shape
    Path(path).write_bytes(f"P5\n{width} {height}\n65535\n".encode("ascii") + image.tobytes())


def read_pgm(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    parts = blob.split(b"\n", 3)
    if parts[0] != b"P5":
        raise FormatError("not a binary graymap")
    width, height = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=">u2").reshape(height, width)
