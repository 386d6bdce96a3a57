"""Run configuration: ``key = value`` files, command-line overrides, validation."""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, fields
from pathlib import Path

from .geometry import AcquisitionGeometry
from .operators import Pulse, SceneGrid, SinogramGrid


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 1.0
    h: float = 1.0
    c0: float = 1.0
    s0: float = -2.0
    s1: float = 2.0
    t0: float = 2.0
    t1: float = 9.0
    mute_halfwidth: float = 0.05
    taper_fraction: float = 0.1
    ns: int = 128
    nt: int = 256
    n1: int = 128
    n2: int = 128
    x1_min: float = -1.5
    x1_max: float = 1.5
    x2_min: float = -1.5
    x2_max: float = 1.5
    pulse_kind: str = "ricker"
    pulse_center_freq: float = 8.0
    pulse_bandwidth: float = 8.0
    seed: int = 0
    output_dir: str = "."
    tol_identity: float = 1e-8
    tol_identity3: float = 1e-14
    tol_det_fd: float = 1e-6
    tol_det_lr: float = 1e-10
    tol_kernel: float = 1e-8
    tol_positivity_track: float = 1e-12
    tol_dot: float = 1e-12
    tol_gradient: float = 1e-6

    def __post_init__(self):
        for name in ("ns", "nt", "n1", "n2"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be at least 2")
        if not (self.x1_min < self.x1_max and self.x2_min < self.x2_max):
            raise ConfigError("scene bounds must be increasing")
        for f in fields(self):
            if f.name.startswith("tol_") and not getattr(self, f.name) > 0:
                raise ConfigError(f"{f.name} must be positive")
        # surface geometry/pulse invariant violations as config errors
        try:
            self.geometry()
            self.pulse()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def geometry(self) -> AcquisitionGeometry:
        return AcquisitionGeometry(
            self.alpha, self.h, self.c0, (self.s0, self.s1), (self.t0, self.t1),
            self.mute_halfwidth, self.taper_fraction,
        )

    def pulse(self) -> Pulse:
        return Pulse(self.pulse_kind, self.pulse_center_freq, self.pulse_bandwidth)

    def scene_grid(self) -> SceneGrid:
        d1 = (self.x1_max - self.x1_min) / (self.n1 - 1)
        d2 = (self.x2_max - self.x2_min) / (self.n2 - 1)
        return SceneGrid((self.x1_min, self.x2_min), (d1, d2), (self.n1, self.n2))

    def sinogram_grid(self) -> SinogramGrid:
        return SinogramGrid.from_geometry(self.geometry(), self.ns, self.nt)

    def tolerances(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name.startswith("tol_")}

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)!r}\n" for f in fields(self))

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()[:16]


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return raw.strip("'\"")


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = line.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), raw)
    return values


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        values.update(parse_config_text(text))
    for key, raw in (overrides or {}).items():
        values[key] = _coerce(key, str(raw))
    return dataclasses.replace(RunConfig(), **values)
