"""Seeded scenario generation and the JSON scenario file format.

Every entity draws from its own PRNG stream keyed by ``(seed, kind, index)``,
so adding a BS or a WD leaves all other entities unchanged. Draw order:

* BS ``m`` (stream ``(seed, 1, m)``): x, y, RB count, interference.
* WD ``n`` (stream ``(seed, 2, n)``): x, y, f_max, gamma, eta1, eta2, C,
  beta1, beta2, beta3, D, D_raw.
* link ``(m, n)`` (stream ``(seed, 3, m, n)``): shadowing in dB.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .netmodel import BaseStation, GlobalParams, Link, WirelessDevice
from .utilmodel import AccuracyParams

__all__ = [
    "GenConfig",
    "Scenario",
    "ScenarioVersionError",
    "SCHEMA_VERSION",
    "pathloss_db",
    "gain_from_pathloss",
    "generate",
    "save",
    "load",
    "to_dict",
    "from_dict",
]

SCHEMA_NAME = "semalloc.scenario"
SCHEMA_VERSION = 1

_BS_STREAM, _WD_STREAM, _LINK_STREAM = 1, 2, 3

Range = tuple[float, float]


class ScenarioVersionError(ValueError):
    """The file declares a schema this library does not read."""


@dataclass(frozen=True)
class GenConfig:
    num_bs: int = 5
    num_wd: int = 30
    area_m: float = 500.0
    seed: int = 0
    rb_choices: tuple[int, ...] = (25, 50, 75, 100)
    rb_bandwidth_hz: float = 0.2e6
    max_delay_s: float = 10e-3
    noise_power_w: float = 1e-13
    interference_w: Range = (1e-13, 1e-12)
    energy_budget_j: float = 2e-3
    max_freq_hz: Range = (1e9, 3e9)
    max_power_w: float = 0.2
    energy_coeff: Range = (1e-28, 1e-27)
    eta1: Range = (0.05, 0.08)
    eta2: Range = (0.9, 0.95)
    c_max_cycles: Range = (5e6, 10e6)
    beta1: Range = (-0.75, -0.6)
    beta2: Range = (10.0, 20.0)
    beta3: Range = (0.9, 0.95)
    d_max_bits: Range = (0.15e6, 0.25e6)
    raw_data_bits: Range = (0.4e6, 0.8e6)
    pathloss_intercept_db: float = 128.1
    pathloss_slope_db: float = 37.6
    shadowing_db_std: float = 6.0
    shadowing_mode: str = "lognormal"  # "lognormal" (per-link std) or "constant" (fixed offset)
    min_distance_m: float = 1.0

    def __post_init__(self):
        if self.num_bs < 1 or self.num_wd < 1:
            raise ValueError("need at least one BS and one WD")
        if self.area_m <= 0 or self.min_distance_m <= 0:
            raise ValueError("area and distance floor must be positive")
        if not self.rb_choices or min(self.rb_choices) < 1:
            raise ValueError("rb_choices must be non-empty positive integers")
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple) and len(v) == 2 and f.name != "rb_choices":
                if not v[0] <= v[1]:
                    raise ValueError(f"range {f.name} is inverted: {v}")
        if self.shadowing_mode not in ("lognormal", "constant"):
            raise ValueError(f"unknown shadowing mode {self.shadowing_mode!r}")
        for name in ("rb_bandwidth_hz", "max_delay_s", "noise_power_w", "energy_budget_j", "max_power_w"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def replace(self, **changes) -> "GenConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: _plain(getattr(self, f.name)) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "GenConfig":
        kw = {}
        for f in dataclasses.fields(cls):
            if f.name in data:
                v = data[f.name]
                kw[f.name] = tuple(v) if isinstance(v, list) else v
        return cls(**kw)


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


@dataclass(frozen=True, eq=False)
class Scenario:
    params: GlobalParams
    base_stations: tuple[BaseStation, ...]
    devices: tuple[WirelessDevice, ...]
    gain: np.ndarray  # shape (M, N), linear power gain
    seed: Optional[int] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.array(self.gain, dtype=float)
        if g.shape != (len(self.base_stations), len(self.devices)):
            raise ValueError(f"gain matrix shape {g.shape} does not match M x N")
        if np.any(g < 0) or np.any(g > 1):
            raise ValueError("channel gains must lie in [0, 1]")
        g.setflags(write=False)
        object.__setattr__(self, "gain", g)
        object.__setattr__(self, "base_stations", tuple(self.base_stations))
        object.__setattr__(self, "devices", tuple(self.devices))

    @property
    def num_bs(self) -> int:
        return len(self.base_stations)

    @property
    def num_wd(self) -> int:
        return len(self.devices)

    def link(self, n: int, m: int) -> Link:
        return Link(float(self.gain[m, n]), self.base_stations[m].interference_w, self.params)

    def distance(self, n: int, m: int) -> float:
        (x1, y1), (x2, y2) = self.devices[n].position_m, self.base_stations[m].position_m
        return math.hypot(x1 - x2, y1 - y2)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return to_dict(self) == to_dict(other)

    __hash__ = None


def pathloss_db(dist_m, cfg: GenConfig = GenConfig()):
    d_km = np.maximum(np.asarray(dist_m, dtype=float), cfg.min_distance_m) / 1000.0
    return cfg.pathloss_intercept_db + cfg.pathloss_slope_db * np.log10(d_km)


def gain_from_pathloss(pl_db, shadow_db=0.0):
    """Linear power gain, capped at 1 (no amplifying channels)."""
    return np.minimum(10.0 ** (-(np.asarray(pl_db) + shadow_db) / 10.0), 1.0)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def generate(cfg: GenConfig) -> Scenario:
    params = GlobalParams(cfg.rb_bandwidth_hz, cfg.max_delay_s, cfg.noise_power_w)
    bss = []
    for m in range(cfg.num_bs):
        r = _rng(cfg.seed, _BS_STREAM, m)
        x, y = r.uniform(0, cfg.area_m, size=2)
        k = int(r.choice(np.asarray(cfg.rb_choices)))
        interference = r.uniform(*cfg.interference_w)
        bss.append(BaseStation(m, (float(x), float(y)), k, float(interference)))

    wds = []
    for n in range(cfg.num_wd):
        r = _rng(cfg.seed, _WD_STREAM, n)
        x, y = r.uniform(0, cfg.area_m, size=2)
        fmax = r.uniform(*cfg.max_freq_hz)
        gamma = r.uniform(*cfg.energy_coeff)
        app = AccuracyParams(
            eta1=float(r.uniform(*cfg.eta1)),
            eta2=float(r.uniform(*cfg.eta2)),
            c_max_cycles=float(r.uniform(*cfg.c_max_cycles)),
            beta1=float(r.uniform(*cfg.beta1)),
            beta2=float(r.uniform(*cfg.beta2)),
            beta3=float(r.uniform(*cfg.beta3)),
            d_max_bits=float(r.uniform(*cfg.d_max_bits)),
            raw_data_bits=float(r.uniform(*cfg.raw_data_bits)),
        )
        wds.append(WirelessDevice(n, (float(x), float(y)), float(fmax), cfg.max_power_w,
                                  cfg.energy_budget_j, float(gamma), app))

    gain = np.empty((cfg.num_bs, cfg.num_wd))
    for m, bs in enumerate(bss):
        for n, wd in enumerate(wds):
            dist = math.hypot(bs.position_m[0] - wd.position_m[0], bs.position_m[1] - wd.position_m[1])
            if cfg.shadowing_mode == "lognormal":
                shadow = _rng(cfg.seed, _LINK_STREAM, m, n).normal(0.0, cfg.shadowing_db_std)
            else:
                shadow = cfg.shadowing_db_std
            gain[m, n] = gain_from_pathloss(pathloss_db(dist, cfg), shadow)
    return Scenario(params, tuple(bss), tuple(wds), gain, cfg.seed, {"config": cfg.to_dict()})


def to_dict(s: Scenario) -> dict[str, Any]:
    return {
        "schema": SCHEMA_NAME,
        "version": SCHEMA_VERSION,
        "params": dataclasses.asdict(s.params),
        "base_stations": [
            {"id": b.id, "position_m": list(b.position_m), "rb_count": b.rb_count,
             "interference_w": b.interference_w}
            for b in s.base_stations
        ],
        "devices": [
            {"id": d.id, "position_m": list(d.position_m), "max_freq_hz": d.max_freq_hz,
             "max_power_w": d.max_power_w, "energy_budget_j": d.energy_budget_j,
             "energy_coeff": d.energy_coeff, "app_params": dataclasses.asdict(d.app_params)}
            for d in s.devices
        ],
        "gain": s.gain.tolist(),
        "seed": s.seed,
        "provenance": s.provenance,
    }


def from_dict(data: dict[str, Any]) -> Scenario:
    if data.get("schema") != SCHEMA_NAME:
        raise ScenarioVersionError(f"not a scenario document (schema={data.get('schema')!r})")
    if data.get("version") != SCHEMA_VERSION:
        raise ScenarioVersionError(
            f"scenario schema version {data.get('version')!r} is not supported (expected {SCHEMA_VERSION})")
    params = GlobalParams(**data["params"])
    bss = tuple(BaseStation(b["id"], tuple(b["position_m"]), b["rb_count"], b["interference_w"])
                for b in data["base_stations"])
    wds = tuple(
        WirelessDevice(d["id"], tuple(d["position_m"]), d["max_freq_hz"], d["max_power_w"],
                       d["energy_budget_j"], d["energy_coeff"], AccuracyParams(**d["app_params"]))
        for d in data["devices"]
    )
    gain = np.array(data["gain"], dtype=float).reshape(len(bss), len(wds))
    return Scenario(params, bss, wds, gain, data.get("seed"), data.get("provenance", {}))


def save(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(to_dict(s), indent=2) + "\n")


def load(path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed scenario file: {exc}") from exc
    return from_dict(data)
