"""Experiment configuration: a JSON-friendly description of one Monte-Carlo
experiment (channel model, sounding plan, sweep axis, pipelines, trial count)
plus a set of named presets.

Schema (JSON object; all angles in degrees at this layer):

    {
      "name":      optional label,
      "arrays":    {"n_bs": 64, "n_ms": 64, "spacing_over_wavelength": 0.5},
      "grids":     {"n1": null, "n2": null},          # null -> antenna count
      "channel":   {"num_clusters": 2, "mean_aoa_deg": [30,-30],
                    "mean_aod_deg": [30,-30], "spread_aoa_deg": 15.0,
                    "spread_aod_deg": 10.0, "rays_aoa": 10, "rays_aod": 10,
                    "distance_m": 30.0, "carrier_hz": 28e9, "on_grid": true},
      "sounding":  {"schemes": ["rc"], "num_subarrays": 4,
                    "sizing": "ratio" | "fixed", "sampling_ratio": 0.5,
                    "n_z": null, "n_f": null},
      "t":         288,                                # used when axis != "t"
      "snr_db":    null,                               # null -> noiseless
      "sweep":     {"axis": "t" | "spread" | "snr", "values": [...]},
      "pipelines": ["two_stage", "direct_cs", "full_mc"],
      "trials":    100,
      "base_seed": 0,
      "success":   {"metric": "rel_error" | "nmse", "threshold": 1e-2},
      "solver":    {},                                 # SolverOptions overrides
      "workers":   1
    }
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

PIPELINES = ("two_stage", "direct_cs", "full_mc")
SCHEMES = ("rc", "mbc")
SWEEP_AXES = ("t", "spread", "snr")
SUCCESS_METRICS = ("rel_error", "nmse")


@dataclass(frozen=True)
class ArraysSpec:
    n_bs: int = 64
    n_ms: int = 64
    spacing_over_wavelength: float = 0.5


@dataclass(frozen=True)
class GridsSpec:
    n1: int | None = None
    n2: int | None = None


@dataclass(frozen=True)
class ChannelSpec:
    num_clusters: int = 2
    mean_aoa_deg: tuple[float, ...] = (30.0, -30.0)
    mean_aod_deg: tuple[float, ...] = (30.0, -30.0)
    spread_aoa_deg: float = 15.0
    spread_aod_deg: float = 10.0
    rays_aoa: int = 10
    rays_aod: int = 10
    distance_m: float = 30.0
    carrier_hz: float = 28e9
    on_grid: bool = True


@dataclass(frozen=True)
class SoundingSpec:
    schemes: tuple[str, ...] = ("rc",)
    num_subarrays: int = 4
    sizing: str = "ratio"  # "ratio" sizes N_Z=N_F from T, "fixed" uses n_z/n_f
    sampling_ratio: float = 0.5
    n_z: int | None = None
    n_f: int | None = None


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "t"
    values: tuple[float, ...] = (288,)


@dataclass(frozen=True)
class SuccessRule:
    metric: str = "rel_error"
    threshold: float = 1e-2


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    arrays: ArraysSpec = field(default_factory=ArraysSpec)
    grids: GridsSpec = field(default_factory=GridsSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    sounding: SoundingSpec = field(default_factory=SoundingSpec)
    t: int = 288
    snr_db: float | None = None
    sweep: SweepSpec = field(default_factory=SweepSpec)
    pipelines: tuple[str, ...] = ("two_stage", "direct_cs")
    trials: int = 100
    base_seed: int = 0
    success: SuccessRule = field(default_factory=SuccessRule)
    solver: dict = field(default_factory=dict)
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.arrays.n_bs < 1 or self.arrays.n_ms < 1:
            raise ValueError("antenna counts must be >= 1")
        ch = self.channel
        if len(ch.mean_aoa_deg) != ch.num_clusters or len(ch.mean_aod_deg) != ch.num_clusters:
            raise ValueError("need one mean AoA/AoD per cluster")
        if self.sweep.axis not in SWEEP_AXES:
            raise ValueError(f"sweep axis must be one of {SWEEP_AXES}")
        if not self.sweep.values:
            raise ValueError("sweep needs at least one value")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for p in self.pipelines:
            if p not in PIPELINES:
                raise ValueError(f"unknown pipeline {p!r}; choose from {PIPELINES}")
        for s in self.sounding.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown codebook scheme {s!r}; choose from {SCHEMES}")
        if self.sounding.sizing not in ("ratio", "fixed"):
            raise ValueError("sounding.sizing must be 'ratio' or 'fixed'")
        if self.sounding.sizing == "fixed" and (self.sounding.n_z is None or self.sounding.n_f is None):
            raise ValueError("fixed sizing needs n_z and n_f")
        if not (0.0 < self.sounding.sampling_ratio <= 1.0):
            raise ValueError("sampling_ratio must be in (0, 1]")
        if self.success.metric not in SUCCESS_METRICS:
            raise ValueError(f"success metric must be one of {SUCCESS_METRICS}")
        if self.success.threshold <= 0:
            raise ValueError("success threshold must be > 0")
        if self.sweep.axis == "snr" and any(v is None for v in self.sweep.values):
            raise ValueError("snr sweep values must be numbers")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def with_updates(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)


def _build(section, cls, d: dict):
    known = {f: d[f] for f in cls.__dataclass_fields__ if f in d}
    unknown = set(d) - set(cls.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown {section} fields: {sorted(unknown)}")
    for key in ("mean_aoa_deg", "mean_aod_deg", "schemes", "values", "pipelines"):
        if key in known and isinstance(known[key], list):
            known[key] = tuple(known[key])
    return cls(**known)


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ValueError("config must be a JSON object")
    d = dict(d)
    sections = {
        "arrays": ArraysSpec,
        "grids": GridsSpec,
        "channel": ChannelSpec,
        "sounding": SoundingSpec,
        "sweep": SweepSpec,
        "success": SuccessRule,
    }
    kwargs = {}
    for key, cls in sections.items():
        if key in d:
            kwargs[key] = _build(key, cls, d.pop(key))
    for key in ("name", "t", "snr_db", "trials", "base_seed", "solver", "workers"):
        if key in d:
            kwargs[key] = d.pop(key)
    if "pipelines" in d:
        kwargs["pipelines"] = tuple(d.pop("pipelines"))
    if d:
        raise ValueError(f"unknown config fields: {sorted(d)}")
    return ExperimentConfig(**kwargs).validate()


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"config file {path} is not valid JSON: {e}") from e
    return config_from_dict(raw)


def _sweep_preset(name, axis, values, **kw) -> ExperimentConfig:
    return ExperimentConfig(name=name, sweep=SweepSpec(axis=axis, values=tuple(values)), **kw)


def build_presets() -> dict[str, tuple[str, ExperimentConfig]]:
    """Named experiment profiles. Success-rate sweeps draw on-grid channels
    (exact beamspace sparsity, noiseless); NMSE-vs-SNR sweeps draw continuous
    ray angles with measurement noise."""
    off_grid = ChannelSpec(on_grid=False)
    both_schemes = SoundingSpec(schemes=("rc", "mbc"))
    presets = {
        "point": (
            "single noiseless on-grid point at T=288 (both pipelines)",
            _sweep_preset("point", "t", [288], trials=1),
        ),
        "t-sweep": (
            "success rate vs measurement count, on-grid noiseless, RC + MBC",
            _sweep_preset("t-sweep", "t", [96, 160, 240, 288, 336], sounding=both_schemes),
        ),
        "spread-sweep": (
            "success rate vs angular spread at T=288, on-grid noiseless",
            _sweep_preset("spread-sweep", "spread", [6, 10, 14, 18, 22]),
        ),
        "snr-sweep": (
            "NMSE vs SNR at T=288, continuous-angle channel, noisy",
            _sweep_preset("snr-sweep", "snr", [0, 5, 10, 15, 20, 25, 30], channel=off_grid),
        ),
        "ongrid-recovery": (
            "exact on-grid recovery check at 32 antennas, T=288",
            _sweep_preset(
                "ongrid-recovery", "t", [288],
                arrays=ArraysSpec(n_bs=32, n_ms=32), trials=50,
                pipelines=("two_stage",),
                success=SuccessRule(threshold=1e-3),
            ),
        ),
    }
    for key in ("t-sweep", "spread-sweep", "snr-sweep"):
        desc, cfg = presets[key]
        presets[f"{key}-quick"] = (
            desc + " (12-trial smoke version)",
            cfg.with_updates(name=cfg.name + "-quick", trials=12),
        )
    return presets


PRESETS = build_presets()


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return PRESETS[name][1]
