"""Pydantic request/response models for the HTTP API.

Requests mirror the JSON config schema in `mmwave_ce.config`; validated
payloads are converted to the core dataclasses before running anything.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..config import ExperimentConfig, config_from_dict


class ArraysModel(BaseModel):
    n_bs: int = 64
    n_ms: int = 64
    spacing_over_wavelength: float = 0.5


class GridsModel(BaseModel):
    n1: Optional[int] = None
    n2: Optional[int] = None


class ChannelModel(BaseModel):
    num_clusters: int = 2
    mean_aoa_deg: list[float] = [30.0, -30.0]
    mean_aod_deg: list[float] = [30.0, -30.0]
    spread_aoa_deg: float = 15.0
    spread_aod_deg: float = 10.0
    rays_aoa: int = 10
    rays_aod: int = 10
    distance_m: float = 30.0
    carrier_hz: float = 28e9
    on_grid: bool = True


class SoundingModel(BaseModel):
    schemes: list[Literal["rc", "mbc"]] = ["rc"]
    num_subarrays: int = 4
    sizing: Literal["ratio", "fixed"] = "ratio"
    sampling_ratio: float = 0.5
    n_z: Optional[int] = None
    n_f: Optional[int] = None


class SweepModel(BaseModel):
    axis: Literal["t", "spread", "snr"] = "t"
    values: list[float] = [288]


class SuccessModel(BaseModel):
    metric: Literal["rel_error", "nmse"] = "rel_error"
    threshold: float = 1e-2


class ExperimentModel(BaseModel):
    name: str = "experiment"
    arrays: ArraysModel = Field(default_factory=ArraysModel)
    grids: GridsModel = Field(default_factory=GridsModel)
    channel: ChannelModel = Field(default_factory=ChannelModel)
    sounding: SoundingModel = Field(default_factory=SoundingModel)
    t: int = 288
    snr_db: Optional[float] = None
    sweep: SweepModel = Field(default_factory=SweepModel)
    pipelines: list[Literal["two_stage", "direct_cs", "full_mc"]] = ["two_stage", "direct_cs"]
    trials: int = 100
    base_seed: int = 0
    success: SuccessModel = Field(default_factory=SuccessModel)
    solver: dict = Field(default_factory=dict)
    workers: int = 1

    def to_config(self) -> ExperimentConfig:
        return config_from_dict(self.model_dump())


class RunRequest(BaseModel):
    config: ExperimentModel = Field(default_factory=ExperimentModel)
    point: Optional[float] = None  # default: first sweep value
    pipeline: Optional[str] = None  # default: every configured pipeline
    scheme: Optional[str] = None  # default: every configured scheme
    seed: Optional[int] = None  # default: the sweep's stable trial-0 seed


class TrialModel(BaseModel):
    axis: str
    point: float
    pipeline: str
    scheme: str
    trial: int
    seed: int
    nmse: float
    rel_error: float
    success: bool
    wall_time: float
    iterations: int
    stage_iterations: list[int]
    stage_converged: list[bool]


class RunResponse(BaseModel):
    results: list[TrialModel]


class SweepRequest(BaseModel):
    config: ExperimentModel
    workers: Optional[int] = None


class AggregateModel(BaseModel):
    axis: str
    point: float
    pipeline: str
    scheme: str
    n_trials: int
    success_rate: float
    success_stderr: float
    mean_nmse: float
    nmse_stderr: float
    mean_rel_error: float
    mean_wall_time: float


class SweepResponse(BaseModel):
    name: str
    num_trials: int
    elapsed_seconds: float
    trials_csv: str
    aggregates_csv: str
    aggregates: list[AggregateModel]


class GaussianMatrixModel(BaseModel):
    kind: Literal["gaussian"] = "gaussian"
    rows: int
    cols: int
    seed: int = 0
    complex_valued: bool = True


class ExplicitMatrixModel(BaseModel):
    kind: Literal["explicit"] = "explicit"
    re: list[list[float]]
    im: Optional[list[list[float]]] = None


class RicCheckRequest(BaseModel):
    matrix: GaussianMatrixModel | ExplicitMatrixModel = Field(discriminator="kind")
    k: int = 2
    mode: Literal["exhaustive", "sampled"] = "exhaustive"
    n_trials: int = 1000
    seed: int = 0


class RicCheckResponse(BaseModel):
    k: int
    delta: float
    extremal_support: list[int]
    recovery_condition: bool
    recovery_threshold: float


class PresetModel(BaseModel):
    name: str
    description: str
    config: ExperimentModel


class PresetsResponse(BaseModel):
    presets: list[PresetModel]
