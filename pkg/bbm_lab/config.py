"""Experiment configuration (pydantic) and process settings (environment / .env)."""
import json
import logging
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, model_validator

from bbm_lab.errors import ConfigError
from bbm_lab.initial_data import MIN_N, DataFamily
from bbm_lab.picard import DEFAULT_BUDGET
from bbm_lab.spectral import SUPPORT_RTOL, FrequencyGrid, GridMode, make_grid
from bbm_lab.solver import MAX_DT

OUTPUTS_ENV = "BBM_LAB_OUTPUTS"
WORKERS_ENV = "BBM_LAB_WORKERS"
LOG_LEVEL_ENV = "BBM_LAB_LOG_LEVEL"

SMOOTH_DATA_RADIUS = 24.0
THETA_SCAN_RADIUS = 64.0


class ExperimentName(str, Enum):
    THETA_SCAN = "theta_scan"
    DATA_NORMS = "data_norms"
    I2_INFLATION = "i2_inflation"
    SERIES_APPROX = "series_approx"
    DISCONTINUITY = "discontinuity"
    SOLVER_VALIDATE = "solver_validate"
    BILINEAR_ESTIMATE = "bilinear_estimate"


ILL_POSEDNESS = {ExperimentName.I2_INFLATION, ExperimentName.SERIES_APPROX, ExperimentName.DISCONTINUITY}

_DEFAULT_N = {
    ExperimentName.SERIES_APPROX: [16.0, 64.0],
    ExperimentName.SOLVER_VALIDATE: [],
    ExperimentName.THETA_SCAN: [],
}
_DEFAULT_S = {
    ExperimentName.DATA_NORMS: [-0.25, -0.5, -1.0],
    ExperimentName.BILINEAR_ESTIMATE: [-0.5, 0.0],
}


class GridConfig(BaseModel):
    M: Optional[int] = Field(default=None, ge=4)
    delta_xi: float = Field(default=1.0 / 16.0, gt=0)
    mode: GridMode = GridMode.LINE


class QuadratureConfig(BaseModel):
    Q: int = Field(default=256, ge=8)
    refine: int = Field(default=1, ge=1)


class SolverSettings(BaseModel):
    dt: float = Field(default=1e-3, gt=0)
    store_every: Optional[int] = Field(default=None, ge=1)


class ThetaScanConfig(BaseModel):
    extent: float = Field(default=8.0, gt=0)
    step: float = Field(default=0.25, gt=0)
    samples: int = Field(default=100_000, ge=1)
    box: float = Field(default=1000.0, gt=0)


class ExperimentConfig(BaseModel):
    """Declarative description of one sweep; the validator materializes every default."""

    experiment: ExperimentName
    N_list: Optional[List[float]] = None
    s_list: Optional[List[float]] = None
    t: float = Field(default=0.5, gt=0, le=1)
    eps: float = Field(default=0.05, ge=0)
    family: Optional[DataFamily] = None
    sigma: float = Field(default=0.1, gt=0, lt=1)
    width: int = Field(default=1, ge=0)
    amplitude: float = Field(default=0.5, ge=0)
    K: int = Field(default=6, ge=2, le=8)
    grid: GridConfig = Field(default_factory=GridConfig)
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    theta: ThetaScanConfig = Field(default_factory=ThetaScanConfig)
    support_rtol: float = Field(default=SUPPORT_RTOL, gt=0)
    budget: int = Field(default=DEFAULT_BUDGET, ge=1)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _materialize(self):
        name = self.experiment
        periodic = self.grid.mode is GridMode.PERIODIC
        if self.N_list is None:
            self.N_list = list(_DEFAULT_N.get(name, [16.0, 32.0, 64.0, 128.0]))
        self.N_list = sorted(float(n) for n in self.N_list)
        if self.s_list is None:
            self.s_list = list(_DEFAULT_S.get(name, [-0.5]))
        if any(n < MIN_N for n in self.N_list):
            raise ValueError(f"every N must be >= {MIN_N}")
        if name in ILL_POSEDNESS and any(s >= 0 for s in self.s_list):
            raise ValueError(f"{name.value} targets the ill-posed regime; s must be < 0")
        if name is ExperimentName.SERIES_APPROX and self.eps > 0.05:
            raise ValueError("series experiments need eps <= 0.05")
        if name is ExperimentName.DISCONTINUITY and self.eps > 0.1:
            raise ValueError("discontinuity experiments need eps <= 0.1")
        # solver_validate reports an oversized dt as a failed check instead
        if self.solver.dt > MAX_DT and name is not ExperimentName.SOLVER_VALIDATE:
            raise ValueError(f"dt={self.solver.dt} above the accuracy limit {MAX_DT}")

        if periodic:
            if name is ExperimentName.BILINEAR_ESTIMATE:
                raise ValueError("the gamma-scaled family lives on the line")
            self.family = DataFamily.PERIODIC
            self.grid.delta_xi = 1.0
            if self.quadrature.refine != 1:
                raise ValueError("integer wavenumbers admit no refinement")
        elif self.family is None:
            self.family = DataFamily.BT_SCALED if name is ExperimentName.BILINEAR_ESTIMATE else DataFamily.SHARP
        elif self.family is DataFamily.PERIODIC:
            raise ValueError("periodic family needs grid.mode = periodic")

        needed = self.required_radius()
        if self.grid.M is None:
            self.grid.M = max(4, math.ceil(needed / self.grid.delta_xi - 1e-9))
        elif self.grid.M * self.grid.delta_xi < needed - 1e-9:
            raise ValueError(f"grid radius {self.grid.M * self.grid.delta_xi:g} below required {needed:g}")
        if self.output_dir is None:
            self.output_dir = os.path.join(os.environ.get(OUTPUTS_ENV, "outputs"), name.value)
        return self

    def required_radius(self) -> float:
        """Smallest xi_max that keeps every product of this sweep inside the grid."""
        if self.experiment is ExperimentName.SOLVER_VALIDATE:
            return SMOOTH_DATA_RADIUS
        if self.experiment is ExperimentName.THETA_SCAN:
            return THETA_SCAN_RADIUS
        n_max = max(self.N_list)
        edge = n_max + self.width if self.family is DataFamily.PERIODIC else n_max + 1
        radius = max(4.0 * n_max, 2.0 * edge + 4.0)
        if self.experiment in (ExperimentName.SERIES_APPROX, ExperimentName.DISCONTINUITY):
            # the evolved field carries visible cubic mass out to 3*edge; squaring it doubles that
            radius = max(radius, 6.0 * edge + 4.0)
        if self.experiment is ExperimentName.SERIES_APPROX:
            radius = max(radius, self.K * edge + 4.0)
        return radius

    def make_grid(self) -> FrequencyGrid:
        return make_grid(self.grid.M, self.grid.delta_xi, self.grid.mode)


def _merge(base: dict, overrides: dict) -> dict:
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(experiment, path: Optional[str] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Defaults < JSON file < explicit overrides."""
    data = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
    data = _merge(data, overrides or {})
    data["experiment"] = ExperimentName(experiment).value
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


@dataclass(frozen=True)
class Settings:
    workers: int
    outputs_dir: str
    log_level: str


def load_settings() -> Settings:
    load_dotenv()
    try:
        workers = int(os.environ.get(WORKERS_ENV, "0")) or (os.cpu_count() or 1)
    except ValueError as e:
        raise ConfigError(f"{WORKERS_ENV} must be an integer") from e
    return Settings(
        workers=max(1, workers),
        outputs_dir=os.environ.get(OUTPUTS_ENV, "outputs"),
        log_level=os.environ.get(LOG_LEVEL_ENV, "INFO").upper(),
    )


def configure_logging(level: str = "INFO") -> None:
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format="%(levelname)s %(name)s %(message)s")
