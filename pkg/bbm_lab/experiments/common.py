import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from bbm_lab.config import ExperimentConfig
from bbm_lab.initial_data import DataFamily, DataFamilySpec, make_data
from bbm_lab.spectral import FrequencyGrid, SpectralField
from bbm_lab.state import LabState

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "N", "s", "t", "eps",
    "norm_data_hs", "norm_data_l2", "norm_I2_hs", "norm_u_hs", "norm_residual_hs",
    "ratio_u_over_data", "method_discrepancy",
]


class ResultRow(BaseModel):
    """One (N, s, t, eps) record; columns an experiment does not measure stay 0."""

    N: float
    s: float
    t: float = 0.0
    eps: float = 0.0
    norm_data_hs: float = 0.0
    norm_data_l2: float = 0.0
    norm_I2_hs: float = 0.0
    norm_u_hs: float = 0.0
    norm_residual_hs: float = 0.0
    ratio_u_over_data: float = 0.0
    method_discrepancy: float = 0.0
    extras: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _finite(self):
        for name in CSV_COLUMNS[4:]:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")
        return self

    def csv_values(self) -> list:
        return [getattr(self, name) for name in CSV_COLUMNS]


class Check(BaseModel):
    experiment: str
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentResult:
    rows: List[ResultRow] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def check(self, experiment: str, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(experiment=experiment, name=name, passed=bool(passed), detail=detail))
        return bool(passed)


def data_for(cfg: ExperimentConfig, grid: FrequencyGrid, N: float, s: float = 0.0) -> SpectralField:
    spec = DataFamilySpec(family=cfg.family, N=N, s=s, sigma=cfg.sigma, width=cfg.width)
    return make_data(spec, grid)


def expected_l2(cfg: ExperimentConfig) -> float:
    """N-independent L2 norm of the sharp and periodic families (None for the scaled family)."""
    if cfg.family is DataFamily.SHARP:
        return 2.0
    if cfg.family is DataFamily.PERIODIC:
        return math.sqrt(2.0 * (2 * cfg.width + 1))
    return None


def low_band(cfg: ExperimentConfig) -> float:
    """Output band where near-resonant interactions land: |xi| <= 1/4 on the line, |n| <= 2 width on the torus."""
    return 2.0 * cfg.width if cfg.family is DataFamily.PERIODIC else 0.25


def map_rows(fn: Callable, items, workers: int) -> list:
    """Apply fn concurrently; results come back in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def loglog_slope(N_values, norms) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(N_values, dtype=float)), np.log(np.asarray(norms, dtype=float)), 1)
    return float(slope)


def spread(values) -> float:
    """min/max of a positive sequence (1 means flat)."""
    values = [float(v) for v in values]
    top = max(values)
    return min(values) / top if top > 0 else 1.0


def by_s(rows: List[ResultRow], s: float, eps: Optional[float] = None) -> List[ResultRow]:
    picked = [r for r in rows if r.s == s and (eps is None or r.eps == eps)]
    return sorted(picked, key=lambda r: r.N)


def write_node_json(name: str, result: ExperimentResult, outputs_dir: str = "outputs") -> str:
    json_dir = os.path.join(outputs_dir, "json")
    os.makedirs(json_dir, exist_ok=True)
    path = os.path.join(json_dir, f"{name}.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"experiment": name,
                   "rows": [r.model_dump() for r in result.rows],
                   "checks": [c.model_dump() for c in result.checks],
                   "diagnostics": result.diagnostics}, f, indent=2, default=float)
    return path


def run_node(name: str, runner: Callable[[ExperimentConfig, int], ExperimentResult], state: LabState) -> dict:
    """Shared graph-node body: run one experiment, persist its JSON, report [OK]/[FAIL]."""
    try:
        cfg = state["configs"][name]
        workers = state["settings"].workers
        result = runner(cfg, workers)
        write_node_json(name, result, state["settings"].outputs_dir)
        failed = [c.name for c in result.checks if not c.passed]
        log.info("  [OK] %s (%d rows, %d/%d checks passed)", name, len(result.rows),
                 len(result.checks) - len(failed), len(result.checks))
        return {"results": {name: result}, "checks": list(result.checks),
                "diagnostics": {name: result.diagnostics}}
    except Exception as e:
        log.error("  [FAIL] %s: %s", name, str(e)[:200])
        return {"errors": [f"{name}: {str(e)[:200]}"]}
