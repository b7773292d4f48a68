"""Resonance function on a lattice plus the identity / kernel checks."""
import logging
import math
import os

import numpy as np
import pandas as pd
from scipy.stats import qmc

from bbm_lab.config import ExperimentConfig, ExperimentName
from bbm_lab.experiments.common import ExperimentResult, run_node
from bbm_lab.state import LabState
from bbm_lab.symbols import SERIES_RADIUS, ResonancePoint, psi_kernel, theta_direct, theta_rational

log = logging.getLogger(__name__)

EXPERIMENT = ExperimentName.THETA_SCAN.value
IDENTITY_TOL = 1e-12
SPOT = ResonancePoint(2.0, 1.0)
SPOT_VALUE = 0.6


def sobol_points(samples: int, box: float, seed: int = 0) -> np.ndarray:
    """`samples` quasi-random points in [-box, box]^2."""
    sampler = qmc.Sobol(d=2, scramble=True, seed=seed)
    points = sampler.random_base2(m=max(1, math.ceil(math.log2(samples))))[:samples]
    return qmc.scale(points, [-box, -box], [box, box])


def near_resonant_decay(N_small: float = 16.0, N_large: float = 1024.0) -> dict:
    """|theta| at matched positions inside A_xi for two values of N (xi != 0)."""
    xi = np.array([-0.25, -0.125, 0.125, 0.25])[:, None]
    shift = np.array([-0.5, 0.0, 0.5])[None, :]
    small = np.abs(theta_direct((xi, N_small + shift)))
    large = np.abs(theta_direct((xi, N_large + shift)))
    return {"small": small, "large": large, "decreasing": bool(np.all(large < small))}


def run_theta_scan(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    result = ExperimentResult()
    scan = cfg.theta

    axis = np.arange(-scan.extent, scan.extent + 0.5 * scan.step, scan.step)
    xi, xi1 = np.meshgrid(axis, axis, indexing="ij")
    theta = theta_direct((xi, xi1))
    os.makedirs(cfg.output_dir, exist_ok=True)
    csv_path = os.path.join(cfg.output_dir, "theta_scan.csv")
    pd.DataFrame({"xi": xi.ravel(), "xi1": xi1.ravel(), "theta": theta.ravel()}).to_csv(
        csv_path, index=False, float_format="%.17g")

    pts = sobol_points(scan.samples, scan.box)
    direct = theta_direct((pts[:, 0], pts[:, 1]))
    rational = theta_rational((pts[:, 0], pts[:, 1]))
    worst = float(np.max(np.abs(direct - rational) / (1.0 + np.abs(direct))))
    result.check(EXPERIMENT, "identity", worst <= IDENTITY_TOL,
                 f"max relative gap {worst:.3e} over {len(pts)} points")

    spot = float(theta_direct(SPOT))
    result.check(EXPERIMENT, "spot_value", abs(spot - SPOT_VALUE) <= 1e-15, f"theta(2,1) = {spot!r}")

    decay = near_resonant_decay()
    result.check(EXPERIMENT, "near_resonant_decay", decay["decreasing"],
                 f"max |theta| {decay['small'].max():.4f} at N=16, {decay['large'].max():.4f} at N=1024")

    # |t psi(-i t theta)| stays within [t/2, t] while |t theta| <= 1
    t = np.linspace(0.05, 1.0, 20)[:, None]
    th = np.linspace(-1.0, 1.0, 41)[None, :]
    modulus = np.abs(t * psi_kernel(-1j * t * th))
    result.check(EXPERIMENT, "kernel_bounds", bool(np.all((modulus <= t + 1e-15) & (modulus >= 0.5 * t))),
                 f"min |psi| = {float(np.min(modulus / t)):.4f}")

    angles = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
    edge = SERIES_RADIUS * np.exp(1j * angles)
    jump = float(np.max(np.abs(psi_kernel(edge * (1 - 1e-9)) - psi_kernel(edge * (1 + 1e-9)))))
    result.check(EXPERIMENT, "kernel_switch", jump <= 1e-12, f"jump across |z| = {SERIES_RADIUS:g}: {jump:.2e}")

    result.diagnostics = {
        "csv": csv_path,
        "lattice_points": int(theta.size),
        "axis": axis.tolist(),
        "theta": theta.tolist(),
        "identity_gap": worst,
        "spot": float(spot),
    }
    log.debug("theta scan: %d lattice points, identity gap %.2e", theta.size, worst)
    return result


def theta_scan_node(state: LabState) -> dict:
    return run_node(EXPERIMENT, run_theta_scan, state)
