from bbm_lab.experiments.bilinear_estimate import bilinear_estimate_node, run_bilinear_estimate
from bbm_lab.experiments.common import CSV_COLUMNS, Check, ExperimentResult, ResultRow
from bbm_lab.experiments.data_norms import data_norms_node, run_data_norms
from bbm_lab.experiments.discontinuity import discontinuity_node, run_discontinuity
from bbm_lab.experiments.i2_inflation import i2_inflation_node, run_i2_inflation
from bbm_lab.experiments.series_approx import run_series_approx, series_approx_node
from bbm_lab.experiments.solver_validate import run_solver_validate, solver_validate_node
from bbm_lab.experiments.theta_scan import run_theta_scan, theta_scan_node

EXPERIMENT_NODES = {
    "theta_scan": theta_scan_node,
    "data_norms": data_norms_node,
    "i2_inflation": i2_inflation_node,
    "series_approx": series_approx_node,
    "discontinuity": discontinuity_node,
    "solver_validate": solver_validate_node,
    "bilinear_estimate": bilinear_estimate_node,
}

RUNNERS = {
    "theta_scan": run_theta_scan,
    "data_norms": run_data_norms,
    "i2_inflation": run_i2_inflation,
    "series_approx": run_series_approx,
    "discontinuity": run_discontinuity,
    "solver_validate": run_solver_validate,
    "bilinear_estimate": run_bilinear_estimate,
}

__all__ = ["CSV_COLUMNS", "Check", "EXPERIMENT_NODES", "ExperimentResult", "RUNNERS", "ResultRow"]
