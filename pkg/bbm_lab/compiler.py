import html
import json
import logging
import os
from typing import List, Optional

import pandas as pd

from bbm_lab import __version__
from bbm_lab.charts import build_norm_chart, build_solver_chart, build_theta_chart
from bbm_lab.config import ExperimentConfig
from bbm_lab.errors import LabError
from bbm_lab.experiments.common import CSV_COLUMNS, Check, ResultRow
from bbm_lab.state import LabState

log = logging.getLogger(__name__)

REPORT_NAME = "lab_report.html"
I2_NORMALIZATION = "I2 = 2 duhamel(S h, S h) = -i int S(t-t') phi(D) (S(t') h)^2 dt'; Picard term(2) = I2 / 2"
EXIT_OK, EXIT_PREDICATE, EXIT_ERROR = 0, 1, 2

TITLES = {
    "theta_scan": "Resonance Function Scan",
    "data_norms": "Counterexample Data Norms",
    "i2_inflation": "Second Iterate Inflation",
    "series_approx": "Series Approximation",
    "discontinuity": "Flow-Map Discontinuity",
    "solver_validate": "Solver Validation",
    "bilinear_estimate": "Bilinear Estimate",
}

PLOT_SCRIPT = """# norms against N on log axes; reads results.csv
set datafile separator ","
set logscale xy
set key autotitle columnhead outside
set xlabel "N"
set ylabel "norm"
set terminal pngcairo size 900,600
set output "norms.png"
plot "results.csv" using 1:5 with linespoints, \\
     "" using 1:7 with linespoints, \\
     "" using 1:8 with linespoints, \\
     "" using 1:9 with linespoints
"""


def emit_outputs(rows: List[ResultRow], cfg: ExperimentConfig, checks: Optional[List[Check]] = None,
                 diagnostics: Optional[dict] = None) -> dict:
    """Write results.csv, results.json and plot.gp into cfg.output_dir."""
    out = cfg.output_dir
    try:
        os.makedirs(out, exist_ok=True)
        csv_path = os.path.join(out, "results.csv")
        frame = pd.DataFrame([r.csv_values() for r in rows], columns=CSV_COLUMNS)
        frame.to_csv(csv_path, index=False, float_format="%.17g")

        json_path = os.path.join(out, "results.json")
        with open(json_path, "w", encoding="utf-8") as f:
            json.dump({
                "version": __version__,
                "i2_normalization": I2_NORMALIZATION,
                "config": cfg.model_dump(mode="json"),
                "rows": [r.model_dump() for r in rows],
                "checks": [c.model_dump() for c in checks or []],
                "diagnostics": diagnostics or {},
            }, f, indent=2, default=float)

        plot_path = os.path.join(out, "plot.gp")
        with open(plot_path, "w", encoding="utf-8") as f:
            f.write(PLOT_SCRIPT)
    except OSError as e:
        raise LabError(f"cannot write outputs to {out}: {e}") from e
    return {"csv": csv_path, "json": json_path, "plot": plot_path}


def load_rows(csv_path: str) -> List[ResultRow]:
    frame = pd.read_csv(csv_path, float_precision="round_trip").astype(float)
    return [ResultRow(**record) for record in frame.to_dict(orient="records")]


def verdict(checks: List[Check], errors: List[str]) -> int:
    if errors:
        return EXIT_ERROR
    return EXIT_PREDICATE if any(not c.passed for c in checks) else EXIT_OK


def compiler_node(state: LabState) -> dict:
    results = state.get("results", {})
    errors = state.get("errors", [])
    checks = state.get("checks", [])
    configs = state["configs"]

    log.info("[Compiler] Received %d experiment results, %d errors", len(results), len(errors))

    files = {}
    for name, result in results.items():
        try:
            files[name] = emit_outputs(result.rows, configs[name], result.checks, result.diagnostics)
        except LabError as e:
            log.error("  [FAIL] %s outputs: %s", name, e)
            errors = errors + [f"{name}: {e}"]

    failed = [c for c in checks if not c.passed]
    for c in failed:
        log.warning("  [FAIL] %s/%s: %s", c.experiment, c.name, c.detail)

    outputs_dir = state["settings"].outputs_dir
    os.makedirs(outputs_dir, exist_ok=True)
    report_path = os.path.join(outputs_dir, REPORT_NAME)
    with open(report_path, "w", encoding="utf-8") as f:
        f.write(_build_report_html(results, errors, state.get("summary", {})))

    compiled = {
        "experiments_completed": list(results.keys()),
        "experiments_failed": errors,
        "failed_checks": [f"{c.experiment}/{c.name}" for c in failed],
        "checks_total": len(checks),
        "files": files,
        "report_path": report_path,
        "exit_code": verdict(checks, errors),
    }

    log.info("[Compiler] %d/%d checks passed | report -> %s",
             len(checks) - len(failed), len(checks), report_path)
    return {"compiled": compiled}


def _checks_table(checks: List[Check]) -> str:
    if not checks:
        return ""
    body = "".join(
        f'<tr class="{"pass" if c.passed else "fail"}"><td>{html.escape(c.name)}</td>'
        f'<td>{"pass" if c.passed else "FAIL"}</td><td>{html.escape(c.detail)}</td></tr>'
        for c in checks
    )
    return f'<table class="checks"><tr><th>Check</th><th>Result</th><th>Detail</th></tr>{body}</table>'


def _chart_for(name: str, result) -> str:
    if name == "theta_scan":
        return build_theta_chart(result.diagnostics)
    if name == "solver_validate":
        return build_solver_chart(result.diagnostics)
    return build_norm_chart(result.rows, TITLES.get(name, name))


def _build_report_html(results: dict, errors: List[str], summary: dict) -> str:
    sections = ""
    nav_links = ""
    for name in TITLES:
        if name not in results:
            continue
        result = results[name]
        title = TITLES[name]
        passed = sum(c.passed for c in result.checks)
        nav_links += f'<a class="nav-item" href="#{name}">{title}</a>\n'
        sections += f"""
        <section class="card" id="{name}">
            <h2>{title}</h2>
            <p class="subtitle">{len(result.rows)} rows | {passed}/{len(result.checks)} checks passed</p>
            <div class="chart-container">{_chart_for(name, result)}</div>
            {_checks_table(result.checks)}
        </section>
        """

    errors_html = ""
    if errors:
        errors_html = ('<div class="error-banner"><h3>Pipeline Errors</h3><ul>'
                       + "".join(f"<li>{html.escape(e)}</li>" for e in errors) + "</ul></div>")

    N_values = ", ".join(f"{n:g}" for n in summary.get("N_values", []))

    return f"""<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>BBM Norm Inflation Lab</title>
    <script src="https://cdn.plot.ly/plotly-2.35.2.min.js"></script>
    <style>
        body {{ font-family: 'Inter', -apple-system, sans-serif; color: #09090b; font-size: 14px; margin: 0; }}
        .sidebar {{ position: fixed; top: 0; left: 0; width: 220px; height: 100vh;
                    border-right: 1px solid #e4e4e7; padding: 32px 16px; }}
        .nav-item {{ display: block; padding: 8px 12px; color: #52525b; text-decoration: none; border-radius: 6px; }}
        .nav-item:hover {{ background: rgba(99,102,241,0.1); }}
        .main {{ margin-left: 260px; padding: 48px 56px; max-width: 960px; }}
        .card {{ border: 1px solid #e4e4e7; border-radius: 10px; padding: 24px; margin-bottom: 32px; }}
        .subtitle {{ color: #71717a; }}
        table.checks {{ border-collapse: collapse; width: 100%; margin-top: 16px; }}
        table.checks td, table.checks th {{ border-bottom: 1px solid #e4e4e7; padding: 6px 8px; text-align: left; }}
        tr.fail td {{ color: #b91c1c; font-weight: 600; }}
        .error-banner {{ background: #fef2f2; border: 1px solid #fecaca; border-radius: 10px;
                         padding: 16px 24px; margin-bottom: 32px; }}
    </style>
</head>
<body>
    <nav class="sidebar">{nav_links}</nav>
    <main class="main">
        <div class="hero">
            <h1>BBM Norm Inflation Lab</h1>
            <p class="subtitle">N = {N_values or "-"}</p>
        </div>
        {errors_html}
        {sections}
    </main>
</body>
</html>"""
