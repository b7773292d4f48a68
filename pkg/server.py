import json
import os
import sys
import threading
import time
from contextlib import asynccontextmanager
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from pydantic import BaseModel, Field

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from bbm_lab import __version__  # noqa: E402
from bbm_lab.compiler import REPORT_NAME  # noqa: E402
from bbm_lab.config import ExperimentName, configure_logging, load_config, load_settings  # noqa: E402
from bbm_lab.errors import LabError  # noqa: E402

_sweep_state = {
    "status": "idle",
    "started_at": None,
    "completed_at": None,
    "elapsed_sec": None,
    "experiments_completed": [],
    "failed_checks": [],
    "errors": [],
    "exit_code": None,
    "report_path": None,
    "result_files": {},
}
_lock = threading.Lock()


def _outputs_dir() -> str:
    return load_settings().outputs_dir


@asynccontextmanager
async def lifespan(app: FastAPI):
    settings = load_settings()
    configure_logging(settings.log_level)
    os.makedirs(settings.outputs_dir, exist_ok=True)
    yield


app = FastAPI(
    title="BBM Lab API",
    description="Norm inflation and ill-posedness experiments for the BBM equation",
    version=__version__,
    lifespan=lifespan,
)


class RunRequest(BaseModel):
    experiments: List[ExperimentName] = Field(default_factory=lambda: list(ExperimentName))
    overrides: Dict[str, dict] = Field(default_factory=dict)


class SweepResponse(BaseModel):
    status: str
    started_at: Optional[str] = None
    completed_at: Optional[str] = None
    elapsed_sec: Optional[float] = None
    experiments_completed: list = []
    failed_checks: list = []
    errors: list = []
    exit_code: Optional[int] = None
    report_path: Optional[str] = None


def _run_sweep(configs: dict):
    try:
        from bbm_lab.graph import run_sweep

        start = time.time()
        result = run_sweep(configs, load_settings())
        elapsed = time.time() - start
        compiled = result.get("compiled", {})

        with _lock:
            _sweep_state["status"] = "completed"
            _sweep_state["completed_at"] = time.strftime("%Y-%m-%d %H:%M:%S")
            _sweep_state["elapsed_sec"] = round(elapsed, 1)
            _sweep_state["experiments_completed"] = compiled.get("experiments_completed", [])
            _sweep_state["failed_checks"] = compiled.get("failed_checks", [])
            _sweep_state["errors"] = compiled.get("experiments_failed", [])
            _sweep_state["exit_code"] = compiled.get("exit_code")
            _sweep_state["report_path"] = compiled.get("report_path")
            _sweep_state["result_files"] = {name: paths["json"] for name, paths in compiled.get("files", {}).items()}

    except Exception as e:
        with _lock:
            _sweep_state["status"] = "failed"
            _sweep_state["completed_at"] = time.strftime("%Y-%m-%d %H:%M:%S")
            _sweep_state["errors"] = [str(e)]
            _sweep_state["exit_code"] = 2


@app.get("/", response_class=HTMLResponse)
async def root():
    report = os.path.join(_outputs_dir(), REPORT_NAME)
    if os.path.exists(report):
        with open(report, "r", encoding="utf-8") as f:
            return HTMLResponse(content=f.read())
    return HTMLResponse(
        content="<html><body style='font-family:Inter,sans-serif;display:flex;align-items:center;justify-content:center;height:100vh'>"
                "<div style='text-align:center'><h1>BBM Lab</h1><p>No report generated yet. POST to /api/run to start a sweep.</p></div>"
                "</body></html>"
    )


@app.post("/api/run", response_model=SweepResponse)
async def run_experiments(request: RunRequest):
    try:
        configs = {
            name.value: load_config(name, overrides=request.overrides.get(name.value, {}))
            for name in request.experiments
        }
    except LabError as e:
        raise HTTPException(status_code=422, detail=str(e))

    with _lock:
        if _sweep_state["status"] == "running":
            raise HTTPException(status_code=409, detail="A sweep is already running")
        started = time.strftime("%Y-%m-%d %H:%M:%S")
        _sweep_state.update({
            "status": "running", "started_at": started, "completed_at": None, "elapsed_sec": None,
            "experiments_completed": [], "failed_checks": [], "errors": [], "exit_code": None, "result_files": {},
        })

    thread = threading.Thread(target=_run_sweep, args=(configs,), daemon=True)
    thread.start()

    return SweepResponse(status="started", started_at=started)


@app.get("/api/status", response_model=SweepResponse)
async def sweep_status():
    with _lock:
        return SweepResponse(**_sweep_state)


@app.get("/api/experiments")
async def list_experiments():
    with _lock:
        return JSONResponse({
            "available_experiments": [name.value for name in ExperimentName],
            "completed": _sweep_state["experiments_completed"],
            "failed_checks": _sweep_state["failed_checks"],
            "errors": _sweep_state["errors"],
        })


@app.get("/api/results/{experiment}")
async def get_results(experiment: str):
    try:
        name = ExperimentName(experiment)
    except ValueError:
        raise HTTPException(status_code=404, detail=f"Unknown experiment '{experiment}'")
    with _lock:
        path = _sweep_state["result_files"].get(name.value)
    if path is None:
        path = os.path.join(load_config(name).output_dir, "results.json")
    if not os.path.exists(path):
        raise HTTPException(status_code=404, detail=f"No results for {experiment}. POST /api/run first.")
    with open(path, "r", encoding="utf-8") as f:
        return JSONResponse(json.load(f))


@app.get("/api/report")
async def get_report():
    report = os.path.join(_outputs_dir(), REPORT_NAME)
    if not os.path.exists(report):
        raise HTTPException(status_code=404, detail="Report not generated. POST /api/run first.")
    return FileResponse(report, media_type="text/html")


@app.get("/api/health")
async def health():
    return {"status": "ok", "sweep": _sweep_state["status"], "version": __version__}


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host="0.0.0.0", port=int(os.environ.get("PORT", "8000")))
