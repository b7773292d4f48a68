import logging
import os

from bbm_lab.state import LabState

log = logging.getLogger(__name__)


def orchestrator_node(state: LabState) -> dict:
    configs = state["configs"]
    for cfg in configs.values():
        os.makedirs(cfg.output_dir, exist_ok=True)

    summary = {
        "experiments": list(configs),
        "N_values": sorted({n for cfg in configs.values() for n in cfg.N_list}),
        "s_values": sorted({s for cfg in configs.values() for s in cfg.s_list}),
        "grid_nodes": {name: 2 * cfg.grid.M + 1 for name, cfg in configs.items()},
        "workers": state["settings"].workers,
    }

    log.info("[Orchestrator] %d experiments | N in %s | %d workers",
             len(configs), summary["N_values"] or "-", summary["workers"])
    log.info("[Orchestrator] Dispatching to experiment nodes...")

    return {"summary": summary}
