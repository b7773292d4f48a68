from typing import Dict, Iterable, Optional

from langgraph.graph import END, START, StateGraph

from bbm_lab.compiler import compiler_node
from bbm_lab.config import ExperimentConfig, Settings, load_settings
from bbm_lab.experiments import EXPERIMENT_NODES
from bbm_lab.orchestrator import orchestrator_node
from bbm_lab.state import LabState


def build_graph(experiments: Iterable[str]) -> StateGraph:
    names = list(experiments)
    unknown = [n for n in names if n not in EXPERIMENT_NODES]
    if unknown:
        raise KeyError(f"unknown experiments: {unknown}")

    graph = StateGraph(LabState)
    graph.add_node("orchestrator", orchestrator_node)
    for name in names:
        graph.add_node(name, EXPERIMENT_NODES[name])
    graph.add_node("compiler", compiler_node)

    graph.add_edge(START, "orchestrator")
    for name in names:
        graph.add_edge("orchestrator", name)
    for name in names:
        graph.add_edge(name, "compiler")
    if not names:
        graph.add_edge("orchestrator", "compiler")
    graph.add_edge("compiler", END)

    return graph.compile()


def run_sweep(configs: Dict[str, ExperimentConfig], settings: Optional[Settings] = None) -> dict:
    """Run the given experiments through the graph and return the final state."""
    app = build_graph(configs.keys())
    return app.invoke({
        "configs": dict(configs),
        "settings": settings or load_settings(),
        "summary": {},
        "results": {},
        "checks": [],
        "diagnostics": {},
        "compiled": {},
        "errors": [],
    })
