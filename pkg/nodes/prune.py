"""Prune node - removes boxes nested inside their bin's representative."""

from typing import Any

from services.refinement import prune
from services.utils import log, stopwatch
from state import ObserverState


def prune_node(state: ObserverState) -> Any:
    collection = state["collection"]
    with stopwatch() as elapsed:
        pruned = prune(collection, state["cfg"], state["scaling"])
    removed = len(collection) - len(pruned)

    if removed:
        log(f"k={state.get('k', 0)}: pruned {removed} nested box(es)", node="prune", level="DEBUG")
    return {"collection": pruned, "stats": {"pruned": removed, "prune_ms": elapsed[0]}}
