"""Refine node - splits boxes along their widest scaled dimension up to M_max."""

from typing import Any

from services.refinement import refine
from services.utils import log, stopwatch
from state import ObserverState


def refine_node(state: ObserverState) -> Any:
    """Grow the collection to the interval cap by binned bisection.

    Full doubling rounds run first; the final partial round splits boxes
    from the largest-width bins downward. With M_max = 1 the collection
    passes through untouched.
    """
    collection = state["collection"]
    cfg = state["cfg"]

    with stopwatch() as elapsed:
        refined = refine(collection, cfg, state["scaling"])
    splits = len(refined) - len(collection)

    log(f"k={state.get('k', 0)}: {len(collection)} -> {len(refined)} box(es), {splits} split(s)",
        node="refine", level="DEBUG")
    return {"collection": refined, "stats": {"splits": splits, "refine_ms": elapsed[0]}}
