"""Contract node - Gauss-Seidel tightening against the measurement strips."""

from typing import Any

from services.contractor import StripSet, gs_contract
from services.utils import log, stopwatch
from state import ObserverState


def contract_node(state: ObserverState) -> Any:
    """Contract predicted boxes against y_{k+1} and discard the empty ones.

    An empty result is passed on; the graph routes it straight to the end and
    the caller reports the inconsistency.
    """
    model = state["model"]
    cfg = state["cfg"]
    collection = state["collection"]

    strips = StripSet(model.C, state["y"], model.V)
    with stopwatch() as elapsed:
        contracted = gs_contract(collection, strips, cfg.I_max, cfg.rounding)
    discarded = len(collection) - len(contracted)

    if discarded:
        log(f"k={state.get('k', 0)}: discarded {discarded} of {len(collection)} box(es)",
            node="contract", level="DEBUG")
    if len(contracted) == 0:
        log(f"k={state.get('k', 0)}: every box contradicts the measurement",
            node="contract", level="WARNING")
    return {"collection": contracted, "stats": {"discarded": discarded, "contract_ms": elapsed[0]}}
