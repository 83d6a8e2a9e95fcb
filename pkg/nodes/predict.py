"""Predict node - mean-value enclosure of every box under the dynamics."""

from typing import Any

from services.dynamics import mean_value_enclosure
from services.utils import log, stopwatch
from state import ObserverState


def predict_node(state: ObserverState) -> Any:
    """Propagate all boxes one step with the known input u_k.

    The model's domain guard runs first (tank levels are intersected with
    the nonnegative orthant), then each box is mapped through
    f(c) + J(X x W) ([X; W] - c). A tank box reaching below the level
    floor raises DomainViolation.
    """
    model = state["model"]
    cfg = state["cfg"]
    collection = state["collection"]

    with stopwatch() as elapsed:
        predicted = mean_value_enclosure(model, collection, state.get("u"), model.W, cfg.rounding)

    log(f"k={state.get('k', 0)}: predicted {len(predicted)} box(es)", node="predict", level="DEBUG")
    return {"collection": predicted, "stats": {"predict_ms": elapsed[0]}}
