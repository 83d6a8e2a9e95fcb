"""Divide-and-discard observer loop.

X_0 is the initial set contracted against y_0; every later collection is
obtained by one pass of the step graph (refine, predict, contract, prune).
"""

from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from errors import DimensionMismatch, EmptyCollection, InconsistentMeasurements
from graph import create_graph
from services.contractor import StripSet, contract_initial
from services.dynamics import SystemModel
from services.interval import BoxCollection
from services.refinement import resolve_scaling
from services.utils import log
from state import ObserverConfig

_step_graph = None

STAGE_TIMINGS = ("refine_ms", "predict_ms", "contract_ms", "prune_ms")


def get_step_graph():
    """Compiled step graph, built on first use."""
    global _step_graph
    if _step_graph is None:
        _step_graph = create_graph()
    return _step_graph


def observer_step(collection: BoxCollection, model: SystemModel, u, y, cfg: ObserverConfig,
                  scaling: Optional[np.ndarray] = None, k: int = 0,
                  stats: Optional[Dict[str, float]] = None) -> BoxCollection:
    """Advance the collection by one time step using input u_k and measurement y_{k+1}.

    If ``stats`` is given it receives the per-stage counts and wall times.

    Raises:
        EmptyCollection: if ``collection`` is empty
        InconsistentMeasurements: if contraction discards every box
    """
    if len(collection) == 0:
        raise EmptyCollection("observer step needs at least one box")
    if scaling is None:
        scaling = resolve_scaling(cfg, model.X0)

    result = get_step_graph().invoke({
        "collection": collection,
        "model": model,
        "cfg": cfg,
        "scaling": scaling,
        "u": u,
        "y": np.atleast_1d(np.asarray(y, dtype=float)),
        "k": k,
        "stats": {},
    })

    if stats is not None:
        stats.update(result.get("stats") or {})
    new_collection = result["collection"]
    if len(new_collection) == 0:
        raise InconsistentMeasurements("measurement strips exclude every predicted box")
    return new_collection


def _check_sequences(model: SystemModel, inputs, measurements) -> Tuple[np.ndarray, np.ndarray]:
    measurements = np.asarray(measurements, dtype=float)
    if measurements.ndim == 1:
        measurements = measurements.reshape(-1, model.p)
    if measurements.ndim != 2 or measurements.shape[1] != model.p or measurements.shape[0] < 1:
        raise DimensionMismatch(
            f"measurements must have shape (N+1, {model.p}), got {measurements.shape}"
        )
    steps = measurements.shape[0] - 1
    if inputs is None:
        inputs = model.default_inputs(steps)
    inputs = np.asarray(inputs, dtype=float).reshape(-1, model.m) if model.m else np.zeros((steps, 0))
    if inputs.shape[0] != steps:
        raise DimensionMismatch(f"{inputs.shape[0]} input(s) for {steps} step(s)")
    return inputs, measurements


def iterate_run(model: SystemModel, cfg: ObserverConfig, inputs,
                measurements) -> Iterator[Tuple[int, BoxCollection, float]]:
    """Yield (k, X_k, step_ms) for k = 0..N.

    ``step_ms`` is the summed wall time of the refine, predict, contract and
    prune stages that produced X_k (0 for the initial contraction). Graph
    dispatch is not included.

    Raises:
        InconsistentMeasurements: with the index of the failing step
    """
    inputs, measurements = _check_sequences(model, inputs, measurements)
    scaling = resolve_scaling(cfg, model.X0)

    collection = contract_initial(model.X0, StripSet(model.C, measurements[0], model.V),
                                  cfg.I_max, cfg.rounding)
    if len(collection) == 0:
        raise InconsistentMeasurements("y_0 is inconsistent with X0", step=0)
    yield 0, collection, 0.0

    for k in range(inputs.shape[0]):
        stats: Dict[str, float] = {}
        try:
            collection = observer_step(collection, model, inputs[k], measurements[k + 1],
                                       cfg, scaling, k, stats)
        except InconsistentMeasurements as e:
            log(f"Run aborted: {e}", node="observer", level="ERROR")
            raise InconsistentMeasurements(str(e), step=k + 1) from e
        step_ms = sum(stats.get(name, 0.0) for name in STAGE_TIMINGS)
        log(f"k={k + 1}: {len(collection)} box(es), {int(stats.get('splits', 0))} split(s), "
            f"{int(stats.get('discarded', 0))} discarded, {int(stats.get('pruned', 0))} pruned, "
            f"{step_ms:.3f} ms", node="observer", level="DEBUG")
        yield k + 1, collection, step_ms


def run(model: SystemModel, cfg: ObserverConfig, inputs, measurements) -> List[BoxCollection]:
    """Run the observer over a whole measurement record and return X_0..X_N."""
    return [collection for _, collection, _ in iterate_run(model, cfg, inputs, measurements)]
