"""LangGraph definition of one divide-and-discard observer step."""

from typing import Any, Literal

from langgraph.graph import END, StateGraph
from langgraph.graph.state import CompiledStateGraph

from nodes.contract import contract_node
from nodes.predict import predict_node
from nodes.prune import prune_node
from nodes.refine import refine_node
from state import ObserverState


def create_graph() -> CompiledStateGraph[Any, Any, Any, Any]:
    """Create the graph that advances the box collection from k to k+1.

    Graph flow:
    1. refine: split boxes up to the interval cap M_max
    2. predict: mean-value enclosure of each box with u_k
    3. contract: Gauss-Seidel against the strips of y_{k+1}, discarding empty boxes
    4. prune: drop boxes nested in their bin's representative

    If contraction discards every box the graph ends without pruning and the
    caller raises InconsistentMeasurements.
    """
    workflow = StateGraph(ObserverState)

    workflow.add_node("refine", refine_node)
    workflow.add_node("predict", predict_node)
    workflow.add_node("contract", contract_node)
    workflow.add_node("prune", prune_node)

    workflow.set_entry_point("refine")
    workflow.add_edge("refine", "predict")
    workflow.add_edge("predict", "contract")

    workflow.add_conditional_edges(
        "contract",
        route_after_contract,
        {
            "prune": "prune",
            "end": END,
        }
    )
    workflow.add_edge("prune", END)

    return workflow.compile()


def route_after_contract(state: ObserverState) -> Literal["prune", "end"]:
    """Skip pruning when contraction left no boxes."""
    if len(state["collection"]) == 0:
        return "end"
    return "prune"
