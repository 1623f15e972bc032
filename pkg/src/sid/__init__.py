"""Causal effect identification from sub-population data.

Graphs carry an auxiliary selection node ``S``; queries ask for
``P_X(Y | S=1)`` given only ``P(V | S=1)``.
"""

from .estimand import (
    EstimandError,
    EvaluationError,
    JointTable,
    Prob,
    Product,
    Ratio,
    SumOver,
    evaluate,
    evaluate_table,
    render,
    structurally_equal_mod_conditioning,
)
from .graph import (
    AugmentedDag,
    Dag,
    GraphError,
    ancestors,
    d_separated,
    descendants,
    edge_surgery,
    find_active_path,
    load_graph,
    parse_graph,
)
from .identify import (
    Identifiable,
    NotIdentifiable,
    Query,
    QueryError,
    decompose_treatment,
    identify,
    is_s_id,
    s_id,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentedDag",
    "Dag",
    "EstimandError",
    "EvaluationError",
    "GraphError",
    "Identifiable",
    "JointTable",
    "NotIdentifiable",
    "Prob",
    "Product",
    "Query",
    "QueryError",
    "Ratio",
    "SumOver",
    "ancestors",
    "d_separated",
    "decompose_treatment",
    "descendants",
    "edge_surgery",
    "evaluate",
    "evaluate_table",
    "find_active_path",
    "identify",
    "is_s_id",
    "load_graph",
    "parse_graph",
    "render",
    "s_id",
    "structurally_equal_mod_conditioning",
]
