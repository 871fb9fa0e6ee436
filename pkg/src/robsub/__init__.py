"""Robust and risk-averse submodular optimization toolkit.

Influence maximization under uncertain propagation (DOSIM), query-budgeted
network exploration (ARISEN) and field sampling (CHANGE), robust
maximization over objective families by stochastic Frank-Wolfe (EQUATOR),
and CVaR maximization of continuous DR-submodular objectives (RASCAL),
with exact desk-scale oracles for all of them.
"""

__version__ = "0.1.0"

from .backend import backend_name
from .cascade import (cascade_from_coins, draw_coins, exact_spread,
                      expected_spread, simulate_icm)
from .graphs import (CascadeConfig, EdgeParams, Graph, SbmParams,
                     generate_sbm, load_edge_list, save_edge_list)
from .submod import (CardinalityConstraint, CoverageObjective,
                     FractionalPoint, MatroidConstraint, ModularObjective,
                     SetObjective, exhaustive_opt, greedy_maximize,
                     multilinear_grad, multilinear_value, swap_round)

__all__ = [
    "__version__", "backend_name",
    "Graph", "EdgeParams", "SbmParams", "CascadeConfig", "generate_sbm",
    "load_edge_list", "save_edge_list",
    "simulate_icm", "expected_spread", "exact_spread", "draw_coins",
    "cascade_from_coins",
    "SetObjective", "ModularObjective", "CoverageObjective",
    "CardinalityConstraint", "MatroidConstraint", "FractionalPoint",
    "greedy_maximize", "multilinear_value", "multilinear_grad", "swap_round",
    "exhaustive_opt",
]
