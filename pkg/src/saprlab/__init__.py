"""Routing-protocol laboratory: self-avoiding paths routing, static baselines
and a discrete-time packet simulator for congestion studies on complex networks."""

from .baselines import (dijkstra_static, epr2_weights, epr_weights, run_or,
                        spr_weights)
from .graph import (Graph, generate_ba, largest_connected_component,
                    load_edge_list, read_edge_list)
from .metrics import (analytic_gamma_c, average_path_length,
                      betweenness_profile, estimate_rc, small_world_fit)
from .paths import PathSet
from .routes import build_plan, validate_loop_free
from .sapr import RoutingState, node_cost, run_sapr
from .sim import SimConfig, SimResult
from .sim import run as simulate

__all__ = [
    "Graph", "PathSet", "RoutingState", "SimConfig", "SimResult",
    "analytic_gamma_c", "average_path_length", "betweenness_profile",
    "build_plan", "dijkstra_static", "epr2_weights", "epr_weights",
    "estimate_rc", "generate_ba", "largest_connected_component",
    "load_edge_list", "node_cost", "read_edge_list", "run_or", "run_sapr",
    "simulate", "small_world_fit", "spr_weights", "validate_loop_free",
]
