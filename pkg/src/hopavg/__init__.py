"""Asynchronous distributed averaging over multi-hop wireless networks.

Hopwise averaging (random, ideal-controlled and controlled), four gossip
baselines, closed-form convergence-rate bounds and a transmission-counting
experiment harness.
"""

from .algorithms import AlgorithmConfig, AlgorithmRun, initialize
from .bounds import gamma_closed, gamma_general, gamma_two_iteration
from .graph import Graph, build_family, build_random_geometric, diameter, graph_invariants
from .harness import Scenario, generate_scenario, run_once, run_sweep
from .hopwise import compute_weights, init_state

__all__ = [
    "AlgorithmConfig", "AlgorithmRun", "Graph", "Scenario", "build_family",
    "build_random_geometric", "compute_weights", "diameter", "gamma_closed", "gamma_general",
    "gamma_two_iteration", "generate_scenario", "graph_invariants", "init_state", "initialize",
    "run_once", "run_sweep",
]

__version__ = "0.1.0"
