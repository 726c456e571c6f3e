"""Publish/subscribe routing on virtual rings with shortcuts."""

from .baselines import shen_step
from .kernels import BACKEND
from .pubsub import NodeState, PubMsg, RoutingEntry, SubMsg, Timings, converged_table, route_static
from .ring import VirtualRing, build_ring, ccw_dist, is_between
from .sim import Scenario, Simulator, TraceLedger, run
from .topology import (Graph, LinkSelection, SpanningTree, build_tree, central_node,
                       generate_er, load_graph, select_links)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Graph", "LinkSelection", "NodeState", "PubMsg", "RoutingEntry", "Scenario",
    "Simulator", "SpanningTree", "SubMsg", "Timings", "TraceLedger", "VirtualRing",
    "build_ring", "build_tree", "ccw_dist", "central_node", "converged_table", "generate_er",
    "is_between", "load_graph", "route_static", "run", "select_links", "shen_step",
]
