"""Two identical agents exploring an anonymous port-labeled graph with help from placed pebbles."""
from .agents import AgentAction, AgentPerception, BipartiteAgent, GeneralAgent, IllegalState, agent_step
from .anon_bfs import (
    FirstVisitOrder,
    PathDecomposition,
    decompose,
    first_visit_order,
    first_visit_order_bruteforce,
    z_node,
)
from .graph import (
    Path,
    PortLabeledGraph,
    build_graph,
    distance,
    is_bipartite,
    load_graph,
    min_lex_shortest_path,
    neighbor_via_port,
    on_every_shortest_path,
    save_graph,
)
from .placement import (
    PebbleAssignment,
    PebbleColor,
    RolePair,
    assign_roles,
    place_pebbles_bipartite,
    place_pebbles_general,
    validate_placement,
)
from .sim import Outcome, SimulationConfig, SimulationTrace, WakeupSchedule, run
from .uxs import ExplorationSequence, apply_uxs, uxs_for, verify_universal

__version__ = "0.1.0"

__all__ = [
    "AgentAction",
    "AgentPerception",
    "BipartiteAgent",
    "ExplorationSequence",
    "FirstVisitOrder",
    "GeneralAgent",
    "IllegalState",
    "Outcome",
    "Path",
    "PathDecomposition",
    "PebbleAssignment",
    "PebbleColor",
    "PortLabeledGraph",
    "RolePair",
    "SimulationConfig",
    "SimulationTrace",
    "WakeupSchedule",
    "agent_step",
    "apply_uxs",
    "assign_roles",
    "build_graph",
    "decompose",
    "distance",
    "first_visit_order",
    "first_visit_order_bruteforce",
    "is_bipartite",
    "load_graph",
    "min_lex_shortest_path",
    "neighbor_via_port",
    "on_every_shortest_path",
    "place_pebbles_bipartite",
    "place_pebbles_general",
    "run",
    "save_graph",
    "uxs_for",
    "validate_placement",
    "z_node",
]
