"""Oracle pebble placements for the general (3 colours) and bipartite (2 colours) algorithms."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .anon_bfs import InvariantBreach, PathDecomposition, SameNode, decompose, z_node
from .graph import PortLabeledGraph, is_bipartite, min_lex_shortest_path, on_every_shortest_path


class PebbleColor(enum.Enum):
    RED = "red"
    BLUE = "blue"
    GREEN = "green"
    BLACK = "black"

    def __str__(self) -> str:
        return self.value


RED, BLUE, GREEN, BLACK = PebbleColor.RED, PebbleColor.BLUE, PebbleColor.GREEN, PebbleColor.BLACK

PALETTES = {
    "general": frozenset({RED, BLUE, GREEN}),
    "bipartite": frozenset({RED, BLACK}),
}
MAX_COLOR_INDEX = {"general": 3, "bipartite": 2}


class NotBipartite(ValueError):
    pass


class DoublePebble(ValueError):
    pass


class PebbleAssignment(dict):
    """node -> colour; at most one pebble per node."""

    def put(self, v: int, color: PebbleColor) -> None:
        if v in self and self[v] is not color:
            raise DoublePebble(f"node {v} already holds {self[v]}, cannot add {color}")
        self[v] = color

    @property
    def color_index(self) -> int:
        return len(set(self.values()))

    def to_dict(self) -> dict[str, str]:
        return {str(v): c.value for v, c in sorted(self.items())}

    @classmethod
    def from_dict(cls, data: dict) -> "PebbleAssignment":
        return cls({int(v): PebbleColor(c) for v, c in data.items()})


@dataclass(frozen=True)
class RolePair:
    x: int  # waits, explores last
    y: int  # initiator
    swapped: bool = False


@dataclass
class Placement:
    pebbles: PebbleAssignment
    roles: RolePair
    case: str
    decomposition: PathDecomposition | None = None
    notes: list[str] = field(default_factory=list)


def assign_roles(g: PortLabeledGraph, a: int, b: int) -> RolePair:
    if a == b:
        raise SameNode(f"both agents on node {a}")
    if on_every_shortest_path(g, b, z_node(g, a), a):
        return RolePair(x=b, y=a, swapped=True)
    return RolePair(x=a, y=b)


def _hub_case(g: PortLabeledGraph, hub: int, other: int, out: PebbleAssignment) -> str:
    """Pebbles around a node adjacent to everything; ``other`` gets green elsewhere."""
    last = g.degree(hub) - 1
    p = g.port_to(hub, other)
    if p == 0:
        out.put(hub, RED)
        out.put(g.neighbor(hub, last)[0], GREEN)
        return "p=0"
    if p == last:
        out.put(g.neighbor(hub, last - 1)[0], GREEN)
        return "p=last"
    out.put(g.neighbor(hub, p - 1)[0], RED)
    out.put(g.neighbor(hub, last)[0], GREEN)
    return "0<p<last"


def place_pebbles_general(g: PortLabeledGraph, a: int, b: int) -> Placement:
    roles = assign_roles(g, a, b)
    x, y, n = roles.x, roles.y, g.n
    out = PebbleAssignment()
    if n == 2:
        return Placement(out, roles, "n=2")
    if g.degree(y) == n - 1:
        out.put(x, GREEN)
        sub = _hub_case(g, y, x, out)
        return Placement(out, roles, f"1:{sub}")
    if g.degree(x) == n - 1:
        out.put(y, GREEN)
        sub = _hub_case(g, x, y, out)
        return Placement(out, roles, f"2:{sub}")

    dec = decompose(g, x, y)
    if not dec.avoided_x:
        raise InvariantBreach(f"every shortest path {y}->{dec.z} passes through x={x}")
    path = dec.to_z
    if y == dec.z:
        for v in dec.to_x.nodes[:-1]:
            out.put(v, RED)
        out.put(dec.z_prime, GREEN)
        return Placement(out, roles, "3a", dec)

    if any(g.adjacent(x, v) for v in path.nodes):
        out.put(dec.z, RED)
        for i, v in enumerate(path.nodes[:-1]):
            if not g.adjacent(v, x):
                out.put(v, BLUE)
            elif path.ports[i] < g.port_to(v, x):
                out.put(v, BLUE)
            else:
                out.put(v, RED)
        out.put(dec.z_prime, GREEN)
        return Placement(out, roles, "3b-i", dec)

    if dec.shared == {y}:
        for v in dec.to_x.nodes[:-1]:
            out.put(v, RED)
        for v in path.nodes[1:]:
            out.put(v, BLUE)
        out.put(dec.z_prime, GREEN)
        return Placement(out, roles, "3b-ii-A", dec)

    u = dec.fork
    iu = path.nodes.index(u)
    ju = dec.to_x.nodes.index(u)
    for v in path.nodes[:iu]:
        out.put(v, BLUE)
    for v in path.nodes[iu + 1 :]:
        out.put(v, BLUE)
    for v in dec.to_x.nodes[ju:-1]:
        out.put(v, RED)
    out.put(dec.z_prime, GREEN)
    return Placement(out, roles, "3b-ii-B", dec)


def bipartite_roles(g: PortLabeledGraph, a: int, b: int) -> RolePair:
    if a == b:
        raise SameNode(f"both agents on node {a}")
    if g.degree(a) >= g.degree(b):
        return RolePair(x=a, y=b)
    return RolePair(x=b, y=a, swapped=True)


def place_pebbles_bipartite(g: PortLabeledGraph, a: int, b: int) -> Placement:
    if is_bipartite(g) is None:
        raise NotBipartite("graph has an odd cycle")
    roles = bipartite_roles(g, a, b)
    x, y, n = roles.x, roles.y, g.n
    out = PebbleAssignment()
    if g.degree(x) == n - 1 and g.degree(y) == 1:
        out.put(x, RED if g.neighbor(x, 0)[0] == y else BLACK)
        return Placement(out, roles, "1")
    if g.distances[x][y] > 1:
        path = min_lex_shortest_path(g, x, y)
        for v in path.nodes[:-1]:
            out.put(v, BLACK)
        return Placement(out, roles, "2a")
    out.put(x, RED if g.neighbor(x, 0)[0] == y else BLACK)
    return Placement(out, roles, "2b")


@dataclass
class PlacementDiagnostics:
    ok: bool
    color_index: int
    problems: list[str]


def validate_placement(assignment: dict, mode: str) -> PlacementDiagnostics:
    problems = []
    palette = PALETTES[mode]
    colors = set()
    for v, c in assignment.items():
        if isinstance(c, (list, tuple, set)):
            problems.append(f"node {v} holds {len(c)} pebbles")
            continue
        if c not in palette:
            problems.append(f"node {v}: colour {c} outside the {mode} palette")
        colors.add(c)
    if len(colors) > MAX_COLOR_INDEX[mode]:
        problems.append(f"colour index {len(colors)} exceeds {MAX_COLOR_INDEX[mode]}")
    return PlacementDiagnostics(not problems, len(colors), problems)
