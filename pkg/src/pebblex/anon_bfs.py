"""First-visit order of the lexicographic walk enumeration, and the path split it induces."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .graph import NoAvoidingPath, Path, PortLabeledGraph, min_lex_shortest_path


class ExplosionCap(RuntimeError):
    pass


class SameNode(ValueError):
    pass


class InvariantBreach(RuntimeError):
    """A structural assumption of the placement does not hold on this instance."""


@dataclass(frozen=True)
class FirstVisitOrder:
    root: int
    order: tuple[int, ...]
    walks: dict[int, tuple[int, ...]]

    def index(self, v: int) -> int:
        return self.order.index(v)

    @property
    def last(self) -> int:
        return self.order[-1]


def first_visit_order(g: PortLabeledGraph, root: int) -> FirstVisitOrder:
    """Layered DP: each node keyed by (distance, min-lex walk of that length reaching it)."""
    dist = g.distances[root]
    walks: dict[int, tuple[int, ...]] = {root: ()}
    layers: dict[int, list[int]] = {}
    for v in g.nodes:
        layers.setdefault(dist[v], []).append(v)
    for k in range(1, max(dist) + 1):
        for v in layers.get(k, []):
            best = None
            for w, q in g.ports[v]:
                if dist[w] == k - 1:
                    cand = walks[w] + (q,)
                    if best is None or cand < best:
                        best = cand
            walks[v] = best
    order = tuple(sorted(g.nodes, key=lambda v: (dist[v], walks[v])))
    return FirstVisitOrder(root, order, walks)


def first_visit_order_bruteforce(
    g: PortLabeledGraph, root: int, cap: int = 2_000_000
) -> FirstVisitOrder:
    """Walk every valid port sequence of length 1, 2, ... in lex order and log first visits."""
    seen = {root: ()}
    order = [root]
    budget = cap
    length = 0
    delta = g.max_degree
    while len(order) < g.n:
        length += 1
        for seq in itertools.product(range(delta), repeat=length):
            budget -= 1
            if budget < 0:
                raise ExplosionCap(f"more than {cap} walks enumerated from {root}")
            v = root
            for i, p in enumerate(seq):
                if p >= len(g.ports[v]):
                    break
                v = g.ports[v][p][0]
                if v not in seen:
                    seen[v] = seq[: i + 1]
                    order.append(v)
    return FirstVisitOrder(root, tuple(order), seen)


def z_node(g: PortLabeledGraph, root: int) -> int:
    return first_visit_order(g, root).last


@dataclass(frozen=True)
class PathDecomposition:
    x: int
    y: int
    z: int
    z_prime: int
    to_z: Path  # y -> z_x
    to_x: Path  # y -> x
    on_path: frozenset[int]
    off_path: frozenset[int]
    to_x_nodes: frozenset[int]
    remainder: frozenset[int]
    shared: frozenset[int]
    fork: int
    avoided_x: bool
    f_order: FirstVisitOrder


def decompose(g: PortLabeledGraph, x: int, y: int) -> PathDecomposition:
    if x == y:
        raise SameNode(f"both roles on node {x}")
    fo = first_visit_order(g, x)
    z = fo.last
    try:
        to_z = min_lex_shortest_path(g, y, z, forbidden=(x,))
        avoided = True
    except NoAvoidingPath:
        to_z = min_lex_shortest_path(g, y, z)
        avoided = False
    to_x = min_lex_shortest_path(g, y, x)
    v1 = frozenset(to_z.nodes)
    v2 = frozenset(g.nodes) - v1
    w1 = frozenset(to_x.nodes)
    v3 = (v2 - w1) | {x}
    z_prime = next(v for v in reversed(fo.order) if v in v3)
    shared = v1 & w1
    dist_y = g.distances[y]
    far = max(dist_y[u] for u in shared)
    forks = [u for u in shared if dist_y[u] == far]
    if len(forks) != 1:
        raise InvariantBreach(f"shared nodes {sorted(forks)} tie for the fork position")
    return PathDecomposition(
        x=x,
        y=y,
        z=z,
        z_prime=z_prime,
        to_z=to_z,
        to_x=to_x,
        on_path=v1,
        off_path=v2,
        to_x_nodes=w1,
        remainder=v3,
        shared=shared,
        fork=forks[0],
        avoided_x=avoided,
        f_order=fo,
    )
