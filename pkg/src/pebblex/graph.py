"""Anonymous port-labeled graphs.

Node identifiers exist only so the simulator and the oracle can talk about
positions; agents never see them.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path as FsPath
from typing import Iterable, Iterator, Sequence


class GraphError(ValueError):
    """Base class for malformed graph descriptions."""


class PortClash(GraphError):
    pass


class PortGap(GraphError):
    pass


class Disconnected(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class BadPort(GraphError):
    pass


class BadNode(GraphError):
    pass


class Unreachable(GraphError):
    pass


class NoAvoidingPath(GraphError):
    """No shortest path between the endpoints avoids the forbidden nodes."""


Edge = tuple[int, int, int, int]


@dataclass(frozen=True)
class PortLabeledGraph:
    """``ports[v][p] == (w, q)``: port ``p`` at ``v`` leads to ``w``, entering by ``q``."""

    ports: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def n(self) -> int:
        return len(self.ports)

    @property
    def nodes(self) -> range:
        return range(len(self.ports))

    def degree(self, v: int) -> int:
        return len(self.ports[v])

    @cached_property
    def max_degree(self) -> int:
        return max(len(p) for p in self.ports)

    def neighbor(self, v: int, p: int) -> tuple[int, int]:
        return neighbor_via_port(self, v, p)

    def neighbors(self, v: int) -> list[int]:
        return [w for w, _ in self.ports[v]]

    def port_to(self, v: int, w: int) -> int:
        """Port at ``v`` of the edge ``(v, w)``."""
        for p, (u, _) in enumerate(self.ports[v]):
            if u == w:
                return p
        raise BadNode(f"nodes {v} and {w} are not adjacent")

    def adjacent(self, v: int, w: int) -> bool:
        return w in self._adjacency[v]

    @cached_property
    def _adjacency(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(w for w, _ in row) for row in self.ports)

    def edges(self) -> list[Edge]:
        out = []
        for v, row in enumerate(self.ports):
            for p, (w, q) in enumerate(row):
                if v < w:
                    out.append((v, w, p, q))
        return out

    @cached_property
    def distances(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(_bfs_distances(self, s)) for s in self.nodes)

    @cached_property
    def diameter(self) -> int:
        return max(max(row) for row in self.distances)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [{"u": u, "v": v, "pu": pu, "pv": pv} for u, v, pu, pv in self.edges()],
        }

    def digest(self) -> str:
        """Short stable fingerprint of the labeled structure."""
        import hashlib

        blob = json.dumps(self.ports, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class Path:
    start: int
    ports: tuple[int, ...]
    nodes: tuple[int, ...] = field(compare=False)

    def __len__(self) -> int:
        return len(self.ports)

    @property
    def end(self) -> int:
        return self.nodes[-1]

    @classmethod
    def follow(cls, g: PortLabeledGraph, start: int, ports: Sequence[int]) -> "Path":
        nodes = [start]
        v = start
        for p in ports:
            v, _ = neighbor_via_port(g, v, p)
            nodes.append(v)
        return cls(start, tuple(ports), tuple(nodes))

    def sub(self, i: int, j: int) -> "Path":
        """The stretch from ``nodes[i]`` to ``nodes[j]`` (``i <= j``)."""
        return Path(self.nodes[i], self.ports[i:j], self.nodes[i : j + 1])


def build_graph(edge_spec: Iterable[Edge], n: int) -> PortLabeledGraph:
    """Validate ``(u, v, port_at_u, port_at_v)`` tuples into a graph."""
    if n < 1:
        raise GraphError(f"node count must be positive, got {n}")
    slots: list[dict[int, tuple[int, int]]] = [{} for _ in range(n)]
    seen: set[frozenset[int]] = set()
    for u, v, pu, pv in edge_spec:
        for node in (u, v):
            if not 0 <= node < n:
                raise BadNode(f"node {node} outside 0..{n - 1}")
        if u == v:
            raise SelfLoop(f"self-loop at node {u}")
        key = frozenset((u, v))
        if key in seen:
            raise DuplicateEdge(f"parallel edge between {u} and {v}")
        seen.add(key)
        for node, port, other, back in ((u, pu, v, pv), (v, pv, u, pu)):
            if port < 0:
                raise PortGap(f"negative port {port} at node {node}")
            if port in slots[node]:
                raise PortClash(f"port {port} used twice at node {node}")
            slots[node][port] = (other, back)
    for v, row in enumerate(slots):
        if sorted(row) != list(range(len(row))):
            missing = sorted(set(range(len(row))) - set(row))
            raise PortGap(f"ports at node {v} are {sorted(row)}; missing {missing}")
    g = PortLabeledGraph(tuple(tuple(row[p] for p in range(len(row))) for row in slots))
    if n > 1 and any(len(row) == 0 for row in slots):
        raise Disconnected(f"node {next(v for v, r in enumerate(slots) if not r)} is isolated")
    if any(d < 0 for d in _bfs_distances(g, 0)):
        unreached = [v for v, d in enumerate(_bfs_distances(g, 0)) if d < 0]
        raise Disconnected(f"nodes {unreached} unreachable from node 0")
    return g


def from_adjacency(adj: Sequence[Sequence[int]]) -> PortLabeledGraph:
    """Graph whose port ``p`` at ``v`` leads to ``adj[v][p]``."""
    edges = []
    for v, row in enumerate(adj):
        for p, w in enumerate(row):
            if v < w:
                edges.append((v, w, p, list(adj[w]).index(v)))
    return build_graph(edges, len(adj))


def neighbor_via_port(g: PortLabeledGraph, v: int, p: int) -> tuple[int, int]:
    row = g.ports[v]
    if not 0 <= p < len(row):
        raise BadPort(f"port {p} does not exist at node {v} (degree {len(row)})")
    return row[p]


def _bfs_distances(g: PortLabeledGraph, s: int, forbidden: frozenset[int] = frozenset()) -> list[int]:
    dist = [-1] * g.n
    dist[s] = 0
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for w, _ in g.ports[v]:
            if dist[w] < 0 and w not in forbidden:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def distance(g: PortLabeledGraph, a: int, b: int) -> int:
    return g.distances[a][b]


def min_lex_shortest_path(
    g: PortLabeledGraph, a: int, b: int, forbidden: Iterable[int] = ()
) -> Path:
    """Shortest ``a -> b`` path with the lexicographically smallest port sequence.

    Only paths of globally shortest length count; if every one of them touches
    ``forbidden`` this raises :class:`NoAvoidingPath`.
    """
    banned = frozenset(forbidden) - {a, b}
    full = g.distances[a][b]
    if full < 0:
        raise Unreachable(f"{b} unreachable from {a}")
    to_b = _bfs_distances(g, b, banned) if banned else list(g.distances[b])
    if to_b[a] != full:
        raise NoAvoidingPath(f"every shortest path {a}->{b} meets {sorted(banned)}")
    ports: list[int] = []
    nodes = [a]
    v = a
    while v != b:
        for p, (w, _) in enumerate(g.ports[v]):
            if w not in banned and to_b[w] == to_b[v] - 1:
                ports.append(p)
                nodes.append(w)
                v = w
                break
    return Path(a, tuple(ports), tuple(nodes))


def on_every_shortest_path(g: PortLabeledGraph, a: int, b: int, w: int) -> bool:
    if w in (a, b):
        return True
    d = g.distances
    if d[a][w] + d[w][b] != d[a][b]:
        return False
    return _bfs_distances(g, a, frozenset((w,)))[b] != d[a][b]


def all_shortest_paths(g: PortLabeledGraph, a: int, b: int) -> Iterator[Path]:
    """Every shortest ``a -> b`` path, by exhaustive walk enumeration."""
    target = g.distances[a][b]

    def extend(v: int, ports: list[int], nodes: list[int]) -> Iterator[Path]:
        if len(ports) == target:
            if v == b:
                yield Path(a, tuple(ports), tuple(nodes))
            return
        for p, (w, _) in enumerate(g.ports[v]):
            if w not in nodes:
                yield from extend(w, ports + [p], nodes + [w])

    yield from extend(a, [], [a])


def is_bipartite(g: PortLabeledGraph) -> tuple[frozenset[int], frozenset[int]] | None:
    side = [-1] * g.n
    side[0] = 0
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w, _ in g.ports[v]:
            if side[w] < 0:
                side[w] = 1 - side[v]
                queue.append(w)
            elif side[w] == side[v]:
                return None
    return (
        frozenset(v for v in g.nodes if side[v] == 0),
        frozenset(v for v in g.nodes if side[v] == 1),
    )


def load_graph(path: str | FsPath) -> PortLabeledGraph:
    with open(path) as fh:
        data = json.load(fh)
    return graph_from_dict(data)


def graph_from_dict(data: dict) -> PortLabeledGraph:
    try:
        n = int(data["n"])
        edges = [(int(e["u"]), int(e["v"]), int(e["pu"]), int(e["pv"])) for e in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"graph file must hold 'n' and 'edges' of {{u, v, pu, pv}}: {exc}") from exc
    return build_graph(edges, n)


def save_graph(g: PortLabeledGraph, path: str | FsPath) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_dict(), fh, indent=1)
        fh.write("\n")
