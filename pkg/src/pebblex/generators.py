"""Instance generators: seeded random graphs and exhaustive small-graph enumeration."""
from __future__ import annotations

import itertools
import random
from typing import Iterator

import networkx as nx

from .graph import PortLabeledGraph, from_adjacency


def random_port_labeling(adj: list[list[int]], rng: random.Random) -> PortLabeledGraph:
    rows = [list(row) for row in adj]
    for row in rows:
        rng.shuffle(row)
    return from_adjacency(rows)


def random_graph(n: int, extra_edges: int, rng: random.Random) -> PortLabeledGraph:
    """Uniform spanning tree plus ``extra_edges`` random chords, random ports."""
    adj = uniform_tree(n, rng)
    missing = [(a, b) for a in range(n) for b in range(a + 1, n) if b not in adj[a]]
    for a, b in rng.sample(missing, min(extra_edges, len(missing))):
        adj[a].add(b)
        adj[b].add(a)
    return random_port_labeling([sorted(s) for s in adj], rng)


def random_bipartite_graph(n: int, extra_edges: int, rng: random.Random) -> PortLabeledGraph:
    """Connected bipartite graph: random tree (always bipartite) plus cross-class chords."""
    if n < 2:
        raise ValueError("bipartite instances need n >= 2")
    adj = uniform_tree(n, rng)
    side = _two_colour(adj)
    missing = [
        (a, b) for a in range(n) for b in range(a + 1, n) if side[a] != side[b] and b not in adj[a]
    ]
    for a, b in rng.sample(missing, min(extra_edges, len(missing))):
        adj[a].add(b)
        adj[b].add(a)
    return random_port_labeling([sorted(s) for s in adj], rng)


def uniform_tree(n: int, rng: random.Random) -> list[set[int]]:
    """Uniformly random labeled tree (a uniform spanning tree of K_n)."""
    adj: list[set[int]] = [set() for _ in range(n)]
    if n == 2:
        adj[0].add(1)
        adj[1].add(0)
    elif n > 2:
        tree = nx.from_prufer_sequence([rng.randrange(n) for _ in range(n - 2)])
        for a, b in tree.edges():
            adj[a].add(b)
            adj[b].add(a)
    return adj


def _two_colour(adj: list[set[int]]) -> list[int]:
    side = [-1] * len(adj)
    side[0] = 0
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if side[w] < 0:
                side[w] = 1 - side[v]
                stack.append(w)
    return side


def connected_shapes(n_max: int, n_min: int = 2) -> Iterator[list[list[int]]]:
    """One adjacency list per isomorphism class of connected simple graphs."""
    if n_max > 7:
        raise ValueError("the graph atlas only covers n <= 7")
    for h in nx.graph_atlas_g():
        k = h.number_of_nodes()
        if n_min <= k <= n_max and nx.is_connected(h):
            yield [sorted(h.neighbors(v)) for v in range(k)]


def port_labelings(adj: list[list[int]]) -> Iterator[PortLabeledGraph]:
    """Every port labeling of a fixed simple graph."""
    for rows in itertools.product(*(itertools.permutations(row) for row in adj)):
        yield from_adjacency(rows)


def all_port_labeled_graphs(n_max: int, n_min: int = 2) -> Iterator[PortLabeledGraph]:
    """All connected port-labeled graphs with ``n_min..n_max`` nodes, up to node renaming."""
    for adj in connected_shapes(n_max, n_min):
        yield from port_labelings(adj)


def count_port_labeled_graphs(n_max: int, n_min: int = 2) -> int:
    total = 0
    for adj in connected_shapes(n_max, n_min):
        c = 1
        for row in adj:
            for k in range(2, len(row) + 1):
                c *= k
        total += c
    return total
