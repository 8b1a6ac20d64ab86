"""Universal exploration sequences: application, exhaustive certification, and lookup.

Following offset ``s`` from a node entered by port ``q`` means leaving by port
``(q + s) mod deg``. The very first step treats the entry port as 0.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path as FsPath
from typing import Sequence

from .anon_bfs import ExplosionCap
from .generators import all_port_labeled_graphs, count_port_labeled_graphs
from .graph import PortLabeledGraph


class NoCertifiedSequence(LookupError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class SequenceFormatError(ValueError):
    pass


BRUTE_FORCE = "brute_force"
ON_INSTANCE = "verified_on_instance"
UNCERTIFIED = "uncertified"


@dataclass(frozen=True)
class Certificate:
    kind: str
    n_max: int | None = None
    graph_digest: str | None = None
    seed: int | None = None

    def describe(self) -> str:
        if self.kind == BRUTE_FORCE:
            return f"{BRUTE_FORCE} n_max={self.n_max}"
        if self.kind == ON_INSTANCE:
            return f"{ON_INSTANCE} graph={self.graph_digest}"
        return UNCERTIFIED


@dataclass(frozen=True)
class ExplorationSequence:
    n: int
    offsets: tuple[int, ...]
    certificate: Certificate = Certificate(UNCERTIFIED)

    def __post_init__(self) -> None:
        if len(self.offsets) < 1:
            raise ValueError("an exploration sequence needs at least one offset")
        if any(s < 0 for s in self.offsets):
            raise ValueError("offsets must be non-negative")

    def __len__(self) -> int:
        return len(self.offsets)


def apply_uxs(g: PortLabeledGraph, start: int, offsets: Sequence[int]) -> tuple[int, ...]:
    trace = [start]
    v, entry = start, 0
    for s in offsets:
        v, entry = g.ports[v][(entry + s) % len(g.ports[v])]
        trace.append(v)
    return tuple(trace)


def covers(g: PortLabeledGraph, start: int, offsets: Sequence[int]) -> bool:
    return len(set(apply_uxs(g, start, offsets))) == g.n


@dataclass(frozen=True)
class UniversalityResult:
    ok: bool
    graphs_checked: int
    counterexample: tuple[PortLabeledGraph, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_universal(
    offsets: Sequence[int], n_max: int, n_min: int = 2, cap: int = 200_000
) -> UniversalityResult:
    """Check coverage from every start of every connected port-labeled graph of size n_min..n_max."""
    total = count_port_labeled_graphs(n_max, n_min)
    if total > cap:
        raise ExplosionCap(f"{total} port-labeled graphs up to n={n_max} exceed the cap {cap}")
    checked = 0
    for g in all_port_labeled_graphs(n_max, n_min):
        checked += 1
        for s in g.nodes:
            if not covers(g, s, offsets):
                return UniversalityResult(False, checked, (g, s))
    return UniversalityResult(True, checked)


def verify_on_instance(g: PortLabeledGraph, offsets: Sequence[int]) -> bool:
    return all(covers(g, s, offsets) for s in g.nodes)


# sequence files


def format_sequence(seq: ExplorationSequence) -> str:
    c = seq.certificate
    lines = [f"n {seq.n}", f"certificate {c.describe()}"]
    if c.seed is not None:
        lines.append(f"seed {c.seed}")
    lines.append("offsets " + " ".join(map(str, seq.offsets)))
    return "\n".join(lines) + "\n"


def parse_sequence(text: str) -> ExplorationSequence:
    fields: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        fields[key] = rest.strip()
    try:
        n = int(fields["n"])
        offsets = tuple(int(t) for t in fields["offsets"].split())
    except (KeyError, ValueError) as exc:
        raise SequenceFormatError(f"sequence file needs 'n' and 'offsets' lines: {exc}") from exc
    cert = Certificate(UNCERTIFIED)
    words = fields.get("certificate", UNCERTIFIED).split()
    seed = int(fields["seed"]) if "seed" in fields else None
    if words and words[0] == BRUTE_FORCE:
        cert = Certificate(BRUTE_FORCE, n_max=int(words[1].split("=")[1]), seed=seed)
    elif words and words[0] == ON_INSTANCE:
        cert = Certificate(ON_INSTANCE, graph_digest=words[1].split("=")[1], seed=seed)
    elif seed is not None:
        cert = Certificate(UNCERTIFIED, seed=seed)
    try:
        return ExplorationSequence(n, offsets, cert)
    except ValueError as exc:
        raise SequenceFormatError(str(exc)) from exc


def load_sequence(path: str | FsPath) -> ExplorationSequence:
    return parse_sequence(FsPath(path).read_text())


def save_sequence(seq: ExplorationSequence, path: str | FsPath) -> None:
    FsPath(path).write_text(format_sequence(seq))


# providers

CERTIFIED_MAX_N = 4


def certified_sequence(n: int) -> ExplorationSequence:
    if not 2 <= n <= CERTIFIED_MAX_N:
        raise NoCertifiedSequence(f"no certified sequence shipped for n={n} (have 2..{CERTIFIED_MAX_N})")
    text = resources.files("pebblex.data").joinpath(f"uxs_n{n}.txt").read_text()
    return parse_sequence(text)


@dataclass(frozen=True)
class Certified:
    pass


@dataclass(frozen=True)
class Randomized:
    seed: int = 0
    budget: int = 50
    scale: int = 1  # length = scale * n**3
    graph: PortLabeledGraph | None = None


def random_offsets(n: int, length: int, rng: random.Random) -> tuple[int, ...]:
    return tuple(rng.randrange(max(1, n - 1)) for _ in range(length))


def uxs_for(n: int, strategy: Certified | Randomized = Certified()) -> ExplorationSequence:
    if n < 2:
        raise ValueError(f"exploration sequences need n >= 2, got {n}")
    if isinstance(strategy, Certified):
        return certified_sequence(n)
    if strategy.graph is None:
        raise ValueError("the randomized provider verifies against a concrete graph")
    g = strategy.graph
    if g.n != n:
        raise ValueError(f"graph has {g.n} nodes, sequence requested for n={n}")
    rng = random.Random(strategy.seed)
    length = max(1, strategy.scale * n**3)
    for _ in range(strategy.budget):
        offsets = random_offsets(n, length, rng)
        if verify_on_instance(g, offsets):
            return ExplorationSequence(
                n, offsets, Certificate(ON_INSTANCE, graph_digest=g.digest(), seed=strategy.seed)
            )
    raise BudgetExceeded(f"{strategy.budget} random sequences of length {length} all failed on this graph")
