"""Machine checks: the class-G impossibility sweep, trace audits, and bulk instance sweeps."""
from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .agents import STAY, TERMINATE, AgentProgram, GeneralAgent, Program, move
from .anon_bfs import InvariantBreach, z_node
from .generators import all_port_labeled_graphs, random_bipartite_graph, random_graph
from .graph import PortLabeledGraph, build_graph, graph_from_dict, is_bipartite
from .placement import (
    PebbleAssignment,
    Placement,
    place_pebbles_bipartite,
    place_pebbles_general,
)
from .sim import Outcome, SimulationConfig, SimulationTrace, WakeupSchedule, run
from .uxs import Certified, ExplorationSequence, Randomized, uxs_for


class SweepEscape(AssertionError):
    """Some decision combination avoided every collision and coverage witness."""


# ---------------------------------------------------------------- class G

X, XP, Y, YP = 0, 1, 2, 3  # x, x', y, y'


def class_G() -> list[tuple[PortLabeledGraph, int, int]]:
    """G_0, G_1, G_2 with agents at x=0 and y=2; in G_i the chord x-y sits on port i."""
    out = []
    for i in range(3):
        slot = {XP: 0, YP: 1, "chord": 2}  # same local labels at x and at y
        swap = {2: i, i: 2}
        slot = {k: swap.get(v, v) for k, v in slot.items()}
        spec = [
            (X, XP, slot[XP], 0),
            (Y, XP, slot[XP], 1),
            (Y, YP, slot[YP], 0),
            (X, YP, slot[YP], 1),
            (X, Y, slot["chord"], slot["chord"]),
        ]
        out.append((build_graph(spec, 4), X, Y))
    return out


@dataclass(frozen=True)
class DecisionSpec:
    port: int | None = None  # None: never move
    t: int = 0

    def __str__(self) -> str:
        return "Nevermove" if self.port is None else f"Move({self.port},{self.t})"


NEVERMOVE = DecisionSpec()


def decisions(T: int) -> list[DecisionSpec]:
    return [NEVERMOVE] + [DecisionSpec(i, t) for i in range(3) for t in range(1, T + 1)]


class DecisionAgent(AgentProgram):
    """Acts on one decision: wait until local round t, take port i once, stop."""

    mode = "decision"

    def __init__(self, n: int, decision: DecisionSpec):
        super().__init__(n)
        self.decision = decision

    def _main(self) -> Program:
        d = self.decision
        self.phase = "decided"
        if d.port is not None:
            while self.per.local_round < d.t:
                yield STAY
            yield move(d.port)
        yield TERMINATE


@dataclass(frozen=True)
class Witness:
    graph_index: int
    wake: tuple[int, int]
    kind: str  # collision | coverage
    round: int
    robust: bool  # holds for any continuation after the first move


@dataclass
class ImpossibilityReport:
    T: int
    offsets: tuple[int, ...]
    combos: int = 0
    refuted: int = 0
    robust: int = 0
    survivors: list[tuple[tuple[int, int], DecisionSpec, DecisionSpec]] = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.refuted == self.combos and not self.survivors

    def summary(self) -> str:
        verdict = "all G combinations refuted" if self.ok else f"{len(self.survivors)} combinations survive"
        return (
            f"{verdict}: {self.refuted}/{self.combos} refuted, {self.robust} by first-move witnesses "
            f"(T={self.T}, offsets={list(self.offsets)}, {self.seconds:.2f}s)"
        )


def _witness(g_idx: int, g: PortLabeledGraph, dx: DecisionSpec, dy: DecisionSpec, wake) -> Witness | None:
    ds = (dx, dy)
    cfg = SimulationConfig(g, PebbleAssignment(), (X, Y), WakeupSchedule(*wake), max_rounds=100)
    trace, out = run(cfg, lambda c, i: DecisionAgent(g.n, ds[i]))
    if out.kind == "collision":
        # after its single move an agent's later behaviour is unconstrained
        robust = all(d.port is None or out.rounds <= wake[i] + d.t - 1 for i, d in enumerate(ds))
        return Witness(g_idx, wake, "collision", out.rounds, robust)
    if out.kind == "incomplete_coverage":
        robust = dx.port is None and dy.port is None
        return Witness(g_idx, wake, "coverage", out.rounds, robust)
    return None


def impossibility_sweep(T: int = 6, offsets: Sequence[int] = (0, 1), strict: bool = False) -> ImpossibilityReport:
    if T < 3:
        raise ValueError("T must be at least 3")
    if not {0, 1} <= set(offsets):
        raise ValueError("offsets must include 0 and 1")
    start = time.perf_counter()
    graphs = class_G()
    wakes = sorted({w for o in offsets for w in ((1, 1 + o), (1 + o, 1))})
    rep = ImpossibilityReport(T, tuple(offsets))
    # decisions act only on the start node's pebble, so the pebble pattern never changes a run
    cache: dict[tuple[DecisionSpec, DecisionSpec], list[Witness]] = {}
    for dx, dy in itertools.product(decisions(T), repeat=2):
        found = []
        for gi, (g, _, _) in enumerate(graphs):
            for w in wakes:
                wit = _witness(gi, g, dx, dy, w)
                if wit is not None:
                    found.append(wit)
        cache[(dx, dy)] = found
    for pattern in itertools.product((0, 1), repeat=2):
        for dx, dy in itertools.product(decisions(T), repeat=2):
            rep.combos += 1
            found = cache[(dx, dy)]
            if found:
                rep.refuted += 1
                best = next((w for w in found if w.robust), found[0])
                rep.robust += best.robust
                rep.witnesses[(pattern, str(dx), str(dy))] = best
            else:
                rep.survivors.append((pattern, dx, dy))
    rep.seconds = time.perf_counter() - start
    if strict and rep.survivors:
        raise SweepEscape(f"{rep.survivors[0]} escapes every graph and offset")
    return rep


# ---------------------------------------------------------------- lemma check


def lemma41_check(g: PortLabeledGraph, x: int, y: int) -> bool:
    """x and y can not each sit on the other's shortest route to its last-visited node."""
    if x == y:
        raise ValueError("x and y must differ")
    d = g.distances
    zx, zy = z_node(g, x), z_node(g, y)
    return not (d[y][zx] == d[y][x] + d[x][zx] and d[x][zy] == d[x][y] + d[y][zy])


# ---------------------------------------------------------------- trace audit

PHASE3 = frozenset({"return_back", "move_to_z"})


@dataclass
class VerificationReport:
    instance: str
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]


def _phases(trace: SimulationTrace, agent: int) -> list[str]:
    return [e.agents[agent].phase for e in trace.events]


def check_trace(
    trace: SimulationTrace,
    g: PortLabeledGraph,
    mode: str,
    placement: Placement | None = None,
    wake: WakeupSchedule | None = None,
    uxs_length: int | None = None,
    bound_constant: float = 3.0,
    instance: str = "",
) -> VerificationReport:
    """Recompute safety, coverage and timing predicates from positions and phase labels."""
    rep = VerificationReport(instance)
    n = g.n
    pos = [trace.positions(0), trace.positions(1)]
    rounds = len(trace.events)

    moves_ok = all(
        a == b or g.adjacent(a, b) for p in pos for a, b in zip(p, p[1:])
    )
    frozen_ok = True
    for i in (0, 1):
        for k, e in enumerate(trace.events):
            before = pos[i][k]
            snap = e.agents[i]
            if (not snap.awake or (snap.terminated and snap.action is None)) and snap.position != before:
                frozen_ok = False
    rep.checks["well_formed"] = moves_ok and frozen_ok

    clash = [k for k in range(1, rounds + 1) if pos[0][k] == pos[1][k]]
    rep.checks["collision_free"] = not clash and pos[0][0] != pos[1][0]
    if clash:
        rep.details["collision"] = (clash[0], pos[0][clash[0]])
    rep.checks["flags_agree"] = [k for k, e in enumerate(trace.events, 1) if e.collision] == clash

    seen = [set(p) for p in pos]
    everything = set(g.nodes)
    rep.checks["union_coverage"] = seen[0] | seen[1] == everything
    if mode == "bipartite" and n > 2:
        rep.checks["per_agent_coverage"] = seen[0] == everything and seen[1] == everything
    last = trace.events[-1] if trace.events else None
    rep.checks["termination"] = last is not None and all(a.terminated for a in last.agents)

    if mode == "general" and placement is not None:
        _general_checks(rep, trace, g, placement, pos)
    if mode == "bipartite":
        _bipartite_checks(rep, trace, g, pos, wake, uxs_length, bound_constant)
    return rep


def _general_checks(rep, trace, g, placement, pos) -> None:
    n = g.n
    roles = placement.roles
    starts = trace.starts
    if roles.y not in starts:
        return
    ini = starts.index(roles.y)
    wai = 1 - ini
    ph_i, ph_w = _phases(trace, ini), _phases(trace, wai)
    notify = [k for k, p in enumerate(ph_i, 1) if p == "notify_agent"]
    term = next((k for k, e in enumerate(trace.events, 1) if e.agents[ini].terminated), None)
    if notify and term is not None:
        span = term - notify[-1]
        rep.details["phase3_span"] = span
        rep.checks["phase3_within_7n"] = span <= 7 * n
        explore = next((k for k, p in enumerate(ph_w, 1) if p == "explore"), None)
        rep.checks["phase3_before_phase4"] = explore is None or term < explore
    dec = placement.decomposition
    if dec is not None and rep.checks.get("termination"):
        rep.checks["initiator_at_z"] = pos[ini][-1] == dec.z
        rep.checks["waiter_at_z_prime"] = pos[wai][-1] == dec.z_prime


def _bipartite_checks(rep, trace, g, pos, wake, uxs_length, c) -> None:
    sides = is_bipartite(g)
    if sides is None:
        rep.checks["bipartite_input"] = False
        return
    side = {v: 0 for v in sides[0]} | {v: 1 for v in sides[1]}
    starts = []
    for i in (0, 1):
        ph = _phases(trace, i)
        starts.append(next((k for k, p in enumerate(ph, 1) if p == "uxs"), None))
    if None in starts:
        if g.n > 2:
            rep.checks["uxs_reached"] = False
        return
    rep.details["uxs_start"] = tuple(starts)
    rep.checks["uxs_aligned"] = starts[0] == starts[1]
    first = min(starts)
    rep.checks["parity"] = all(
        side[pos[0][k]] != side[pos[1][k]] for k in range(first - 1, len(pos[0]))
    )
    if wake is not None and uxs_length is not None:
        budget = g.n**2 + uxs_length
        used = len(trace.events) - max(wake.w1, wake.w2)
        rep.details["bound_ratio"] = used / budget
        rep.checks["bound_ok"] = used <= c * budget


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class Instance:
    graph: dict
    starts: tuple[int, int]
    wake: tuple[int, int]
    mode: str
    uxs: tuple[int, ...] | None = None
    literal: bool = False

    def config(self) -> tuple[SimulationConfig, Placement]:
        g = graph_from_dict(self.graph)
        a, b = self.starts
        if self.mode == "bipartite":
            pl = place_pebbles_bipartite(g, a, b)
            seq = ExplorationSequence(g.n, self.uxs)
        else:
            pl = place_pebbles_general(g, a, b)
            seq = None
        return SimulationConfig(g, pl.pebbles, self.starts, WakeupSchedule(*self.wake), self.mode, seq), pl


@dataclass
class RunResult:
    instance: Instance
    outcome: str
    failed: list[str]
    flagged: str | None
    details: dict

    @property
    def ok(self) -> bool:
        return not self.failed and self.outcome == "success"


def run_instance(inst: Instance, bound_constant: float = 3.0) -> RunResult:
    try:
        cfg, pl = inst.config()
    except InvariantBreach as exc:
        return RunResult(inst, "placement_breach", ["placement"], None, {"error": str(exc)})
    factory = None
    if inst.literal and inst.mode == "general":
        factory = lambda c, i: GeneralAgent(c.graph.n, literal=True)  # noqa: E731
    trace, out = run(cfg, factory) if factory else run(cfg)
    flag = None
    dec = pl.decomposition
    if inst.mode == "general" and dec is not None and dec.z_prime == pl.roles.x:
        flag = "z_prime_is_x"
    rep = check_trace(
        trace,
        cfg.graph,
        inst.mode,
        pl,
        cfg.wake,
        len(inst.uxs) if inst.uxs else None,
        bound_constant,
    )
    failed = rep.failed()
    if out.kind != "success" and "outcome" not in failed:
        failed = failed + [f"outcome:{out.kind}"]
    details = dict(rep.details)
    details["rounds"] = out.rounds
    details["exploration_time"] = out.exploration_time
    details["summary"] = out.summary()
    details["case"] = pl.case
    return RunResult(inst, out.kind, failed, flag, details)


def wake_pairs(offsets: Iterable[int]) -> list[tuple[int, int]]:
    return sorted({w for o in offsets for w in ((1, 1 + o), (1 + o, 1))})


def general_offsets(n: int) -> tuple[int, ...]:
    return (0, 1, 2, 2 * n + 3)


def bipartite_offsets(n: int) -> tuple[int, ...]:
    return (0, 1, 2 * n + 3)


def exhaustive_general(n_max: int, n_min: int = 2, literal: bool = False) -> Iterator[Instance]:
    for g in all_port_labeled_graphs(n_max, n_min):
        gd = g.to_dict()
        for a, b in itertools.permutations(g.nodes, 2):
            for w in wake_pairs(general_offsets(g.n)):
                yield Instance(gd, (a, b), w, "general", literal=literal)


def random_general(count: int, seed: int, n_lo: int = 5, n_hi: int = 9, literal: bool = False) -> Iterator[Instance]:
    """``count`` random (graph, start pair) draws, each run under every wake pair."""
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(n_lo, n_hi)
        g = random_graph(n, rng.randint(0, n), rng)
        a, b = rng.sample(range(n), 2)
        gd = g.to_dict()
        for w in wake_pairs(general_offsets(n)):
            yield Instance(gd, (a, b), w, "general", literal=literal)


def sequence_for(g: PortLabeledGraph, seed: int) -> ExplorationSequence:
    if g.n <= 4:
        return uxs_for(g.n, Certified())
    return uxs_for(g.n, Randomized(seed=seed, graph=g))


def random_bipartite(count: int, seed: int, n_lo: int = 3, n_hi: int = 8) -> Iterator[Instance]:
    """``count`` random bipartite graphs, each with every ordered start pair and wake pair."""
    rng = random.Random(seed)
    for k in range(count):
        n = rng.randint(n_lo, n_hi)
        g = random_bipartite_graph(n, rng.randint(0, n), rng)
        seq = sequence_for(g, seed * 100_003 + k)
        gd = g.to_dict()
        for a, b in itertools.permutations(range(n), 2):
            for w in wake_pairs(bipartite_offsets(n)):
                yield Instance(gd, (a, b), w, "bipartite", seq.offsets)


@dataclass
class SweepReport:
    mode: str
    runs: int = 0
    passed: int = 0
    failures: list[RunResult] = field(default_factory=list)
    flagged: dict[str, int] = field(default_factory=dict)
    flagged_examples: dict[str, Instance] = field(default_factory=dict)
    flagged_outcomes: dict[str, int] = field(default_factory=dict)
    max_phase3_span_ratio: float = 0.0
    max_bound_ratio: float = 0.0
    max_exploration_time: int = 0
    seconds: float = 0.0

    def add(self, r: RunResult) -> None:
        self.runs += 1
        d = r.details
        if r.flagged and not r.ok:
            self.flagged[r.flagged] = self.flagged.get(r.flagged, 0) + 1
            self.flagged_examples.setdefault(r.flagged, r.instance)
            self.flagged_outcomes[r.outcome] = self.flagged_outcomes.get(r.outcome, 0) + 1
            return
        if r.ok:
            self.passed += 1
        else:
            self.failures.append(r)
        n = r.instance.graph["n"]
        if "phase3_span" in d:
            self.max_phase3_span_ratio = max(self.max_phase3_span_ratio, d["phase3_span"] / n)
        if "bound_ratio" in d:
            self.max_bound_ratio = max(self.max_bound_ratio, d["bound_ratio"])
        if d.get("exploration_time"):
            self.max_exploration_time = max(self.max_exploration_time, d["exploration_time"])

    def merge(self, other: "SweepReport") -> "SweepReport":
        out = SweepReport(self.mode)
        out.runs = self.runs + other.runs
        out.passed = self.passed + other.passed
        out.failures = self.failures + other.failures
        out.flagged = {k: self.flagged.get(k, 0) + other.flagged.get(k, 0) for k in self.flagged | other.flagged}
        out.flagged_examples = {**other.flagged_examples, **self.flagged_examples}
        out.flagged_outcomes = {
            k: self.flagged_outcomes.get(k, 0) + other.flagged_outcomes.get(k, 0)
            for k in self.flagged_outcomes | other.flagged_outcomes
        }
        out.max_phase3_span_ratio = max(self.max_phase3_span_ratio, other.max_phase3_span_ratio)
        out.max_bound_ratio = max(self.max_bound_ratio, other.max_bound_ratio)
        out.max_exploration_time = max(self.max_exploration_time, other.max_exploration_time)
        out.seconds = self.seconds + other.seconds
        return out

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        flagged = sum(self.flagged.values())
        parts = [
            f"{self.mode}: {self.passed}/{self.runs - flagged} passed",
            f"{len(self.failures)} failed",
            f"{flagged} flagged {dict(sorted(self.flagged.items()))}",
        ]
        if self.flagged_outcomes:
            parts.append(f"flagged outcomes {dict(sorted(self.flagged_outcomes.items()))}")
        if self.max_phase3_span_ratio:
            parts.append(f"max phase-3 span {self.max_phase3_span_ratio:.2f}n")
        if self.max_bound_ratio:
            parts.append(f"measured constant {self.max_bound_ratio:.3f}")
        return ", ".join(parts)


def _run_chunk(args: tuple[list[Instance], str, float]) -> SweepReport:
    chunk, mode, c = args
    rep = SweepReport(mode)
    for inst in chunk:
        rep.add(run_instance(inst, c))
    return rep


def sweep(
    instances: Iterable[Instance], mode: str, jobs: int = 1, bound_constant: float = 3.0, chunk: int = 500
) -> SweepReport:
    start = time.perf_counter()
    if jobs <= 1:
        rep = _run_chunk((list(instances), mode, bound_constant))
    else:
        batches = []
        buf: list[Instance] = []
        for inst in instances:
            buf.append(inst)
            if len(buf) == chunk:
                batches.append((buf, mode, bound_constant))
                buf = []
        if buf:
            batches.append((buf, mode, bound_constant))
        rep = SweepReport(mode)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_run_chunk, batches):
                rep = rep.merge(part)
    rep.seconds = time.perf_counter() - start
    return rep


def replay(inst: Instance) -> tuple[SimulationTrace, Outcome]:
    cfg, _ = inst.config()
    if inst.literal and inst.mode == "general":
        return run(cfg, lambda c, i: GeneralAgent(c.graph.n, literal=True))
    return run(cfg)
