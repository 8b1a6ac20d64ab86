"""Synchronous two-agent simulator with adversarial wake-up times."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence, TextIO

from .agents import AgentAction, AgentPerception, AgentProgram, BipartiteAgent, GeneralAgent, IllegalState
from .graph import PortLabeledGraph
from .placement import PebbleAssignment, PebbleColor, validate_placement
from .uxs import ExplorationSequence


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WakeupSchedule:
    w1: int = 1
    w2: int = 1

    def __post_init__(self) -> None:
        if self.w1 < 1 or self.w2 < 1:
            raise ConfigError(f"wake-up rounds must be >= 1, got ({self.w1}, {self.w2})")

    def __getitem__(self, i: int) -> int:
        return (self.w1, self.w2)[i]

    def shifted(self, delta: int) -> "WakeupSchedule":
        return WakeupSchedule(self.w1 + delta, self.w2 + delta)


def default_max_rounds(g: PortLabeledGraph) -> int:
    n = g.n
    return 10 * (n * g.max_degree**g.diameter + 20 * n)


@dataclass
class SimulationConfig:
    graph: PortLabeledGraph
    pebbles: PebbleAssignment
    starts: tuple[int, int]
    wake: WakeupSchedule = WakeupSchedule()
    mode: str = "general"
    uxs: ExplorationSequence | None = None
    max_rounds: int | None = None

    def __post_init__(self) -> None:
        a, b = self.starts
        for s in (a, b):
            if not 0 <= s < self.graph.n:
                raise ConfigError(f"start node {s} outside 0..{self.graph.n - 1}")
        if a == b:
            raise ConfigError(f"agents cannot share start node {a}")
        if self.mode not in ("general", "bipartite"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        diag = validate_placement(self.pebbles, self.mode)
        if not diag.ok:
            raise ConfigError("; ".join(diag.problems))
        if self.mode == "bipartite" and self.uxs is None:
            raise ConfigError("bipartite mode needs an exploration sequence")

    def round_limit(self) -> int:
        if self.max_rounds is not None:
            return self.max_rounds
        extra = len(self.uxs) if self.uxs is not None else 0
        return default_max_rounds(self.graph) + max(self.wake.w1, self.wake.w2) + extra


@dataclass(frozen=True)
class AgentSnapshot:
    position: int  # end of round
    awake: bool
    terminated: bool
    local_round: int  # 0 while asleep
    perception: AgentPerception | None
    action: AgentAction | None
    phase: str

    def to_dict(self) -> dict:
        per = self.perception
        return {
            "pos": self.position,
            "awake": self.awake,
            "terminated": self.terminated,
            "local_round": self.local_round,
            "perception": None
            if per is None
            else {
                "degree": per.degree,
                "pebble": None if per.pebble is None else per.pebble.value,
                "adjacent": per.adjacent,
                "entry_port": per.entry_port,
            },
            "action": None if self.action is None else str(self.action),
            "phase": self.phase,
        }


@dataclass(frozen=True)
class TraceEvent:
    round: int
    agents: tuple[AgentSnapshot, AgentSnapshot]
    collision: bool
    swap: bool

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "agents": [a.to_dict() for a in self.agents],
            "collision": self.collision,
            "swap": self.swap,
        }


@dataclass
class SimulationTrace:
    starts: tuple[int, int]
    events: list[TraceEvent] = field(default_factory=list)

    def positions(self, agent: int) -> list[int]:
        """Position at the end of every round, prefixed by the start node."""
        return [self.starts[agent]] + [e.agents[agent].position for e in self.events]

    def to_ndjson(self, header: dict | None = None) -> str:
        lines = []
        if header is not None:
            lines.append(json.dumps({"header": header}, sort_keys=True))
        lines.extend(json.dumps(e.to_dict(), sort_keys=True) for e in self.events)
        return "\n".join(lines) + "\n"

    def write(self, fh: TextIO, header: dict | None = None) -> None:
        fh.write(self.to_ndjson(header))

    @classmethod
    def from_ndjson(cls, text: str) -> tuple["SimulationTrace", dict]:
        """Inverse of ``to_ndjson``; the header must carry ``starts``."""
        header: dict = {}
        events = []
        for k, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if "header" in rec:
                    header = rec["header"]
                    continue
                n = int(header.get("graph", {}).get("n", 0))
                agents = tuple(_snapshot_from_dict(a, n) for a in rec["agents"])
                events.append(TraceEvent(int(rec["round"]), agents, bool(rec["collision"]), bool(rec["swap"])))
            except (ValueError, KeyError, TypeError) as exc:
                raise TraceFormatError(f"line {k}: {exc}") from exc
        if "starts" not in header:
            raise TraceFormatError("trace header with 'starts' is required")
        return cls(tuple(header["starts"]), events), header


class TraceFormatError(ValueError):
    pass


def _parse_action(text: str | None) -> AgentAction | None:
    if text is None:
        return None
    if text in ("stay", "terminate"):
        return AgentAction(text)
    if text.startswith("move(") and text.endswith(")"):
        return AgentAction("move", int(text[5:-1]))
    raise ValueError(f"unknown action {text!r}")


def _snapshot_from_dict(d: dict, n: int) -> AgentSnapshot:
    per = d["perception"]
    if per is not None:
        per = AgentPerception(
            degree=per["degree"],
            pebble=None if per["pebble"] is None else PebbleColor(per["pebble"]),
            adjacent=per["adjacent"],
            entry_port=per["entry_port"],
            local_round=d["local_round"],
            n=n,
        )
    return AgentSnapshot(
        position=int(d["pos"]),
        awake=bool(d["awake"]),
        terminated=bool(d["terminated"]),
        local_round=int(d["local_round"]),
        perception=per,
        action=_parse_action(d["action"]),
        phase=str(d["phase"]),
    )


@dataclass(frozen=True)
class Outcome:
    kind: str  # success | incomplete_coverage | collision | timeout | illegal_state
    rounds: int  # global rounds simulated
    termination_rounds: tuple[int | None, int | None] = (None, None)  # global
    termination_local: tuple[int | None, int | None] = (None, None)
    coverage: tuple[frozenset[int], frozenset[int]] = (frozenset(), frozenset())
    collision_node: int | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.kind == "success"

    @property
    def exploration_time(self) -> int | None:
        if None in self.termination_local:
            return None
        return max(self.termination_local)

    def union_coverage(self) -> frozenset[int]:
        return self.coverage[0] | self.coverage[1]

    def summary(self) -> str:
        if self.kind == "success":
            return f"success exploration_time={self.exploration_time} global_rounds={self.rounds}"
        if self.kind == "collision":
            return f"collision round={self.rounds} node={self.collision_node}"
        if self.kind == "incomplete_coverage":
            missed = sorted(set(range(max(self.union_coverage()) + 1)) - self.union_coverage())
            return f"incomplete coverage after {self.rounds} rounds, unvisited among 0..max: {missed}"
        if self.kind == "timeout":
            return f"timeout after {self.rounds} rounds"
        return f"illegal_state round={self.rounds}: {self.detail}"


ProgramFactory = Callable[[SimulationConfig, int], AgentProgram]


def default_program(config: SimulationConfig, agent: int) -> AgentProgram:
    if config.mode == "bipartite":
        return BipartiteAgent(config.graph.n, config.uxs.offsets)
    return GeneralAgent(config.graph.n)


def sense_adjacent(g: PortLabeledGraph, positions: Sequence[int], agent: int) -> bool:
    return g.adjacent(positions[agent], positions[1 - agent])


@dataclass
class SimState:
    config: SimulationConfig
    programs: list[AgentProgram]
    positions: list[int]
    entry: list[int | None]
    terminated: list[bool]
    term_round: list[int | None]
    term_local: list[int | None]
    visited: list[set[int]]
    round: int = 0
    finished: bool = False


def initial_state(config: SimulationConfig, factory: ProgramFactory = default_program) -> SimState:
    return SimState(
        config=config,
        programs=[factory(config, 0), factory(config, 1)],
        positions=list(config.starts),
        entry=[None, None],
        terminated=[False, False],
        term_round=[None, None],
        term_local=[None, None],
        visited=[{config.starts[0]}, {config.starts[1]}],
    )


def step(state: SimState) -> TraceEvent:
    """Advance one global round. Raises IllegalState if an agent program does."""
    if state.finished:
        raise RuntimeError("simulation already finished")
    cfg, g = state.config, state.config.graph
    state.round += 1
    r = state.round
    before = list(state.positions)
    perceptions: list[AgentPerception | None] = [None, None]
    actions: list[AgentAction | None] = [None, None]
    for i in (0, 1):
        if r < cfg.wake[i] or state.terminated[i]:
            continue
        v = before[i]
        per = AgentPerception(
            degree=g.degree(v),
            pebble=cfg.pebbles.get(v),
            adjacent=sense_adjacent(g, before, i),
            entry_port=state.entry[i],
            local_round=r - cfg.wake[i] + 1,
            n=g.n,
        )
        perceptions[i] = per
        actions[i] = state.programs[i].step(per)
    moved = [False, False]
    for i in (0, 1):
        act = actions[i]
        if act is None:
            continue
        if act.kind == "move":
            w, q = g.ports[before[i]][act.port]
            state.positions[i] = w
            state.entry[i] = q
            state.visited[i].add(w)
            moved[i] = True
        elif act.kind == "terminate":
            state.terminated[i] = True
            state.term_round[i] = r
            state.term_local[i] = perceptions[i].local_round
    collision = state.positions[0] == state.positions[1]
    swap = all(moved) and state.positions[0] == before[1] and state.positions[1] == before[0]
    snaps = tuple(
        AgentSnapshot(
            position=state.positions[i],
            awake=r >= cfg.wake[i],
            terminated=state.terminated[i],
            local_round=max(0, r - cfg.wake[i] + 1),
            perception=perceptions[i],
            action=actions[i],
            phase=state.programs[i].phase if r >= cfg.wake[i] else "asleep",
        )
        for i in (0, 1)
    )
    return TraceEvent(r, snaps, collision, swap)


def run(
    config: SimulationConfig, factory: ProgramFactory = default_program
) -> tuple[SimulationTrace, Outcome]:
    state = initial_state(config, factory)
    trace = SimulationTrace(tuple(config.starts))
    limit = config.round_limit()

    def outcome(kind: str, **kw) -> Outcome:
        return Outcome(
            kind=kind,
            rounds=state.round,
            termination_rounds=tuple(state.term_round),
            termination_local=tuple(state.term_local),
            coverage=(frozenset(state.visited[0]), frozenset(state.visited[1])),
            **kw,
        )

    while True:
        if all(state.terminated):
            if state.visited[0] | state.visited[1] != set(config.graph.nodes):
                return trace, outcome("incomplete_coverage")
            return trace, outcome("success")
        if state.round >= limit:
            return trace, outcome("timeout", detail=f"limit {limit}")
        try:
            event = step(state)
        except IllegalState as exc:
            return trace, outcome("illegal_state", detail=str(exc))
        trace.events.append(event)
        if event.collision:
            return trace, outcome("collision", collision_node=state.positions[0])


def pebble_dict(p: dict[int, PebbleColor]) -> dict[str, str]:
    return {str(v): c.value for v, c in sorted(p.items())}
