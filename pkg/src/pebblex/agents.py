"""Deterministic agent programs.

An agent sees only an :class:`AgentPerception` each round and answers with an
:class:`AgentAction`. Programs are written as generators: every ``yield`` hands
one action to the simulator, and the next perception is available in
``self.per`` when the generator resumes. Local computation between yields is
free, matching the two-stage round of the model.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

from .placement import BLACK, BLUE, GREEN, RED, PebbleColor


class IllegalState(RuntimeError):
    """The program reached a point with no matching branch."""


@dataclass(frozen=True)
class AgentPerception:
    degree: int
    pebble: PebbleColor | None
    adjacent: bool
    entry_port: int | None
    local_round: int
    n: int


class AgentAction(NamedTuple):
    kind: str  # "stay" | "move" | "terminate"
    port: int = -1

    def __str__(self) -> str:
        return f"move({self.port})" if self.kind == "move" else self.kind


STAY = AgentAction("stay")
TERMINATE = AgentAction("terminate")


def move(port: int) -> AgentAction:
    return AgentAction("move", port)


Program = Iterator[AgentAction]


class AgentProgram:
    """Base class; subclasses implement :meth:`_main` as a generator."""

    mode = "abstract"

    def __init__(self, n: int):
        self.n = n
        self.phase = "asleep"
        self.per: AgentPerception | None = None
        self.terminated = False
        self._gen: Program | None = None

    def step(self, per: AgentPerception) -> AgentAction:
        if self.terminated:
            raise IllegalState("step after terminate")
        self.per = per
        if self._gen is None:
            self._gen = self._main()
        try:
            action = next(self._gen)
        except StopIteration:
            raise IllegalState(f"program ended without terminating (phase {self.phase})") from None
        if action.kind == "move" and not 0 <= action.port < per.degree:
            raise IllegalState(f"move through port {action.port} at a degree-{per.degree} node")
        if action is TERMINATE:
            self.terminated = True
            self.phase = "terminated"
        return action

    def _main(self) -> Program:
        raise NotImplementedError
        yield  # pragma: no cover

    # primitives shared by subclasses

    def _go(self, port: int) -> Program:
        if not 0 <= port < self.per.degree:
            raise IllegalState(f"{self.phase}: port {port} outside 0..{self.per.degree - 1}")
        yield move(port)

    def _back(self) -> Program:
        yield move(self.per.entry_port)

    def _wait(self, rounds: int = 1) -> Program:
        for _ in range(rounds):
            yield STAY

    def _scan(self, order: Sequence[int], wanted: frozenset, skip: int) -> Program:
        """Visit ports in ``order`` (minus ``skip``) until a node with a ``wanted`` pebble.

        Leaves the agent on that node; raises if the ports run out.
        """
        for p in order:
            if p == skip:
                continue
            yield from self._go(p)
            if self.per.pebble in wanted:
                self._found_port = p
                return
            yield from self._back()
        raise IllegalState(f"{self.phase}: no {sorted(c.value for c in wanted)} neighbour")

    def _ascending(self) -> range:
        return range(self.per.degree)

    def _descending(self) -> range:
        return range(self.per.degree - 1, -1, -1)


def agent_step(program: AgentProgram, perception: AgentPerception) -> tuple[AgentProgram, AgentAction]:
    action = program.step(perception)
    return program, action


class GeneralAgent(AgentProgram):
    """The colour-index-3 exploration algorithm for arbitrary graphs."""

    mode = "general"

    def __init__(self, n: int, literal: bool = False):
        super().__init__(n)
        self.literal = literal
        self.stack: list[int] = []

    def _main(self) -> Program:
        self.phase = "initiate"
        per, n = self.per, self.n
        if n == 2 or per.pebble is GREEN:
            yield TERMINATE
            return
        if per.degree == n - 1:
            if per.pebble is RED:
                yield from self.one_level_bfs_color()
            else:
                yield from self.one_level_bfs(0)
        elif per.pebble in (RED, BLUE):
            if per.adjacent:
                yield from self.agent_found(per.pebble, -1)
            elif per.pebble is RED:
                self.stack = [-1]
                yield from self.search_agent_red(-1)
            else:
                yield from self.search_agent_blue(-1)
        else:
            yield from self.port_labeled_bfs()

    def one_level_bfs(self, p: int) -> Program:
        self.phase = "one_level_bfs"
        while True:
            yield from self._go(p)
            if self.per.pebble is GREEN:
                yield TERMINATE
                return
            p += 2 if self.per.pebble is RED else 1
            yield from self._back()

    def one_level_bfs_color(self) -> Program:
        self.phase = "one_level_bfs_color"
        p = 0
        while p <= self.per.degree - 1:
            p += 1
            yield from self._go(p)
            if self.per.pebble is GREEN:
                yield TERMINATE
                return
            yield from self._back()
        raise IllegalState("one_level_bfs_color: no green neighbour")

    def agent_found(self, color: PebbleColor, e: int) -> Program:
        while True:
            self.phase = "agent_found"
            order = self._descending() if color is RED else self._ascending()
            yield from self._scan(order, _RED_BLUE, e)
            color_u, e1 = self.per.pebble, self.per.entry_port
            if self.per.adjacent:
                color, e = color_u, e1
                continue
            yield from self.notify_agent(e1)
            if color_u is BLUE:
                yield from self.move_to_z_blue(e1)
            else:
                self.phase = "move_to_z"
                yield TERMINATE
            return

    def search_agent_red(self, e: int) -> Program:
        while True:
            self.phase = "search_agent_red"
            yield from self._scan(self._descending(), _RED, e)
            p, e1 = self._found_port, self.per.entry_port
            if self.per.adjacent:
                if not self.literal:
                    yield STAY
                yield from self._back()
                yield from self.notify_agent(p)
                yield from self.return_back()
                return
            self.stack.append(e1)
            if len(self.stack) > self.n:
                raise IllegalState("port record deeper than n")
            e = e1

    def search_agent_blue(self, e: int) -> Program:
        while True:
            self.phase = "search_agent_blue"
            yield from self._scan(self._ascending(), _RED_BLUE, e)
            color, e1 = self.per.pebble, self.per.entry_port
            if self.per.adjacent:
                yield from self.agent_found(color, e1)
                return
            if color is BLUE:
                e = e1
                continue
            self.stack = [e1]
            yield from self.search_agent_red(e1)
            return

    def move_to_z_blue(self, e: int) -> Program:
        color = BLUE
        while True:
            self.phase = "move_to_z"
            order = self._descending() if color is RED else self._ascending()
            yield from self._scan(order, _RED_BLUE, e)
            color = self.per.pebble
            # the final red node is the one out of the waiting agent's reach
            if color is RED and (self.literal or not self.per.adjacent):
                yield TERMINATE
                return
            e = self.per.entry_port

    def move_to_z_red(self, e: int) -> Program:
        while True:
            self.phase = "move_to_z"
            found = False
            for p in self._ascending():
                if p == e:
                    continue
                yield from self._go(p)
                if self.per.pebble is BLUE:
                    found = True
                    break
                yield from self._back()
            if not found:
                yield TERMINATE
                return
            e = self.per.entry_port

    def notify_agent(self, p: int) -> Program:
        self.phase = "notify_agent"
        while True:
            for _ in range(2 * self.n):
                if self.per.adjacent:
                    return
                yield STAY
            yield from self._go(p)
            if not self.literal:
                yield STAY
            yield from self._back()

    def return_back(self) -> Program:
        self.phase = "return_back"
        while len(self.stack) > 1:
            yield from self._go(self.stack.pop())
        e = self.stack.pop()
        yield from self.move_to_z_red(e)

    def port_labeled_bfs(self) -> Program:
        self.phase = "port_labeled_bfs"
        while True:
            yield from self._await_arrival()
            yield from self._await_departure()
            found = False
            for p in self._ascending():
                yield from self._go(p)
                sensed = self.per.adjacent
                yield from self._back()
                if sensed:
                    found = True
                    break
            if found:
                break
        self.phase = "wait_7n"
        yield from self._wait(7 * self.n)
        self.phase = "explore"
        depth = 1
        while True:
            yield from self._explore_walks(depth)
            depth += 1

    def _await_arrival(self) -> Program:
        if self.literal:
            while not self.per.adjacent:
                yield STAY
            return
        # the initiator lingers two rounds when it means it; scans pass in one
        present = 1 if self.per.adjacent else 0
        while present < 2:
            yield STAY
            present = present + 1 if self.per.adjacent else 0

    def _await_departure(self) -> Program:
        if self.literal:
            while True:
                yield from self._wait(2)
                if not self.per.adjacent:
                    return
        # a one-round absence is the other agent probing a neighbour, not leaving
        absent = 0
        while absent < 2:
            yield STAY
            absent = 0 if self.per.adjacent else absent + 1

    def _explore_walks(self, remaining: int) -> Program:
        """All port sequences of length ``remaining`` from here, depth first, in lex order."""
        for p in range(self.per.degree):
            yield from self._go(p)
            back = self.per.entry_port
            if self.per.pebble is GREEN:
                yield TERMINATE
                return
            if remaining > 1:
                yield from self._explore_walks(remaining - 1)
            yield move(back)


_RED = frozenset({RED})
_RED_BLUE = frozenset({RED, BLUE})
_BLACK = frozenset({BLACK})


class BipartiteAgent(AgentProgram):
    """Two-colour algorithm for bipartite graphs, finishing with a shared exploration sequence."""

    mode = "bipartite"

    def __init__(self, n: int, offsets: Sequence[int]):
        super().__init__(n)
        if not offsets:
            raise ValueError("exploration sequence must be non-empty")
        self.offsets = tuple(offsets)

    def _main(self) -> Program:
        self.phase = "initiate"
        if self.n == 2:
            yield TERMINATE
            return
        if self.per.pebble is None:
            yield from self._pebble_free()
        else:
            yield from self._pebble_side()

    def _pebble_free(self) -> Program:
        if self.per.adjacent:
            self.phase = "await_departure"
            while self.per.adjacent:
                yield STAY
        else:
            self.phase = "await_arrival"
            while not self.per.adjacent:
                yield STAY
        self.phase = "probe"
        for p in self._ascending():
            yield from self._go(p)
            sensed = self.per.adjacent
            yield from self._back()
            if sensed:
                break
        else:
            raise IllegalState("probe: no neighbour sees the other agent")
        yield from self.explore_universal()

    def _pebble_side(self) -> Program:
        at_x, color = True, self.per.pebble
        e = -1
        self.phase = "follow_black"
        while not self.per.adjacent:
            yield from self._scan(self._ascending(), _BLACK, e)
            e, at_x = self.per.entry_port, False
        if at_x:
            out = 0 if color is BLACK else 1
        else:
            out = self.per.entry_port
        while True:
            self.phase = "handshake"
            yield from self._go(out)
            home = self.per.entry_port
            sensed = False
            for _ in range(2 * self.n):
                if self.per.adjacent:
                    sensed = True
                    break
                yield STAY
            yield move(home)
            if sensed:
                break
        yield from self.explore_universal()

    def explore_universal(self) -> Program:
        self.phase = "uxs"
        entry = 0
        for s in self.offsets:
            yield move((entry + s) % self.per.degree)
            entry = self.per.entry_port
        yield TERMINATE
