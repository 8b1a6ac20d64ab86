import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graph_with_pair, graphs
from pebblex.agents import (
    STAY,
    TERMINATE,
    AgentPerception,
    AgentProgram,
    BipartiteAgent,
    GeneralAgent,
    IllegalState,
    agent_step,
    move,
)
from pebblex.anon_bfs import first_visit_order_bruteforce
from pebblex.graph import PortLabeledGraph, build_graph
from pebblex.placement import PebbleAssignment, PebbleColor, place_pebbles_general
from pebblex.sim import SimulationConfig, WakeupSchedule, run
from pebblex.uxs import ExplorationSequence, apply_uxs

RED, BLUE, GREEN, BLACK = PebbleColor.RED, PebbleColor.BLUE, PebbleColor.GREEN, PebbleColor.BLACK


def per(degree, pebble=None, adjacent=False, entry=None, lr=1, n=6):
    return AgentPerception(degree, pebble, adjacent, entry, lr, n)


def feed(program, perceptions):
    return [program.step(p) for p in perceptions]


# dispatch at wake-up


def test_green_start_terminates():
    assert GeneralAgent(6).step(per(2, GREEN)) == TERMINATE


def test_two_nodes_terminate():
    assert GeneralAgent(2).step(per(1, adjacent=True, n=2)) == TERMINATE
    assert BipartiteAgent(2, (0,)).step(per(1, adjacent=True, n=2)) == TERMINATE


def test_hub_with_red_skips_port_zero():
    a = GeneralAgent(6)
    assert a.step(per(5, RED)) == move(1)
    assert a.phase == "one_level_bfs_color"


def test_hub_without_pebble_visits_ports_in_order():
    a = GeneralAgent(5, literal=True)
    acts = feed(a, [
        per(4, n=5),
        per(1, entry=0, n=5),
        per(4, entry=0, n=5),
        per(2, RED, entry=1, n=5),
        per(4, entry=1, n=5),
        per(1, GREEN, entry=0, n=5),
    ])
    # red neighbour behind port 1: skip port 2
    assert acts == [move(0), move(0), move(1), move(1), move(3), TERMINATE]


def test_red_start_alone_searches_descending():
    a = GeneralAgent(6)
    assert a.step(per(3, RED)) == move(2)
    assert a.phase == "search_agent_red"


def test_blue_start_alone_searches_ascending():
    a = GeneralAgent(6)
    assert a.step(per(3, BLUE)) == move(0)
    assert a.phase == "search_agent_blue"


def test_pebbled_start_next_to_agent():
    a = GeneralAgent(6)
    assert a.step(per(3, RED, adjacent=True)) == move(2)
    assert a.phase == "agent_found"
    b = GeneralAgent(6)
    assert b.step(per(3, BLUE, adjacent=True)) == move(0)


def test_pebble_free_start_waits():
    a = GeneralAgent(6)
    assert feed(a, [per(2)] * 3) == [STAY] * 3
    assert a.phase == "port_labeled_bfs"


def test_search_red_skips_entry_and_records_ports():
    a = GeneralAgent(6)
    acts = feed(a, [
        per(3, RED),                  # -> port 2
        per(2, None, entry=0),        # nothing, back
        per(3, RED, entry=None),      # -> port 1
        per(3, RED, entry=2),         # red neighbour, agent not sensed: keep going, skip entry 2
    ])
    assert acts == [move(2), move(0), move(1), move(1)]
    assert a.stack == [-1, 2]


def test_notify_bounces_after_2n_quiet_rounds():
    a = GeneralAgent(3, literal=True)
    # red start at degree 1 (< n-1 = 2), one red neighbour with the other agent next to it
    acts = feed(a, [per(1, RED, n=3), per(2, RED, adjacent=True, entry=0, n=3)])
    assert acts == [move(0), move(0)]
    quiet = feed(a, [per(1, RED, entry=1, n=3)] * 6)
    assert quiet == [STAY] * 6
    assert a.phase == "notify_agent"
    assert a.step(per(1, RED, entry=1, n=3)) == move(0)


def test_move_to_z_blue_stops_at_red_away_from_waiter():
    a = GeneralAgent(6)
    a.per = per(3, BLUE, entry=1)
    gen = a.move_to_z_blue(1)
    assert next(gen) == move(0)
    a.per = per(2, None, entry=0)
    assert next(gen) == move(0)
    a.per = per(3, BLUE, entry=0)
    assert next(gen) == move(2)
    a.per = per(2, RED, adjacent=False, entry=1)
    assert next(gen) == TERMINATE


def test_move_to_z_red_exhausts_ports():
    a = GeneralAgent(6)
    a.per = per(2, RED, entry=0)
    gen = a.move_to_z_red(0)
    assert next(gen) == move(1)
    a.per = per(1, None, entry=0)
    assert next(gen) == move(0)
    a.per = per(2, RED, entry=1)
    assert next(gen) == TERMINATE


def test_one_level_bfs_color_without_green_is_illegal():
    a = GeneralAgent(3)
    acts = [a.step(per(2, RED, n=3))]
    acts.append(a.step(per(1, None, entry=0, n=3)))
    assert acts == [move(1), move(0)]
    with pytest.raises(IllegalState):
        a.step(per(2, RED, entry=1, n=3))


# bipartite agent


def test_bipartite_pebble_free_waits_for_arrival():
    a = BipartiteAgent(5, (0, 1))
    assert a.step(per(2, n=5)) == STAY
    assert a.phase == "await_arrival"


def test_bipartite_red_x_next_to_y_leaves_by_port_one():
    assert BipartiteAgent(5, (0,)).step(per(3, RED, adjacent=True, n=5)) == move(1)


def test_bipartite_black_x_next_to_y_leaves_by_port_zero():
    assert BipartiteAgent(5, (0,)).step(per(3, BLACK, adjacent=True, n=5)) == move(0)


def test_bipartite_sequence_semantics():
    a = BipartiteAgent(5, (1, 2, 0))
    a.per = per(3, n=5)
    gen = a.explore_universal()
    assert next(gen) == move(1)  # entry treated as 0
    a.per = per(4, entry=3, n=5)
    assert next(gen) == move((3 + 2) % 4)
    a.per = per(2, entry=1, n=5)
    assert next(gen) == move(1)
    a.per = per(2, entry=0, n=5)
    assert next(gen) == TERMINATE


def test_bipartite_uxs_moves_follow_apply_uxs():
    from pebblex.generators import random_bipartite_graph
    from pebblex.placement import place_pebbles_bipartite

    rng = random.Random(11)
    g = random_bipartite_graph(6, 2, rng)
    seq = ExplorationSequence(6, tuple(rng.randrange(5) for _ in range(80)))
    pl = place_pebbles_bipartite(g, 0, 5)
    trace, out = run(SimulationConfig(g, pl.pebbles, (0, 5), mode="bipartite", uxs=seq, max_rounds=2000))
    for i in (0, 1):
        phases = [e.agents[i].phase for e in trace.events]
        k = phases.index("uxs")
        pos = trace.positions(i)
        assert tuple(pos[k : k + len(seq) + 1]) == apply_uxs(g, pos[k], seq.offsets)


# program contract


def test_step_after_terminate_is_illegal():
    a = GeneralAgent(6)
    a.step(per(2, GREEN))
    with pytest.raises(IllegalState):
        a.step(per(2, GREEN))


def test_program_falling_off_the_end_is_illegal():
    class Once(AgentProgram):
        def _main(self):
            yield STAY

    a = Once(3)
    a.step(per(1))
    with pytest.raises(IllegalState, match="without terminating"):
        a.step(per(1))


def test_bad_port_is_illegal():
    class Wild(AgentProgram):
        def _main(self):
            yield move(7)

    with pytest.raises(IllegalState, match="port 7"):
        Wild(3).step(per(2))


def test_agent_step_wrapper():
    a = GeneralAgent(6)
    prog, act = agent_step(a, per(2, GREEN))
    assert prog is a and act == TERMINATE


# whole-run properties


def walk_with(program, g, start):
    """Drive a lone program's walk enumeration and log first visits."""
    order, v, entry = [start], start, None
    program.per = per(g.degree(v), entry=entry, n=g.n)
    depth = 1
    while len(order) < g.n:
        for act in program._explore_walks(depth):
            v, entry = g.ports[v][act.port]
            if v not in order:
                order.append(v)
            program.per = per(g.degree(v), entry=entry, n=g.n)
        assert v == start
        depth += 1
    return tuple(order)


@given(graphs(n_max=7))
def test_walk_enumeration_visits_in_first_visit_order(g):
    assert walk_with(GeneralAgent(g.n), g, 0) == first_visit_order_bruteforce(g, 0).order


def relabel(g: PortLabeledGraph, perm: list[int]) -> PortLabeledGraph:
    rows = [None] * g.n
    for v, row in enumerate(g.ports):
        rows[perm[v]] = tuple((perm[w], q) for w, q in row)
    return PortLabeledGraph(tuple(rows))


def action_streams(trace):
    return [[str(e.agents[i].action) for e in trace.events] for i in (0, 1)]


@given(graph_with_pair(n_min=3, n_max=7), st.randoms(use_true_random=False), st.integers(0, 3))
def test_anonymity_under_relabeling(case, rnd, delay):
    g, a, b = case
    pl = place_pebbles_general(g, a, b)
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = relabel(g, perm)
    pebbles = PebbleAssignment({perm[v]: c for v, c in pl.pebbles.items()})
    wake = WakeupSchedule(1, 1 + delay)
    t1, o1 = run(SimulationConfig(g, pl.pebbles, (a, b), wake))
    t2, o2 = run(SimulationConfig(h, pebbles, (perm[a], perm[b]), wake))
    assert action_streams(t1) == action_streams(t2)
    assert o1.kind == o2.kind
    assert [perm[v] for v in t1.positions(0)] == t2.positions(0)


@given(graph_with_pair(n_min=3, n_max=7), st.integers(0, 3))
def test_identical_perceptions_identical_actions(case, delay):
    g, a, b = case
    pl = place_pebbles_general(g, a, b)
    trace, _ = run(SimulationConfig(g, pl.pebbles, (a, b), WakeupSchedule(1 + delay, 1)))
    for i in (0, 1):
        fresh = GeneralAgent(g.n)
        for e in trace.events:
            snap = e.agents[i]
            if snap.perception is not None:
                assert fresh.step(snap.perception) == snap.action


# unhardened reading: frozen witnesses of the three failure modes

LITERAL_WITNESSES = [
    # a one-round scan excursion looks like a departure
    ((((2, 2),), ((2, 1), (5, 3)), ((5, 2), (1, 0), (0, 0)), ((5, 1),), ((5, 0),), ((4, 0), (3, 0), (2, 0), (1, 1))),
     (2, 5), (1, 2), "collision"),
    # a passing search looks like an arrival
    ((((6, 0), (4, 2)), ((2, 3), (5, 2), (7, 2), (4, 0), (6, 1)), ((7, 3), (5, 0), (6, 2), (1, 0)), ((7, 1), (5, 1)),
      ((1, 3), (5, 4), (0, 1)), ((2, 1), (3, 1), (1, 1), (7, 0), (4, 1)), ((0, 0), (1, 4), (2, 2)),
      ((5, 3), (3, 0), (1, 2), (2, 0))),
     (4, 2), (1, 1), None),
    # the blue walk stops at an intermediate red node
    ((((3, 0),), ((4, 0), (5, 0), (3, 3)), ((3, 2), (4, 1)), ((0, 0), (6, 0), (2, 0), (1, 2)), ((1, 0), (2, 1), (8, 1)),
      ((1, 1),), ((3, 1),), ((8, 0),), ((7, 0), (4, 2))),
     (2, 6), (1, 1), None),
]


@pytest.mark.parametrize("ports,starts,wake,kind", LITERAL_WITNESSES)
def test_literal_reading_fails_where_hardened_succeeds(ports, starts, wake, kind):
    from pebblex.verify import check_trace

    g = PortLabeledGraph(ports)
    assert build_graph(g.edges(), g.n) == g
    pl = place_pebbles_general(g, *starts)
    cfg = SimulationConfig(g, pl.pebbles, starts, WakeupSchedule(*wake))
    t_lit, o_lit = run(cfg, lambda c, i: GeneralAgent(c.graph.n, literal=True))
    rep_lit = check_trace(t_lit, g, "general", pl)
    assert not (o_lit.ok and rep_lit.ok)
    if kind:
        assert o_lit.kind == kind
    t, o = run(cfg)
    assert o.ok and check_trace(t, g, "general", pl).ok
