import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bipartite_graphs, edge, graphs, path3
from pebblex.anon_bfs import ExplosionCap
from pebblex.generators import all_port_labeled_graphs, random_graph
from pebblex.graph import is_bipartite
from pebblex.uxs import (
    BRUTE_FORCE,
    CERTIFIED_MAX_N,
    ON_INSTANCE,
    BudgetExceeded,
    Certificate,
    Certified,
    ExplorationSequence,
    NoCertifiedSequence,
    Randomized,
    SequenceFormatError,
    apply_uxs,
    certified_sequence,
    covers,
    format_sequence,
    load_sequence,
    parse_sequence,
    save_sequence,
    uxs_for,
    verify_universal,
)


def step_by_step(g, start, offsets):
    """Independent evaluator: keep (node, entry) explicitly and read ports by hand."""
    trace = [start]
    here, came_in = start, 0
    for s in offsets:
        out = (came_in + s) % g.degree(here)
        nxt, back = g.neighbor(here, out)
        trace.append(nxt)
        here, came_in = nxt, back
    return tuple(trace)


def test_single_offset_on_edge():
    assert apply_uxs(edge(), 0, [0]) == (0, 1)


def test_zero_zero_on_path_returns_to_start():
    # entering b by port 0, offset 0 sends the walker back through port 0
    assert apply_uxs(path3(), 0, [0, 0]) == step_by_step(path3(), 0, [0, 0]) == (0, 1, 0)
    assert apply_uxs(path3(), 0, [0, 1]) == (0, 1, 2)


def test_empty_sequence_rejected():
    with pytest.raises(ValueError):
        ExplorationSequence(3, ())
    with pytest.raises(ValueError):
        ExplorationSequence(3, (0, -1))


@given(graphs(), st.lists(st.integers(0, 9), min_size=1, max_size=40), st.data())
def test_apply_matches_independent_evaluator(g, offsets, data):
    s = data.draw(st.integers(0, g.n - 1))
    tr = apply_uxs(g, s, offsets)
    assert len(tr) == len(offsets) + 1
    assert tr == step_by_step(g, s, offsets)


def test_single_offset_universal_for_two_nodes():
    r = verify_universal([0], 2)
    assert r.ok and r.graphs_checked == 1


def test_single_offset_fails_on_three_path():
    r = verify_universal([0], 3)
    assert not r.ok
    g, start = r.counterexample
    assert len(g.edges()) == 2  # the 3-path, not the triangle
    assert not covers(g, start, [0])
    end = next(v for v in g.nodes if g.degree(v) == 1)
    assert not covers(g, end, [0])


@pytest.mark.parametrize("n", range(2, CERTIFIED_MAX_N + 1))
def test_shipped_sequences_are_universal(n):
    seq = uxs_for(n, Certified())
    assert seq.certificate.kind == BRUTE_FORCE and seq.certificate.n_max == n
    assert verify_universal(seq.offsets, n).ok


def test_certified_lookup():
    assert uxs_for(2).offsets == (0,)
    with pytest.raises(NoCertifiedSequence):
        uxs_for(50, Certified())
    with pytest.raises(ValueError):
        uxs_for(1)


def test_explosion_cap():
    with pytest.raises(ExplosionCap):
        verify_universal([0, 1], 4, cap=100)


def test_randomized_verifies_on_instance():
    g = random_graph(6, 3, random.Random(4))
    seq = uxs_for(6, Randomized(seed=9, graph=g))
    assert seq.certificate.kind == ON_INSTANCE
    assert seq.certificate.graph_digest == g.digest()
    assert len(seq) == 6**3
    assert all(covers(g, s, seq.offsets) for s in g.nodes)
    assert uxs_for(6, Randomized(seed=9, graph=g)) == seq


def test_randomized_budget():
    g = random_graph(5, 0, random.Random(1))
    with pytest.raises(BudgetExceeded):
        uxs_for(5, Randomized(seed=0, budget=3, scale=0, graph=g))
    with pytest.raises(ValueError):
        uxs_for(5, Randomized(seed=0))


def test_sequence_file_roundtrip(tmp_path):
    seq = ExplorationSequence(4, (2, 1, 0), Certificate(BRUTE_FORCE, n_max=4, seed=7))
    f = tmp_path / "s.txt"
    save_sequence(seq, f)
    assert load_sequence(f) == seq
    on = ExplorationSequence(5, (1,), Certificate(ON_INSTANCE, graph_digest="abc", seed=3))
    assert parse_sequence(format_sequence(on)) == on
    assert parse_sequence("n 3\noffsets 0 1\n").certificate.kind == "uncertified"


@pytest.mark.parametrize("text", ["offsets 1 2\n", "n 3\n", "n x\noffsets 1\n", "n 3\noffsets\n"])
def test_sequence_file_errors(text):
    with pytest.raises(SequenceFormatError):
        parse_sequence(text)


def test_shipped_files_parse():
    for n in range(2, CERTIFIED_MAX_N + 1):
        seq = certified_sequence(n)
        assert seq.n == n and seq.certificate.seed == 7


@given(bipartite_graphs(), st.lists(st.integers(0, 7), min_size=1, max_size=60), st.data())
def test_parity_alternates(g, offsets, data):
    left, _ = is_bipartite(g)
    s = data.draw(st.integers(0, g.n - 1))
    sides = [v in left for v in apply_uxs(g, s, offsets)]
    assert all(a != b for a, b in zip(sides, sides[1:]))


def test_adjacent_starts_never_meet_in_certified_range():
    for g in all_port_labeled_graphs(CERTIFIED_MAX_N):
        if is_bipartite(g) is None:
            continue
        seq = uxs_for(g.n).offsets
        for a, b, _, _ in g.edges():
            ta, tb = apply_uxs(g, a, seq), apply_uxs(g, b, seq)
            assert all(u != v for u, v in zip(ta, tb))
