import io
from fractions import Fraction
from itertools import combinations

import pytest

import oracles
from nearclique.generators import gnp, shingles_gadget
from nearclique.graph import Graph
from nearclique.rng import draw_u64
from nearclique.shingles import random_id, run_shingles, shingles_labels, summarize_candidates


def test_complete_graph_is_one_set():
    g = Graph(12, combinations(range(12), 2))
    res = run_shingles(g, Fraction(1, 10), Fraction(1, 2), seed=3)
    assert len(res.candidate_sets) == 1
    assert res.qualifying == [(res.rows[0][0], 12, 1)]


def test_forced_min_in_first_clique():
    gd = shingles_gadget(40, Fraction(1, 2))
    res = run_shingles(gd.graph, Fraction(1, 10), Fraction(1, 2), forced_min=0)
    assert res.candidate_sets[0] == gd.c1 | gd.c2 | gd.i1
    assert res.rows[0] == (0, 30, Fraction(2, 3))
    assert not res.qualifying


def test_forced_min_in_independent_block():
    gd = shingles_gadget(40, Fraction(1, 2))
    v = min(gd.i1)
    res = run_shingles(gd.graph, Fraction(1, 10), Fraction(1, 2), forced_min=v)
    assert res.candidate_sets[v] == gd.c1 | {v}
    assert not res.qualifying


def test_forced_min_out_of_range():
    g = gnp(10, 0.5, 0)
    for bad in (-1, 10):
        with pytest.raises(ValueError):
            run_shingles(g, Fraction(1, 10), Fraction(1, 2), forced_min=bad)


def test_random_id_forcing():
    assert random_id(0, 3, None) == 0
    assert random_id(0, 3, 4) == 1
    assert random_id(99, 4, 4) == 0 and random_id(99, 3, 4) == 99


@pytest.mark.parametrize("seed", range(4))
def test_random_mode_equals_forcing_the_argmin(seed):
    g = gnp(40, 0.2, seed)
    rids = [draw_u64(seed, v, 0) for v in range(g.n)]
    argmin = min(range(g.n), key=lambda v: (rids[v], v))
    a = run_shingles(g, Fraction(1, 10), Fraction(1, 2), seed=seed)
    b = run_shingles(g, Fraction(1, 10), Fraction(1, 2), seed=seed, forced_min=argmin)
    assert a.candidate_sets == b.candidate_sets


def _closed_min_labels(g, rids):
    adj = oracles.adjacency(g.n, g.edges())
    return [min((rids[w], w) for w in adj[v] | {v})[1] for v in range(g.n)]


@pytest.mark.parametrize("seed", range(3))
def test_labels_match_simulation_and_oracle(seed):
    g = gnp(30, 0.15, seed)
    rids = [draw_u64(seed, v, 0) for v in range(g.n)]
    want = _closed_min_labels(g, rids)
    assert shingles_labels(g, seed) == want
    assert run_shingles(g, Fraction(1, 10), Fraction(1, 2), seed=seed).outcome.labels == want


def test_labels_match_simulation_for_every_forced_node():
    gd = shingles_gadget(40, Fraction(3, 10))
    for v in range(40):
        sim = run_shingles(gd.graph, Fraction(1, 10), Fraction(3, 10), seed=2, forced_min=v)
        assert sim.outcome.labels == shingles_labels(gd.graph, 2, forced_min=v)


def test_rid_stream_fits_budget():
    gd = shingles_gadget(20, Fraction(1, 2))
    res = run_shingles(gd.graph, Fraction(1, 10), Fraction(1, 2), seed=1)
    out = res.outcome
    assert out.max_envelope_bits <= 8 * (20).bit_length()
    assert out.rounds_used >= 2
    buf = io.StringIO()
    run_shingles(gd.graph, Fraction(1, 10), Fraction(1, 2), seed=1, trace=buf)
    assert buf.getvalue().splitlines()[0].endswith("shingles:RID")


def test_summary_orders_by_size_then_label():
    g = Graph(6, [(0, 1), (2, 3), (3, 4)])
    res = summarize_candidates(g, [5, 5, 0, 0, 0, 1], Fraction(1, 10), Fraction(1, 2))
    assert [r[:2] for r in res.rows] == [(0, 3), (5, 2), (1, 1)]
    assert res.rows[0][2] == Fraction(4, 6)
    # size 2 is below (1 - eps) * delta * n = 2.7
    assert res.qualifying == []
    assert ("candidate[0]", "3 2/3") in res.report_rows()


@pytest.mark.parametrize("delta", [Fraction(3, 10), Fraction(1, 2), Fraction(7, 10)])
def test_gadget_defeats_every_forced_choice(delta):
    n = 80
    eps = min((1 - delta) / (1 + delta), Fraction(1, 9)) - Fraction(1, 100)
    gd = shingles_gadget(n, delta)
    for v in range(n):
        res = summarize_candidates(gd.graph, shingles_labels(gd.graph, 0, forced_min=v), eps, delta)
        assert not res.qualifying, v
