import math
from collections import deque
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

import oracles
from nearclique.generators import (clique_path_clique, gnp, planted_near_clique, read_instance,
                                   shingles_gadget, write_instance)
from nearclique.graph import density


def test_full_plant_is_complete_graph():
    inst = planted_near_clique(12, 1, 0, 0, 3)
    assert inst.graph.m == 66
    assert inst.planted == frozenset(range(12))


@pytest.mark.parametrize("seed", range(5))
def test_planted_density_is_certified(seed):
    inst = planted_near_clique(100, Fraction(1, 2), Fraction(1, 1000), 0.05, seed)
    assert len(inst.planted) == 50
    assert density(inst.graph, inst.planted).density >= Fraction(999, 1000)


def test_no_background_means_no_outside_edges():
    inst = planted_near_clique(100, Fraction(3, 10), Fraction(1, 10), 0, 9)
    d = inst.planted
    assert all(u in d and v in d for u, v in inst.graph.edges())
    assert inst.graph.m >= math.ceil(Fraction(9, 10) * 30 * 29 / 2)


def test_top_up_reaches_declared_density():
    # plant_eps = 0.5 leaves the realized density near 0.5; the top-up has to guarantee it
    for seed in range(20):
        inst = planted_near_clique(40, Fraction(1, 2), Fraction(1, 2), 0, seed)
        assert density(inst.graph, inst.planted).density >= Fraction(1, 2)


def test_planted_is_seed_deterministic():
    a = planted_near_clique(60, Fraction(1, 2), Fraction(1, 100), 0.1, 42)
    b = planted_near_clique(60, Fraction(1, 2), Fraction(1, 100), 0.1, 42)
    c = planted_near_clique(60, Fraction(1, 2), Fraction(1, 100), 0.1, 43)
    assert a == b
    assert a.graph != c.graph


def test_plant_is_not_id_contiguous():
    inst = planted_near_clique(100, Fraction(3, 10), 0, 0.05, 1)
    assert inst.planted != frozenset(range(30))


@pytest.mark.parametrize("args", [(10, 0, 0, 0), (10, Fraction(11, 10), 0, 0), (10, Fraction(1, 10), 0, 0)])
def test_planted_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        planted_near_clique(*args, seed=0)


def test_gadget_n40_edge_count():
    gd = shingles_gadget(40, Fraction(1, 2))
    assert gd.graph.m == 2 * math.comb(10, 2) + 3 * 100 == 390


@pytest.mark.parametrize("n,delta", [(20, Fraction(1, 2)), (40, Fraction(3, 10)),
                                     (100, Fraction(7, 10)), (200, Fraction(1, 2))])
def test_gadget_blocks(n, delta):
    gd = shingles_gadget(n, delta)
    g = gd.graph
    c, i = int(delta * n) // 2, (n - int(delta * n)) // 2
    assert [len(gd.c1), len(gd.c2), len(gd.i1), len(gd.i2)] == [c, c, i, i]
    joined = {frozenset(p) for p in ((gd.i1, gd.c1), (gd.c1, gd.c2), (gd.c2, gd.i2))}
    blocks = [gd.c1, gd.c2, gd.i1, gd.i2]
    for a, b in combinations(range(4), 2):
        x, y = blocks[a], blocks[b]
        full = frozenset((x, y)) in joined
        assert all(g.has_edge(u, v) == full for u in x for v in y)
    assert density(g, gd.c1 | gd.c2).density == 1
    assert density(g, gd.i1).density == 0 and g.m == (
        2 * math.comb(c, 2) + 2 * c * i + c * c)


def test_gadget_c2_i2_density_by_pair_count():
    gd = shingles_gadget(40, Fraction(1, 2))
    adj = oracles.adjacency(40, gd.graph.edges())
    d = gd.c2 | gd.i2
    assert density(gd.graph, d).density == oracles.density(adj, d) == Fraction(2 * 45 + 2 * 100, 20 * 19)


@pytest.mark.parametrize("n,delta", [(41, Fraction(1, 2)), (40, Fraction(1, 40)), (40, 1)])
def test_gadget_rejects_parity(n, delta):
    with pytest.raises(ValueError):
        shingles_gadget(n, delta)


def test_gnp_extremes():
    assert gnp(15, 0, 1).m == 0
    assert gnp(15, 1, 1).m == 105


def test_gnp_edge_counts_are_binomial():
    pairs = math.comb(50, 2)
    sigma = math.sqrt(pairs / 4)
    counts = [gnp(50, 0.5, s).m for s in range(100)]
    assert all(abs(c - pairs / 2) <= 4 * sigma for c in counts)
    assert abs(np.mean(counts) - pairs / 2) <= 4 * sigma / 10


def _diameter(g):
    best = 0
    for s in range(g.n):
        dist, q = {s: 0}, deque([s])
        while q:
            v = q.popleft()
            for w in g.neighbors(v):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
        best = max(best, max(dist.values()))
    return best


def test_clique_path_clique_small():
    g = clique_path_clique(8)
    assert g.m == 10
    assert density(g, range(4)).density == 1 and density(g, range(6, 8)).density == 1


@pytest.mark.parametrize("n", [8, 16, 40])
def test_clique_path_clique_diameter(n):
    assert _diameter(clique_path_clique(n)) >= n // 4


def test_clique_path_clique_rejects_bad_n():
    with pytest.raises(ValueError):
        clique_path_clique(10)


def test_instance_files(tmp_path):
    inst = planted_near_clique(30, Fraction(1, 2), 0, 0.1, 7)
    meta = {"family": "planted", "n": 30, "delta": "1/2", "seed": 7}
    write_instance(tmp_path / "g.txt", inst.graph, meta, inst.planted)
    g, got_meta, planted = read_instance(tmp_path / "g.txt")
    assert g == inst.graph and planted == inst.planted
    assert got_meta == {k: str(v) for k, v in meta.items()}
    first = (tmp_path / "g.txt").read_bytes()
    write_instance(tmp_path / "g.txt", inst.graph, meta, inst.planted)
    assert (tmp_path / "g.txt").read_bytes() == first
