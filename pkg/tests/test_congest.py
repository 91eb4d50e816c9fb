import io
from itertools import combinations

import numpy as np
import pytest

from nearclique.congest import (BudgetViolation, Envelope, Outbox, Process, ProtocolError,
                                SimConfig, SimulationDeadlock, TopologyViolation, bits_to_ints,
                                collect_metrics, default_budget, fragment_stream, id_bits,
                                ints_to_bits, reassemble, run_simulation)
from nearclique.generators import gnp
from nearclique.graph import Graph
from nearclique.rng import NodeStream, draw_u64, splitmix64, uniform_array


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


class Silent(Process):
    def start(self):
        self.decide(None)
        return []


class Echo(Process):
    """Send one 12-bit payload to every neighbour, decide once all have arrived."""

    def start(self):
        return [Envelope(self.node, w, ("hi",), 12) for w in self.neighbors]

    def step(self, rnd, inbox):
        self.decide(len(inbox))
        return []


class Flood(Process):
    """Node 0 floods its ID; everyone records the round it first arrived."""

    def __init__(self, *args):
        super().__init__(*args)
        self.heard = None

    def start(self):
        if self.node == 0:
            self.decide(0)
            return [Envelope(0, w, ("id", 0), 2 * id_bits(self.n)) for w in self.neighbors]
        return []

    def step(self, rnd, inbox):
        if inbox and not self.decided:
            self.decide(rnd)
            return [Envelope(self.node, w, ("id", 0), 2 * id_bits(self.n))
                    for w in self.neighbors if w != inbox[0].src]
        return []


def make(cls):
    return lambda node, nbrs, rng, n: cls(node, nbrs, rng, n)


def test_decide_at_init_uses_no_rounds():
    g = Graph(3, combinations(range(3), 2))
    out = run_simulation(g, make(Silent))
    assert out.rounds_used == 0 and out.labels == [None] * 3
    assert dict(collect_metrics(out))["label[-]"] == 3


def test_echo_on_two_nodes():
    out = run_simulation(path(2), make(Echo))
    assert out.rounds_used == 1
    assert out.total_bits == 24 and out.max_envelope_bits == 12
    assert out.labels == [1, 1]


def test_flood_travels_one_hop_per_round():
    out = run_simulation(path(10), make(Flood))
    assert out.labels == list(range(10))


def test_flood_matches_bfs_distance():
    from collections import deque
    g = gnp(40, 0.08, 3)
    dist, q = {0: 0}, deque([0])
    while q:
        v = q.popleft()
        for w in g.neighbors(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    # nodes outside 0's component never hear anything; let them decide at once
    outside = set(range(g.n)) - set(dist)
    assert outside

    def program(node, nbrs, rng, n):
        p = Flood(node, nbrs, rng, n)
        if node in outside:
            p.decide(None)
        return p

    out = run_simulation(g, program)
    assert out.labels == [dist.get(v) for v in range(g.n)]


class Oversized(Process):
    def start(self):
        return [Envelope(self.node, w, ("x",), 10_000) for w in self.neighbors]


class OffGraph(Process):
    def start(self):
        return [Envelope(self.node, (self.node + 2) % self.n, ("x",), 4)]


class Twice(Process):
    def start(self):
        w = self.neighbors[0]
        return [Envelope(self.node, w, ("x",), 4), Envelope(self.node, w, ("y",), 4)]


class Forger(Process):
    def start(self):
        return [Envelope(self.neighbors[0], self.node, ("x",), 4)]


class Rewrite(Process):
    def start(self):
        self.decide(1)
        self.decide(2)
        return []


@pytest.mark.parametrize("cls,err", [(Oversized, BudgetViolation), (OffGraph, TopologyViolation),
                                     (Twice, ProtocolError), (Forger, ProtocolError),
                                     (Rewrite, ProtocolError)])
def test_violations_raise(cls, err):
    with pytest.raises(err):
        run_simulation(path(4), make(cls))


def test_budget_violation_names_the_link():
    with pytest.raises(BudgetViolation, match=r"round 0: envelope 0->1"):
        run_simulation(path(2), make(Oversized))


class Waiter(Process):
    pass


def test_deadlock_and_cap():
    with pytest.raises(SimulationDeadlock):
        run_simulation(path(3), make(Waiter))
    out = run_simulation(path(3), make(Waiter), SimConfig(round_cap=7))
    assert out.aborted and out.rounds_used == 7 and out.labels == [None] * 3


class Ticker(Process):
    def idle_until(self):
        return 50

    def step(self, rnd, inbox):
        if rnd == 50:
            self.decide(rnd)
        return []


def test_timers_fast_forward_and_cap_aborts():
    out = run_simulation(path(3), make(Ticker))
    assert out.labels == [50] * 3 and out.rounds_used == 50
    capped = run_simulation(path(3), make(Ticker), SimConfig(round_cap=20))
    assert capped.aborted and capped.rounds_used == 20


def test_budget_floor():
    with pytest.raises(ValueError):
        SimConfig(bit_budget_per_link=5).budget(100)
    assert default_budget(100) == 8 * 7 and SimConfig().budget(1000) == 80
    assert id_bits(1) == 1 and id_bits(7) == 3 and id_bits(8) == 4


def test_trace_lines_and_determinism():
    buf1, buf2 = io.StringIO(), io.StringIO()
    a = run_simulation(path(5), make(Flood), SimConfig(trace=buf1))
    b = run_simulation(path(5), make(Flood), SimConfig(trace=buf2))
    assert a == b and buf1.getvalue() == buf2.getvalue()
    first = buf1.getvalue().splitlines()[0]
    assert first == "1 0 1 6 id"


# -- fragmentation -------------------------------------------------------------------


def test_fragment_counts():
    assert len(fragment_stream(np.ones(10), 64)) == 1
    assert len(fragment_stream(np.ones(256), 33)) == 8
    assert len(fragment_stream(np.ones(0), 8)) == 0
    with pytest.raises(ValueError):
        fragment_stream(np.ones(3), 0)


def test_fragment_round_trip():
    bits = np.random.default_rng(1).integers(0, 2, 1000).astype(np.uint8)
    frags = fragment_stream(bits, 29)
    assert all(len(f) <= 28 for f in frags)
    assert np.array_equal(reassemble(frags), bits)


def test_int_bit_codec():
    vals = [0, 1, 5, 127, 64]
    assert bits_to_ints(ints_to_bits(vals, 7), 7).tolist() == vals
    assert ints_to_bits([5], 4).tolist() == [0, 1, 0, 1]


def test_outbox_releases_one_envelope_per_link():
    box = Outbox(0)
    box.send(1, ("a",), 4)
    box.send(1, ("b",), 4)
    box.send(2, ("c",), 4)
    assert [e.payload for e in box.pop_round()] == [("a",), ("c",)]
    assert [e.payload for e in box.pop_round()] == [("b",)]
    assert not box.pending()


def test_outbox_holds_messages_behind_open_stream():
    box = Outbox(0)
    box.open_stream(1, ("H",), 4)
    box.send(1, ("later",), 4)
    box.push_chunk(1, np.ones(3, dtype=np.uint8), False, "F")
    box.push_chunk(1, np.ones(2, dtype=np.uint8), True, "F")
    tags = [box.pop_round()[0].payload[0] for _ in range(4)]
    assert tags == ["H", "F", "F", "later"]
    with pytest.raises(ProtocolError):
        box.open_stream(2, ("H",), 4)
        box.open_stream(2, ("H",), 4)


# -- node random streams ----------------------------------------------------------------


def test_splitmix_reference_value():
    # first output of the SplitMix64 generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_streams_are_keyed_not_sequential():
    a = NodeStream(7, 3)
    first = [a.u64() for _ in range(3)]
    assert first == [draw_u64(7, 3, i) for i in range(3)]
    # draws of node 4 do not depend on how much node 3 consumed
    assert NodeStream(7, 4).u64() == draw_u64(7, 4, 0)


def test_vectorised_uniforms_match_scalar_stream():
    u = uniform_array(11, np.arange(50), 2)
    for v in range(50):
        s = NodeStream(11, v)
        s.u64(), s.u64()
        assert s.random() == u[v]
