"""Shingles baseline: every node labels itself with the smallest random ID it sees.

A node draws a 64-bit random ID, streams it to its neighbours (the ID does not
fit one envelope, so it travels as fragments) and then takes as its label the
owner of the smallest ``(random ID, node ID)`` pair among itself and its
neighbours.  Nodes sharing a label form a candidate set.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction

import numpy as np

from .congest import TAG_BITS, Outbox, Outcome, Process, SimConfig, collect_metrics, \
    fragment_stream, run_simulation
from .graph import Graph, as_fraction, density
from .rng import draw_u64

RID_BITS = 64


class ShTag(IntEnum):
    RID = 0
    FRAG = 1

    @property
    def label(self) -> str:
        return f"shingles:{self.name}"


def _rid_bits(rid: int) -> np.ndarray:
    return np.array([(rid >> s) & 1 for s in range(RID_BITS - 1, -1, -1)], dtype=np.uint8)


def _bits_rid(bits) -> int:
    return int.from_bytes(np.packbits(bits).tobytes(), "big")


def random_id(draw: int, node: int, forced_min: int | None) -> int:
    if forced_min is None:
        return draw
    return 0 if node == forced_min else max(draw, 1)


def shingles_labels(g: Graph, seed: int = 0, forced_min: int | None = None) -> list[int]:
    """Centralised evaluation of the labelling rule (no message passing)."""
    rids = [random_id(draw_u64(seed, v, 0), v, forced_min) for v in range(g.n)]
    return [min((rids[w], w) for w in g.neighbors(v) | {v})[1] for v in range(g.n)]


class ShinglesProcess(Process):
    def __init__(self, node, neighbors, rng, n, forced_min, budget):
        super().__init__(node, neighbors, rng, n)
        self.rid = rid = random_id(rng.u64(), node, forced_min)
        self.best = (rid, node)
        self.budget = budget
        self.outbox = Outbox(node)
        self.partial: dict[int, list] = {}
        self.waiting = set(neighbors)

    def start(self):
        frags = fragment_stream(_rid_bits(self.rid), self.budget - TAG_BITS)
        for w in self.neighbors:
            self.outbox.send_stream(w, (ShTag.RID,), TAG_BITS, frags, ShTag.FRAG)
        if not self.neighbors:
            self.decide(self.node)
        return self.outbox.pop_round()

    def step(self, rnd, inbox):
        for e in inbox:
            if e.payload[0] == ShTag.RID:
                self.partial[e.src] = []
                continue
            _, more, bits = e.payload
            self.partial[e.src].append(bits)
            if not more:
                rid = _bits_rid(np.concatenate(self.partial.pop(e.src)))
                self.best = min(self.best, (rid, e.src))
                self.waiting.discard(e.src)
        if not self.waiting and not self.decided:
            self.decide(self.best[1])
        return self.outbox.pop_round()


@dataclass
class ShinglesOutcome:
    candidate_sets: dict[int, frozenset[int]]
    qualifying: list[tuple[int, int, Fraction]]
    outcome: Outcome | None
    rows: list[tuple[int, int, Fraction]]  # every candidate set, larger sets first

    def report_rows(self) -> list[tuple[str, object]]:
        rows = collect_metrics(self.outcome) if self.outcome is not None else []
        for label, size, dens in self.rows:
            rows.append((f"candidate[{label}]", f"{size} {dens}"))
        return rows


def run_shingles(g: Graph, eps, delta, seed: int = 0, forced_min: int | None = None, *,
                 bit_budget: int | None = None, trace=None) -> ShinglesOutcome:
    """Run the shingles rule; ``forced_min`` gives that node the globally smallest ID.

    A candidate set qualifies if it has at least ``(1 - eps) * delta * n`` nodes
    and density at least ``1 - eps``.
    """
    eps, delta = as_fraction(eps), as_fraction(delta)
    if forced_min is not None and not 0 <= forced_min < g.n:
        raise ValueError(f"forced_min {forced_min} is not a node of a graph with n={g.n}")
    cfg = SimConfig(bit_budget, 0, seed, trace)
    budget = cfg.budget(g.n)

    def make(node, neighbors, rng, n):
        return ShinglesProcess(node, neighbors, rng, n, forced_min, budget)

    out = run_simulation(g, make, cfg)
    return summarize_candidates(g, out.labels, eps, delta, out)


def summarize_candidates(g: Graph, labels, eps, delta, outcome: Outcome | None = None
                         ) -> ShinglesOutcome:
    """Group nodes by label and measure each group against the size and density filter."""
    eps, delta = as_fraction(eps), as_fraction(delta)
    sets: dict[int, set[int]] = {}
    for v, lab in enumerate(labels):
        sets.setdefault(lab, set()).add(v)
    cands = {lab: frozenset(s) for lab, s in sets.items()}
    rows = sorted(((lab, len(s), density(g, s).density) for lab, s in cands.items()),
                  key=lambda r: (-r[1], r[0]))
    need = (1 - eps) * delta * g.n
    qualifying = [r for r in rows if r[1] >= need and r[2] >= 1 - eps]
    return ShinglesOutcome(cands, qualifying, outcome, rows)
