"""DistNearClique as a CONGEST node program.

Stages, as run by every node:

* sampling: one biased coin from the node's stream;
* exploration: BFS echo-wave trees over ``G[S]`` rooted at component minima,
  pipelined ID gathering and broadcast, one-hop ``Comp`` announcement,
  per-subset ``K_{2eps^2}`` bit vectors, chunk-wise convergecast and broadcast
  of ``|K_{2eps^2}(X)|``, local ``T_eps`` membership and a second convergecast
  of ``|T_eps(X)|``;
* decision: best sizes flow out, ack/abort votes flow back, survivors announce
  their subset and members take the root ID as label.

Nodes only learn which neighbours were sampled from the round-1 start
messages (silence means "not sampled"), and which unsampled neighbours touch
the sample from a round-2 ``PRESENT`` note; afterwards every phase is driven by
message arrival, so a run ends as soon as the last component resolves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction

import numpy as np

from .congest import (TAG_BITS, Outbox, Outcome, Process, ProtocolError, SimConfig,
                      bits_to_ints, fragment_stream, id_bits, ints_to_bits, run_simulation)
from .graph import DEFAULT_ENUMERATION_CAP, EnumerationTooLargeError, Graph, as_fraction, k_membership
from .rng import uniform_array


class Tag(IntEnum):
    JOIN = 0
    ECHO = 1
    PRESENT = 2
    GATHER = 3
    ID = 4
    COMP = 5
    KVEC = 6
    END = 7
    KUP = 8
    KDOWN = 9
    TVEC = 10
    TUP = 11
    BEST = 12
    VOTE = 13
    RESULT = 14
    FRAG = 15

    @property
    def label(self) -> str:
        return f"{PHASES[self]}:{self.name}"


PHASES = {
    Tag.JOIN: "explore.tree", Tag.ECHO: "explore.tree", Tag.PRESENT: "sample",
    Tag.GATHER: "explore.ids", Tag.ID: "explore.ids", Tag.COMP: "explore.comp",
    Tag.KVEC: "explore.kbits", Tag.END: "explore.kbits", Tag.KUP: "explore.kcount",
    Tag.KDOWN: "explore.kcount", Tag.TVEC: "decide.tcount", Tag.TUP: "decide.tcount",
    Tag.BEST: "decide.best", Tag.VOTE: "decide.vote", Tag.RESULT: "decide.result",
    Tag.FRAG: "stream",
}


@dataclass(frozen=True)
class AlgoParams:
    eps: Fraction
    p: float
    min_size: int = 0
    lam: int = 1
    round_cap: int = 0
    cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        object.__setattr__(self, "eps", as_fraction(self.eps))
        if not 0 < self.eps < Fraction(1, 3):
            raise ValueError(f"eps must lie in (0, 1/3), got {self.eps}")
        if not 0 <= float(self.p) <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.lam < 1:
            raise ValueError("lambda must be at least 1")
        if self.min_size < 0 or self.round_cap < 0:
            raise ValueError("min_size and round_cap must be non-negative")


def local_sample(rng, p) -> bool:
    return rng.bernoulli(p)


def sample_set(n: int, p, seed: int, version: int = 0) -> frozenset[int]:
    """The sample every node would draw in ``version`` of a run (vectorised)."""
    coins = uniform_array(seed, np.arange(n), version) < float(p)
    return frozenset(np.flatnonzero(coins).tolist())


def compute_k_bitvector(neighbors, members, eps) -> np.ndarray:
    """Bit ``mask - 1`` is set iff the node is in ``K_{2eps^2}`` of subset ``mask``.

    ``members`` must be sorted; the node's own membership never counts as
    adjacency.
    """
    eps = as_fraction(eps)
    mask = sum(1 << i for i, w in enumerate(members) if w in neighbors)
    return k_membership(np.array([mask]), len(members), 2 * eps * eps)[0].astype(np.uint8)


def boost_repetitions(q, r=Fraction(1, 2)) -> int:
    """``ceil(log_{1-r} q)`` independent versions for failure probability ``q``."""
    q, r = as_fraction(q), as_fraction(r)
    if not 0 < q < 1:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    x = math.log(q) / math.log(1 - r)
    return max(1, math.ceil(x - 1e-9))


class ChunkSum:
    """Chunk-wise sum of several item streams plus a local contribution.

    Chunk ``j`` (items ``[j*size, (j+1)*size)``) becomes ready once the local
    vector is set and every expected source has delivered past its end.
    """

    def __init__(self, length: int, size: int, sources):
        self.length = length
        self.size = size
        self.nchunks = -(-length // size)
        self.total = np.zeros(length, dtype=np.int64)
        self.fill = {s: 0 for s in sources}
        self.own_set = False
        self.next = 0

    def drop(self, src) -> None:
        self.fill.pop(src, None)

    def feed(self, src, offset: int, values) -> None:
        self.total[offset:offset + len(values)] += values
        self.fill[src] = offset + len(values)

    def set_own(self, values) -> None:
        self.total += values
        self.own_set = True

    def ready(self):
        while self.own_set and self.next < self.nchunks:
            end = min((self.next + 1) * self.size, self.length)
            if any(f < end for f in self.fill.values()):
                return
            start = self.next * self.size
            self.next += 1
            yield start, end, self.next == self.nchunks


class CompView:
    """What one node knows about one sampled component it belongs or is adjacent to."""

    def __init__(self, root: int, members: tuple[int, ...], role: str, parent):
        self.root = root
        self.members = members
        self.k = len(members)
        self.length = (1 << self.k) - 1
        self.role = role  # "tree" or "gamma"
        self.parent = parent
        self.kbits = None
        self.nbr_ksum = np.zeros(self.length, dtype=np.int64)
        self.counts = np.zeros(self.length, dtype=np.int64)
        self.counts_fill = 0
        self.counts_done = False
        self.tbits = None
        self.tree_children: tuple[int, ...] = ()
        self.gamma_children: set[int] = set()
        self.kup: ChunkSum | None = None
        self.tup: ChunkSum | None = None
        self.tcounts = None
        self.best_mask = None
        self.best_size = None
        self.votes: dict[int, bool] = {}

    def downstream(self) -> list[int]:
        return sorted(set(self.tree_children) | self.gamma_children)


class VersionState:
    """Per-version exploration state (one instance per boost repetition)."""

    def __init__(self, index: int, start: int, in_s: bool):
        self.index = index
        self.start = start
        self.in_s = in_s
        self.s_nbrs: frozenset[int] | None = None
        self.participants: frozenset[int] | None = None
        self.participating = False
        # tree construction (sampled nodes only)
        self.root = None
        self.dist = None
        self.parent = None
        self.pending: set[int] = set()
        self.children: list[int] = []
        self.echoed = False
        self.tree_done = False
        # ID gathering
        self.ids: list[int] = []
        self.child_ends = 0
        self.comp: tuple[int, ...] | None = None
        self.comp_round: int | None = None  # local round at which comp became known
        self.present_from: set[int] = set()
        # components seen from here
        self.comps: dict[int, CompView] = {}
        self.parent_to_root: dict[int, int] = {}
        self.buffered: dict[int, list] = {}
        self.ends: set[int] = set()
        self.end_sent = False

    @property
    def own(self) -> CompView | None:
        return self.comps.get(self.root) if self.in_s else None

    def comps_complete(self) -> bool:
        if not self.participating:
            return self.s_nbrs is not None
        return self.end_sent


class DistNearCliqueProcess(Process):
    def __init__(self, node, neighbors, rng, n, params: AlgoParams, window: int = 0,
                 forced=None):
        super().__init__(node, neighbors, rng, n)
        self.forced = forced
        self.params = params
        self.window = window
        self.lam = params.lam
        self.L = id_bits(n)
        self.vbits = max(1, (self.lam - 1).bit_length())
        self.nbr_set = frozenset(neighbors)
        self.outbox = Outbox(node)
        self._rx: dict[int, list] = {}
        self.versions: list[VersionState] = []
        self.decision_open = self.lam == 1
        self.best: dict[tuple[int, int], int] = {}
        self.results: dict[tuple[int, int], tuple[bool, int]] = {}
        self.voted = False
        self.round = 0
        eps = params.eps
        self._eps_num, self._eps_den = eps.numerator, eps.denominator

    # -- framework hooks ------------------------------------------------------

    def configure(self, budget: int) -> None:
        self.budget = budget
        if budget < TAG_BITS + 2 * self.L or budget - TAG_BITS - 1 < self.L:
            raise ValueError(f"bit budget {budget} too small for DistNearClique (n={self.n})")
        self.frag_bits = budget - TAG_BITS  # fragment_stream budget (data + continuation)
        self.chunk_items = (budget - TAG_BITS - 1) // self.L

    def start(self):
        self._begin_version(0, 0)
        return self.outbox.pop_round()

    def idle_until(self):
        ver = self.versions[-1]
        rnd = self.round
        wakes = [ver.start + t for t in (1, 2) if ver.start + t > rnd]
        if self.lam > 1 and rnd < self.lam * self.window:
            wakes.append((rnd // self.window + 1) * self.window)
        return min(wakes) if wakes else None

    def step(self, rnd, inbox):
        self.round = rnd
        if self.lam > 1 and rnd % self.window == 0 and rnd <= self.lam * self.window:
            # window boundary: whatever is still in transit belongs to the old version
            self.outbox.clear()
            self._rx.clear()
            if rnd < self.lam * self.window:
                self._begin_version(rnd // self.window, rnd)
            else:
                self._open_decision()
            return self.outbox.pop_round()
        ver = self.versions[-1]
        t = rnd - ver.start
        joins, echoes, rest = [], [], []
        for e in inbox:
            tag = e.payload[0]
            if tag == Tag.JOIN:
                joins.append(e)
            elif tag == Tag.ECHO:
                echoes.append(e)
            elif tag == Tag.PRESENT:
                if t != 2:
                    raise ProtocolError(f"node {self.node}: PRESENT outside round 2")
                ver.present_from.add(e.src)
            else:
                rest.append(e)
        if t == 1:
            self._after_start(ver, joins)
        elif t == 2 and not ver.in_s and ver.participating:
            ver.participants = ver.s_nbrs | frozenset(ver.present_from)
        if ver.in_s and t >= 1:
            self._tree_round(ver, joins, echoes)
        for e in rest:
            self._handle(e)
        return self.outbox.pop_round()

    # -- sampling and start -----------------------------------------------------

    def _begin_version(self, index: int, start: int) -> None:
        in_s = local_sample(self.rng, self.params.p)
        if self.forced is not None:
            in_s = self.node in self.forced[index]
        ver = VersionState(index, start, in_s)
        self.versions.append(ver)
        if in_s:
            for w in self.neighbors:
                self._send(w, (Tag.JOIN, self.node, 0), 2 * self.L)

    def _after_start(self, ver: VersionState, joins) -> None:
        ver.s_nbrs = frozenset(e.src for e in joins)
        if ver.in_s:
            ver.participating = True
            ver.participants = self.nbr_set
            ver.root, ver.dist, ver.parent = self.node, 0, None
            ver.pending = set(ver.s_nbrs)
        elif ver.s_nbrs:
            ver.participating = True
            for w in self.neighbors:
                if w not in ver.s_nbrs:
                    self._send(w, (Tag.PRESENT,), 0)
        elif self.lam == 1:
            self.decide(None)

    # -- transport ------------------------------------------------------------

    def _send(self, dst: int, payload: tuple, field_bits: int) -> None:
        self.outbox.send(dst, payload, TAG_BITS + field_bits)

    def _send_bits(self, dst: int, header: tuple, header_bits: int, bits) -> None:
        frags = fragment_stream(bits, self.frag_bits)
        self.outbox.send_stream(dst, header, TAG_BITS + header_bits, frags, Tag.FRAG)

    def _push_counts(self, dst: int, header: tuple, values, first: bool, last: bool) -> None:
        if first:
            self.outbox.open_stream(dst, header, TAG_BITS)
        self.outbox.push_chunk(dst, ints_to_bits(values, self.L), last, Tag.FRAG)

    # -- tree construction --------------------------------------------------------

    def _tree_round(self, ver: VersionState, joins, echoes) -> None:
        if joins:
            root, dist, src = min((e.payload[1], e.payload[2] + 1, e.src) for e in joins)
            if root < ver.root:
                ver.root, ver.dist, ver.parent = root, dist, src
                ver.pending = set(ver.s_nbrs) - {src}
                ver.children = []
                ver.echoed = False
                for w in sorted(ver.pending):
                    self._send(w, (Tag.JOIN, root, dist), 2 * self.L)
        for e in joins:
            if e.payload[1] == ver.root and e.src != ver.parent:
                ver.pending.discard(e.src)
        for e in echoes:
            if e.payload[1] == ver.root:
                ver.children.append(e.src)
                ver.pending.discard(e.src)
        if not ver.pending and not ver.echoed:
            ver.echoed = True
            ver.children.sort()
            if ver.parent is None:
                ver.tree_done = True
                ver.ids = [self.node]
                for c in ver.children:
                    self._send(c, (Tag.GATHER,), 0)
                self._maybe_ids_complete(ver)
            else:
                self._send(ver.parent, (Tag.ECHO, ver.root), self.L)

    def _maybe_ids_complete(self, ver: VersionState) -> None:
        if ver.child_ends < len(ver.children):
            return
        if ver.parent is not None:
            self._send(ver.parent, (Tag.ID, 0, 1, 0), 2 + self.L)
            return
        comp = tuple(sorted(ver.ids))
        for c in ver.children:
            for w in comp:
                self._send(c, (Tag.ID, 1, 0, w), 2 + self.L)
            self._send(c, (Tag.ID, 1, 1, 0), 2 + self.L)
        self._comp_known(ver, comp)

    def _on_id(self, ver: VersionState, src: int, down: int, end: int, w: int) -> None:
        if down:
            for c in ver.children:
                self._send(c, (Tag.ID, 1, end, w), 2 + self.L)
            if end:
                self._comp_known(ver, tuple(ver.ids))
            else:
                ver.ids.append(w)
        elif end:
            ver.child_ends += 1
            self._maybe_ids_complete(ver)
        elif ver.parent is None:
            ver.ids.append(w)
        else:
            self._send(ver.parent, (Tag.ID, 0, 0, w), 2 + self.L)

    # -- component knowledge --------------------------------------------------

    def _check_cap(self, members) -> None:
        if len(members) > self.params.cap:
            raise EnumerationTooLargeError(
                f"component of size {len(members)} exceeds enumeration cap {self.params.cap}")

    def _comp_known(self, ver: VersionState, comp: tuple[int, ...]) -> None:
        """A sampled node has its whole component; announce it and its K bits."""
        self._check_cap(comp)
        ver.comp = comp
        ver.comp_round = self.round - ver.start
        view = CompView(ver.root, comp, "tree", ver.parent)
        view.tree_children = tuple(ver.children)
        ver.comps[ver.root] = view
        id_stream = ints_to_bits(comp, self.L)
        others = [w for w in self.neighbors if w not in ver.s_nbrs]
        for w in others:
            self._send_bits(w, (Tag.COMP, ver.root), self.L, id_stream)
        view.kbits = compute_k_bitvector(self.nbr_set, comp, self.params.eps)
        view.kup = ChunkSum(view.length, self.chunk_items, list(view.tree_children) + others)
        view.kup.set_own(view.kbits)
        for w in sorted(ver.participants):
            self._send_bits(w, (Tag.KVEC, ver.root, 0), self.L + 1, view.kbits)
        for w in sorted(ver.participants):
            self._send(w, (Tag.END,), 0)
        ver.end_sent = True
        self._replay(ver, view)
        self._flush_kup(ver, view)

    def _learn_comp(self, ver: VersionState, root: int, members: tuple[int, ...]) -> None:
        """An unsampled node hears the ``Comp`` list of an adjacent component."""
        if root in ver.comps:
            return
        self._check_cap(members)
        parent = min(w for w in members if w in ver.s_nbrs)
        view = CompView(root, members, "gamma", parent)
        ver.comps[root] = view
        ver.parent_to_root[parent] = root
        view.kbits = compute_k_bitvector(self.nbr_set, members, self.params.eps)
        for w in sorted(ver.participants):
            self._send_bits(w, (Tag.KVEC, root, int(w == parent)), self.L + 1, view.kbits)
        covered = set()
        for v in ver.comps.values():
            covered.update(v.members)
        if not ver.end_sent and ver.s_nbrs <= covered:
            ver.end_sent = True
            for w in sorted(ver.participants):
                self._send(w, (Tag.END,), 0)
        self._replay(ver, view)
        self._maybe_vote()

    def _replay(self, ver: VersionState, view: CompView) -> None:
        for kind, src, a, b in ver.buffered.pop(view.root, ()):
            if kind == "hdr":
                self._kvec_header(ver, view, src, a)
            else:
                self._kvec_frag(ver, view, src, a, b)

    # -- message dispatch ---------------------------------------------------------

    def _handle(self, e) -> None:
        ver = self.versions[-1]
        tag, src = e.payload[0], e.src
        if tag == Tag.FRAG:
            self._on_frag(ver, src, e.payload[1], e.payload[2])
        elif tag == Tag.GATHER:
            for c in ver.children:
                self._send(c, (Tag.GATHER,), 0)
            self._send(ver.parent, (Tag.ID, 0, 0, self.node), 2 + self.L)
            self._maybe_ids_complete(ver)
        elif tag == Tag.ID:
            self._on_id(ver, src, *e.payload[1:])
        elif tag in (Tag.COMP, Tag.KVEC, Tag.KUP, Tag.KDOWN, Tag.TVEC, Tag.TUP):
            self._rx[src] = [tag, e.payload[1:], 0, []]
            if tag == Tag.KVEC:
                root, child = e.payload[1:]
                if root in ver.comps:
                    self._kvec_header(ver, ver.comps[root], src, child)
                else:
                    ver.buffered.setdefault(root, []).append(("hdr", src, child, None))
        elif tag == Tag.END:
            ver.ends.add(src)
            for view in ver.comps.values():
                self._try_t(ver, view)
        elif tag == Tag.BEST:
            self._on_best(src, *e.payload[1:])
        elif tag == Tag.VOTE:
            self._on_vote(src, *e.payload[1:])
        elif tag == Tag.RESULT:
            self._on_result(src, *e.payload[1:])
        else:
            raise ProtocolError(f"node {self.node}: unexpected {tag!r}")

    def _view_from_parent(self, ver: VersionState, src: int) -> CompView:
        return ver.own if ver.in_s else ver.comps[ver.parent_to_root[src]]

    def _on_frag(self, ver: VersionState, src: int, more: int, bits) -> None:
        rx = self._rx[src]
        kind, meta, offset, acc = rx
        rx[2] = offset + len(bits)
        if not more:
            del self._rx[src]
        if kind == Tag.COMP:
            acc.append(bits)
            if not more:
                members = bits_to_ints(np.concatenate(acc), self.L)
                self._learn_comp(ver, meta[0], tuple(int(x) for x in members))
        elif kind == Tag.KVEC:
            root = meta[0]
            if root in ver.comps:
                self._kvec_frag(ver, ver.comps[root], src, offset, bits)
            else:
                ver.buffered.setdefault(root, []).append(("frag", src, offset, bits))
        elif kind == Tag.KUP:
            view = ver.own
            view.kup.feed(src, offset // self.L, bits_to_ints(bits, self.L))
            self._flush_kup(ver, view)
        elif kind == Tag.KDOWN:
            view = self._view_from_parent(ver, src)
            self._counts_chunk(ver, view, offset // self.L, bits_to_ints(bits, self.L), not more)
        elif kind == Tag.TVEC:
            view = ver.own
            view.tup.feed(src, offset, bits.astype(np.int64))
            self._flush_tup(ver, view)
        elif kind == Tag.TUP:
            view = ver.own
            view.tup.feed(src, offset // self.L, bits_to_ints(bits, self.L))
            self._flush_tup(ver, view)

    # -- K counts ---------------------------------------------------------------

    def _kvec_header(self, ver, view: CompView, src: int, child: int) -> None:
        if view.role == "tree" and src not in ver.s_nbrs:
            if child:
                view.gamma_children.add(src)
            else:
                view.kup.drop(src)
                self._flush_kup(ver, view)

    def _kvec_frag(self, ver, view: CompView, src: int, offset: int, bits) -> None:
        view.nbr_ksum[offset:offset + len(bits)] += bits
        if view.role == "tree" and src in view.gamma_children:
            view.kup.feed(src, offset, bits.astype(np.int64))
            self._flush_kup(ver, view)

    def _flush_kup(self, ver, view: CompView) -> None:
        for start, end, last in view.kup.ready():
            values = view.kup.total[start:end]
            if view.parent is None:
                self._counts_chunk(ver, view, start, values, last)
            else:
                self._push_counts(view.parent, (Tag.KUP,), values, start == 0, last)

    def _counts_chunk(self, ver, view: CompView, start: int, values, last: bool) -> None:
        view.counts[start:start + len(values)] = values
        if view.role == "tree":
            for c in view.downstream():
                self._push_counts(c, (Tag.KDOWN,), values, start == 0, last)
        if last:
            view.counts_done = True
            if view.role == "tree":
                view.tup = ChunkSum(view.length, self.chunk_items, view.downstream())
            self._try_t(ver, view)

    # -- T membership and counts --------------------------------------------------

    def _try_t(self, ver, view: CompView) -> None:
        if view.tbits is not None or not view.counts_done or not ver.ends >= ver.participants:
            return
        num, den = self._eps_num, self._eps_den
        inside = view.kbits.astype(bool)
        view.tbits = (inside & (view.nbr_ksum * den >= (den - num) * view.counts)).astype(np.uint8)
        if view.role == "gamma":
            self._send_bits(view.parent, (Tag.TVEC,), 0, view.tbits)
        else:
            view.tup.set_own(view.tbits.astype(np.int64))
            self._flush_tup(ver, view)

    def _flush_tup(self, ver, view: CompView) -> None:
        for start, end, last in view.tup.ready():
            values = view.tup.total[start:end]
            if view.parent is not None:
                self._push_counts(view.parent, (Tag.TUP,), values, start == 0, last)
            elif last:
                view.tcounts = view.tup.total.copy()
                view.best_mask = int(np.argmax(view.tcounts)) + 1
                view.best_size = int(view.tcounts[view.best_mask - 1])
                if self.decision_open:
                    self._emit_best(ver, view)

    # -- decision -------------------------------------------------------------------

    def _open_decision(self) -> None:
        self.decision_open = True
        for ver in self.versions:
            view = ver.own
            if view is not None and view.parent is None and view.best_size is not None:
                self._emit_best(ver, view)
        if not any(ver.comps for ver in self.versions):
            self.decide(None)
        self._maybe_vote()

    def _emit_best(self, ver, view: CompView) -> None:
        for c in view.downstream():
            self._send(c, (Tag.BEST, ver.index, view.best_size), self.vbits + self.L)
        self.best[(ver.index, view.root)] = view.best_size
        self._maybe_vote()

    def _on_best(self, src: int, index: int, size: int) -> None:
        ver = self.versions[index]
        view = self._view_from_parent(ver, src)
        if view.role == "tree":
            for c in view.downstream():
                self._send(c, (Tag.BEST, index, size), self.vbits + self.L)
        self.best[(index, view.root)] = size
        self._maybe_vote()

    def _keys(self) -> list[tuple[int, int]]:
        return [(ver.index, r) for ver in self.versions for r in ver.comps]

    def _maybe_vote(self) -> None:
        if self.voted or not self.decision_open:
            return
        if len(self.versions) < self.lam or not all(v.comps_complete() for v in self.versions):
            return
        keys = self._keys()
        if not keys or any(k not in self.best for k in keys):
            return
        self.voted = True
        winner = max(keys, key=lambda k: (self.best[k], k[1], k[0]))
        for key in keys:
            ver = self.versions[key[0]]
            view = ver.comps[key[1]]
            abort = int(key != winner)
            if view.role == "tree":
                self._record_vote(ver, view, self.node, abort)
            else:
                self._send(view.parent, (Tag.VOTE, ver.index, abort), self.vbits + 1)

    def _on_vote(self, src: int, index: int, abort: int) -> None:
        ver = self.versions[index]
        self._record_vote(ver, ver.own, src, abort)

    def _record_vote(self, ver, view: CompView, src: int, abort: int) -> None:
        view.votes[src] = bool(abort)
        if len(view.votes) < 1 + len(view.tree_children) + len(view.gamma_children):
            return
        aborted = int(any(view.votes.values()))
        if view.parent is not None:
            self._send(view.parent, (Tag.VOTE, ver.index, aborted), self.vbits + 1)
            return
        survive = 1 - aborted
        for c in view.downstream():
            self._send(c, (Tag.RESULT, ver.index, survive, view.best_mask),
                       self.vbits + 1 + view.k)
        self._record_result(ver, view, survive, view.best_mask)

    def _on_result(self, src: int, index: int, survive: int, mask: int) -> None:
        ver = self.versions[index]
        view = self._view_from_parent(ver, src)
        if view.role == "tree":
            for c in view.downstream():
                self._send(c, (Tag.RESULT, index, survive, mask), self.vbits + 1 + view.k)
        self._record_result(ver, view, survive, mask)

    def _record_result(self, ver, view: CompView, survive: int, mask: int) -> None:
        key = (ver.index, view.root)
        self.results[key] = (bool(survive), mask)
        keys = self._keys()
        if any(k not in self.results for k in keys):
            return
        label = None
        for k in keys:
            ok, m = self.results[k]
            v = self.versions[k[0]].comps[k[1]]
            if ok and v.tbits[m - 1] and self.best[k] >= self.params.min_size:
                if label is not None:
                    raise ProtocolError(f"node {self.node} is in two surviving T sets")
                label = k[1]
        self.decide(label)


def _program(params: AlgoParams, window: int, budget: int, forced=None):
    if forced is not None:
        forced = [frozenset(s) for s in forced]
        if len(forced) != params.lam:
            raise ValueError(f"need {params.lam} forced samples, got {len(forced)}")

    def make(node, neighbors, rng, n):
        proc = DistNearCliqueProcess(node, neighbors, rng, n, params, window, forced)
        proc.configure(budget)
        return proc
    return make


def run_distnearclique(g: Graph, params: AlgoParams, seed: int = 0, *, sample=None,
                       bit_budget: int | None = None, trace=None) -> Outcome:
    """One sampling + exploration + decision run.

    With ``params.round_cap`` set, a run that has not finished by then is
    aborted and every node outputs ⊥.  ``sample`` replaces the coin flips with
    a fixed sampled set (the coins are still drawn, so streams stay aligned).
    """
    if params.lam != 1:
        raise ValueError("use run_boosted for lambda > 1")
    cfg = SimConfig(bit_budget, params.round_cap, seed, trace)
    forced = None if sample is None else [sample]
    out = run_simulation(g, _program(params, 0, cfg.budget(g.n), forced), cfg)
    return _finish(out)


def default_window(n: int, p) -> int:
    """Per-version time bound ``16 * 2^ceil(2pn) + 64`` (sample size at most 2pn)."""
    return 16 * 2 ** math.ceil(2 * float(p) * n) + 64


def run_boosted(g: Graph, params: AlgoParams, seed: int = 0, *, q=None, r=Fraction(1, 2),
                window: int | None = None, samples=None, bit_budget: int | None = None,
                trace=None) -> Outcome:
    """``lambda`` sequential sampling + exploration versions, then one decision stage.

    ``lambda`` is ``params.lam``, or ``ceil(log_{1-r} q)`` when ``q`` is given.
    Version ``i`` owns rounds ``[i*W, (i+1)*W)`` where ``W`` is the window;
    the decision stage starts at ``lambda*W`` and must end within one more
    window, otherwise the run aborts with all nodes at ⊥.
    """
    lam = params.lam if q is None else boost_repetitions(q, r)
    if lam == 1:
        return run_distnearclique(g, AlgoParams(params.eps, params.p, params.min_size, 1,
                                                params.round_cap, params.cap),
                                  seed, sample=None if samples is None else samples[0],
                                  bit_budget=bit_budget, trace=trace)
    window = window or default_window(g.n, params.p)
    params = AlgoParams(params.eps, params.p, params.min_size, lam, 0, params.cap)
    cfg = SimConfig(bit_budget, (lam + 1) * window, seed, trace)
    out = run_simulation(g, _program(params, window, cfg.budget(g.n), samples), cfg)
    out.info["window"] = window
    out.info["lambda"] = lam
    return _finish(out)


def _finish(out: Outcome) -> Outcome:
    procs = out.info["processes"]
    nvers = max(len(p.versions) for p in procs) if procs else 0
    out.info["samples"] = [frozenset(p.node for p in procs
                                     if len(p.versions) > i and p.versions[i].in_s)
                           for i in range(nvers)]
    if out.aborted:
        out.labels = [None] * len(out.labels)
    return out
