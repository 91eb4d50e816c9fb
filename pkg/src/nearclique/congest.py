"""Synchronous CONGEST round engine with exact per-link bit accounting.

A run proceeds in lockstep.  Envelopes produced by ``Process.start`` are
delivered in round 1; envelopes produced while stepping round ``r`` are
delivered in round ``r + 1``.  Every envelope is checked against the topology
and against the per-link budget before it is delivered; violations raise
instead of warning.

Bit sizes are declared, not serialised: a tag costs ``TAG_BITS``, an ID or a
count ``id_bits(n)`` bits, a flag one bit, and a fragment the length of its
bit array.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .graph import Graph
from .rng import NodeStream

TAG_BITS = 4


def id_bits(n: int) -> int:
    """``ceil(log2(n + 1))``: width of a node ID or of a count in ``[0, n]``."""
    return max(1, int(n).bit_length())


def default_budget(n: int) -> int:
    return 8 * id_bits(n)


class SimulationError(RuntimeError):
    pass


class BudgetViolation(SimulationError):
    pass


class TopologyViolation(SimulationError):
    pass


class ProtocolError(SimulationError):
    pass


class SimulationDeadlock(SimulationError):
    """Every undecided node waits for a message that will never arrive."""


class Envelope(NamedTuple):
    src: int
    dst: int
    payload: tuple
    bit_size: int

    @property
    def tag(self):
        return self.payload[0]


@dataclass
class SimConfig:
    bit_budget_per_link: int | None = None
    round_cap: int = 0
    seed: int = 0
    trace: object = None  # writable text stream; one line per delivered envelope

    def budget(self, n: int) -> int:
        b = default_budget(n) if self.bit_budget_per_link is None else self.bit_budget_per_link
        if b < 2 * id_bits(n):
            raise ValueError(f"bit budget {b} cannot hold an ID plus a tag (n={n})")
        return b


@dataclass
class Outcome:
    labels: list
    rounds_used: int
    max_envelope_bits: int
    total_bits: int
    aborted: bool
    envelopes: int = 0
    info: dict = field(default_factory=dict, compare=False, repr=False)


_UNSET = object()


class Process:
    """Base class for a node program.

    Subclasses override ``start`` and ``step``.  ``idle_until`` lets the
    engine skip quiet rounds: return the next round at which the node acts
    without being sent anything, or ``None`` if it only reacts to messages.
    """

    def __init__(self, node: int, neighbors: Sequence[int], rng: NodeStream, n: int):
        self.node = node
        self.neighbors = tuple(neighbors)
        self.rng = rng
        self.n = n
        self._output = _UNSET

    @property
    def decided(self) -> bool:
        return self._output is not _UNSET

    @property
    def output(self):
        return None if self._output is _UNSET else self._output

    def decide(self, label) -> None:
        if self.decided:
            raise ProtocolError(f"node {self.node} rewrote its output")
        self._output = label

    def start(self) -> list[Envelope]:
        return []

    def step(self, rnd: int, inbox: list[Envelope]) -> list[Envelope]:
        return []

    def idle_until(self) -> int | None:
        return None


ProgramFactory = Callable[[int, Sequence[int], NodeStream, int], Process]


def run_simulation(g: Graph, program: ProgramFactory, cfg: SimConfig | None = None) -> Outcome:
    """Run ``program`` on every node of ``g`` until all nodes decide or the cap hits.

    On abort, nodes that never decided report ``None``.
    """
    cfg = cfg or SimConfig()
    n = g.n
    budget = cfg.budget(n)
    procs = [program(v, sorted(g.neighbors(v)), NodeStream(cfg.seed, v), n) for v in range(n)]
    max_bits = total_bits = count = 0
    trace = cfg.trace

    def check(rnd: int, outs: Iterable[Envelope], src: int) -> list[Envelope]:
        outs = list(outs)
        seen = set()
        for e in outs:
            if e.src != src:
                raise ProtocolError(f"node {src} forged an envelope from {e.src}")
            if not g.has_edge(e.src, e.dst):
                raise TopologyViolation(f"round {rnd}: {e.src}->{e.dst} is not an edge")
            if e.dst in seen:
                raise ProtocolError(f"round {rnd}: two envelopes on link {e.src}->{e.dst}")
            seen.add(e.dst)
            if e.bit_size > budget:
                raise BudgetViolation(
                    f"round {rnd}: envelope {e.src}->{e.dst} has {e.bit_size} bits > {budget}")
        return outs

    inflight: list[Envelope] = []
    for p in procs:
        inflight += check(0, p.start(), p.node)
    rnd = 0
    aborted = False
    while not all(p.decided for p in procs):
        if not inflight:
            wakes = [w for p in procs if (w := p.idle_until()) is not None]
            if not wakes:
                if cfg.round_cap:
                    rnd, aborted = cfg.round_cap, True
                    break
                raise SimulationDeadlock(f"round {rnd}: no messages in flight and no timers")
            rnd = max(rnd, min(wakes) - 1)
        rnd += 1
        if cfg.round_cap and rnd > cfg.round_cap:
            rnd, aborted = cfg.round_cap, True
            break
        inboxes: dict[int, list[Envelope]] = {}
        for e in inflight:
            inboxes.setdefault(e.dst, []).append(e)
            total_bits += e.bit_size
            if e.bit_size > max_bits:
                max_bits = e.bit_size
            if trace is not None:
                tag = e.payload[0]
                trace.write(f"{rnd} {e.src} {e.dst} {e.bit_size} {getattr(tag, 'label', getattr(tag, 'name', tag))}\n")
        count += len(inflight)
        inflight = []
        for p in procs:
            inbox = inboxes.get(p.node, [])
            inbox.sort(key=lambda e: e.src)
            inflight += check(rnd, p.step(rnd, inbox), p.node)
    labels = [p.output for p in procs]
    out = Outcome(labels, rnd, max_bits, total_bits, aborted, count)
    out.info["processes"] = procs
    out.info["bit_budget"] = budget
    return out


def collect_metrics(outcome: Outcome) -> list[tuple[str, object]]:
    """Flat ``(name, value)`` report rows, histogram entries sorted by label."""
    rows: list[tuple[str, object]] = [
        ("rounds_used", outcome.rounds_used),
        ("max_envelope_bits", outcome.max_envelope_bits),
        ("total_bits", outcome.total_bits),
        ("envelopes", outcome.envelopes),
        ("aborted", int(outcome.aborted)),
    ]
    hist = Counter("-" if lab is None else lab for lab in outcome.labels)
    for lab in sorted(hist, key=lambda x: (x != "-", x if x != "-" else -1)):
        rows.append((f"label[{lab}]", hist[lab]))
    return rows


# -- fragmentation --------------------------------------------------------------


def fragment_stream(payload, budget: int) -> list[np.ndarray]:
    """Split a bit string into fragments of at most ``budget - 1`` bits.

    One bit of every fragment's budget is the continuation flag carried next
    to it, so a stream of ``b`` bits yields ``ceil(b / (budget - 1))``
    fragments.
    """
    if budget <= 1:
        raise ValueError(f"budget {budget} leaves no room after the continuation bit")
    bits = np.asarray(payload, dtype=np.uint8)
    size = budget - 1
    return [bits[i:i + size] for i in range(0, len(bits), size)]


def reassemble(fragments: Iterable[np.ndarray]) -> np.ndarray:
    parts = list(fragments)
    if not parts:
        return np.zeros(0, dtype=np.uint8)
    return np.concatenate(parts).astype(np.uint8)


def ints_to_bits(values, width: int) -> np.ndarray:
    """Big-endian fixed-width encoding of non-negative integers."""
    v = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((v[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def bits_to_ints(bits, width: int) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64).reshape(-1, width)
    return b @ (1 << np.arange(width - 1, -1, -1, dtype=np.int64))


class Outbox:
    """Per-link FIFO queues that release at most one envelope per link per round.

    A chunked stream (``open_stream`` / ``push_chunk``) keeps its link
    reserved; anything else sent on that link meanwhile is held back and
    released after the stream's last chunk, so streams never interleave.
    """

    def __init__(self, src: int):
        self.src = src
        self._q: dict[int, deque] = {}
        self._held: dict[int, list] = {}
        self._open: set[int] = set()

    def send(self, dst: int, payload: tuple, bits: int) -> None:
        env = Envelope(self.src, dst, payload, bits)
        if dst in self._open:
            self._held.setdefault(dst, []).append(env)
        else:
            self._q.setdefault(dst, deque()).append(env)

    def send_stream(self, dst: int, header: tuple, header_bits: int,
                    fragments: Sequence[np.ndarray], frag_tag) -> None:
        self.send(dst, header, header_bits)
        last = len(fragments) - 1
        for i, frag in enumerate(fragments):
            self.send(dst, (frag_tag, int(i < last), frag), TAG_BITS + 1 + len(frag))

    def open_stream(self, dst: int, header: tuple, header_bits: int) -> None:
        if dst in self._open:
            raise ProtocolError(f"node {self.src}: second open stream towards {dst}")
        self.send(dst, header, header_bits)
        self._open.add(dst)

    def push_chunk(self, dst: int, frag: np.ndarray, last: bool, frag_tag) -> None:
        self._q.setdefault(dst, deque()).append(
            Envelope(self.src, dst, (frag_tag, int(not last), frag), TAG_BITS + 1 + len(frag)))
        if last:
            self._open.discard(dst)
            self._q[dst].extend(self._held.pop(dst, ()))

    def clear(self) -> None:
        self._q.clear()
        self._held.clear()
        self._open.clear()

    def pending(self) -> bool:
        return any(self._q.values())

    def pop_round(self) -> list[Envelope]:
        out = []
        for dst in sorted(self._q):
            q = self._q[dst]
            if q:
                out.append(q.popleft())
        return out
