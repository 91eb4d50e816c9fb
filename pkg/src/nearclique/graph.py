"""Immutable graphs and exact centralized oracles for near-clique quantities.

Every set-valued quantity used by the distributed algorithm has an exact,
sequential counterpart here: density, ``K_eps``, ``T_eps``, the core set,
components of an induced subgraph, the best-subset search and a full
reference emulation of the exploration and decision stages.

Thresholds of the form ``count >= (1 - eps) * |X|`` are always evaluated on
integers (``count * den >= (den - num) * |X|``) so membership never depends on
floating point rounding.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

NodeSet = frozenset

DEFAULT_ENUMERATION_CAP = 20


class InvalidSetError(ValueError):
    """A node set refers to IDs outside the graph."""


class DegenerateInputError(ValueError):
    """An operation was given an empty set where a nonempty one is required."""


class EnumerationTooLargeError(ValueError):
    """A component is too large for exhaustive subset enumeration."""


class GraphFormatError(ValueError):
    """An edge-list file is malformed."""


def as_fraction(value) -> Fraction:
    """Coerce ``value`` to an exact rational.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10`` rather
    than the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


class Graph:
    """Simple undirected graph on nodes ``0..n-1``."""

    __slots__ = ("n", "m", "_adj", "_matrix")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError("node count must be non-negative")
        adj: list[set[int]] = [set() for _ in range(n)]
        m = 0
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if v in adj[u]:
                raise ValueError(f"parallel edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
            m += 1
        self.n = n
        self.m = m
        self._adj = tuple(frozenset(a) for a in adj)
        self._matrix = None

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Graph":
        a = np.asarray(matrix, dtype=bool)
        if a.shape[0] != a.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if a.diagonal().any() or (a != a.T).any():
            raise ValueError("adjacency matrix must be symmetric with empty diagonal")
        us, vs = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], zip(us.tolist(), vs.tolist()))

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def edges(self) -> list[tuple[int, int]]:
        """Edges as sorted ``(u, v)`` pairs with ``u < v``."""
        return sorted((u, v) for u in range(self.n) for v in self._adj[u] if u < v)

    @property
    def matrix(self) -> np.ndarray:
        """Read-only boolean adjacency matrix (built lazily)."""
        if self._matrix is None:
            a = np.zeros((self.n, self.n), dtype=bool)
            for u, nb in enumerate(self._adj):
                if nb:
                    a[u, list(nb)] = True
            a.flags.writeable = False
            self._matrix = a
        return self._matrix

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with node ``v`` renamed to ``perm[v]``."""
        return Graph(self.n, ((perm[u], perm[v]) for u, v in self.edges()))

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self._adj == other._adj

    def __hash__(self):
        return hash((self.n, self._adj))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _check_set(g: Graph, d: Iterable[int]) -> frozenset[int]:
    d = frozenset(int(v) for v in d)
    bad = [v for v in d if not 0 <= v < g.n]
    if bad:
        raise InvalidSetError(f"node IDs {sorted(bad)} out of range for n={g.n}")
    return d


def _nonempty(g: Graph, x: Iterable[int]) -> frozenset[int]:
    x = _check_set(g, x)
    if not x:
        raise DegenerateInputError("the set must be nonempty")
    return x


@dataclass(frozen=True)
class DensityReport:
    set_size: int
    directed_internal_pairs: int
    density: Fraction
    epsilon_equivalent: Fraction

    def is_near_clique(self, eps) -> bool:
        return self.density >= 1 - as_fraction(eps)


def density(g: Graph, d: Iterable[int]) -> DensityReport:
    """Directed-pair density of ``d``; sets of size 0 or 1 have density 1."""
    d = _check_set(g, d)
    pairs = sum(len(g.neighbors(v) & d) for v in d)
    size = len(d)
    dens = Fraction(pairs, size * (size - 1)) if size >= 2 else Fraction(1)
    return DensityReport(size, pairs, dens, 1 - dens)


def k_eps(g: Graph, x: Iterable[int], eps) -> frozenset[int]:
    """Nodes adjacent to at least a ``1 - eps`` fraction of ``x``."""
    x = _nonempty(g, x)
    eps = as_fraction(eps)
    counts = g.matrix[:, sorted(x)].sum(axis=1)
    num, den = eps.numerator, eps.denominator
    keep = counts * den >= (den - num) * len(x)
    return frozenset(np.flatnonzero(keep).tolist())


def t_eps(g: Graph, x: Iterable[int], eps) -> frozenset[int]:
    """``K_eps(K_{2 eps^2}(x)) ∩ K_{2 eps^2}(x)``.

    An empty inner set yields the empty result (``K`` of nothing is not
    evaluated).
    """
    eps = as_fraction(eps)
    inner = k_eps(g, x, 2 * eps * eps)
    if not inner:
        return frozenset()
    return k_eps(g, inner, eps) & inner


def core_set(g: Graph, d: Iterable[int], eps) -> frozenset[int]:
    """Members of ``d`` adjacent to all but an ``eps^2`` fraction of ``d``."""
    d = _nonempty(g, d)
    eps = as_fraction(eps)
    return k_eps(g, d, eps * eps) & d


def induced_components(g: Graph, s: Iterable[int]) -> list[frozenset[int]]:
    """Connected components of ``G[s]``, ordered by smallest member."""
    s = _check_set(g, s)
    seen: set[int] = set()
    comps = []
    for root in sorted(s):
        if root in seen:
            continue
        seen.add(root)
        stack, comp = [root], [root]
        while stack:
            v = stack.pop()
            for w in g.neighbors(v) & s:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
                    comp.append(w)
        comps.append(frozenset(comp))
    return comps


# -- subset enumeration -----------------------------------------------------
#
# Subsets of a component are bitmasks over its members sorted by ascending ID
# (bit i <-> i-th smallest member); mask 0 (the empty set) is never used, so a
# vector over subsets has length 2^k - 1 and position ``mask - 1``.


@lru_cache(maxsize=None)
def popcounts(k: int) -> np.ndarray:
    """``popcounts(k)[mask]`` is the number of set bits of ``mask < 2^k``."""
    table = np.zeros(1 << k, dtype=np.uint8)
    for i in range(k):
        step = 1 << i
        table[step:2 * step] = table[:step] + 1
    table.flags.writeable = False
    return table


def subset_members(members: Sequence[int], mask: int) -> frozenset[int]:
    return frozenset(v for i, v in enumerate(members) if mask >> i & 1)


def neighbor_masks(g: Graph, members: Sequence[int]) -> np.ndarray:
    """Per node, the bitmask of ``members`` it is adjacent to."""
    weights = np.array([1 << i for i in range(len(members))], dtype=np.int64)
    return g.matrix[:, list(members)].astype(np.int64) @ weights


def k_membership(masks: np.ndarray, k: int, eps) -> np.ndarray:
    """Boolean ``(len(masks), 2^k - 1)`` matrix: node ``i`` in ``K_eps(X_mask)``.

    ``masks[i]`` is the bitmask of component members adjacent to node ``i``.
    """
    eps = as_fraction(eps)
    num, den = eps.numerator, eps.denominator
    pc = popcounts(k)
    subsets = np.arange(1, 1 << k, dtype=np.int64)
    need = (den - num) * pc[1:].astype(np.int64)
    out = np.empty((len(masks), len(subsets)), dtype=bool)
    for i, m in enumerate(np.asarray(masks, dtype=np.int64)):
        out[i] = pc[subsets & m].astype(np.int64) * den >= need
    return out


def subset_t_sizes(g: Graph, members: Sequence[int], eps) -> tuple[np.ndarray, np.ndarray]:
    """``(|K_{2eps^2}(X)|, |T_eps(X)|)`` for every nonempty subset ``X`` of ``members``."""
    eps = as_fraction(eps)
    k = len(members)
    kbits = k_membership(neighbor_masks(g, members), k, 2 * eps * eps)
    k_sizes = kbits.sum(axis=0)
    # float32 products are exact: every entry is an integer <= n < 2^24
    nbr_in_k = (g.matrix.astype(np.float32) @ kbits.astype(np.float32)).astype(np.int64)
    num, den = eps.numerator, eps.denominator
    tbits = kbits & (nbr_in_k * den >= (den - num) * k_sizes[None, :].astype(np.int64))
    return k_sizes.astype(np.int64), tbits.sum(axis=0).astype(np.int64)


def best_subset(g: Graph, s_i: Iterable[int], eps, cap: int = DEFAULT_ENUMERATION_CAP
                ) -> tuple[frozenset[int], frozenset[int]]:
    """Nonempty ``X ⊆ s_i`` maximising ``|T_eps(X)|``; ties go to the smallest mask."""
    s_i = _nonempty(g, s_i)
    if len(s_i) > cap:
        raise EnumerationTooLargeError(f"|S_i| = {len(s_i)} exceeds enumeration cap {cap}")
    members = sorted(s_i)
    _, t_sizes = subset_t_sizes(g, members, eps)
    mask = int(np.argmax(t_sizes)) + 1
    x = subset_members(members, mask)
    return x, t_eps(g, x, eps)


@dataclass(frozen=True)
class Candidate:
    """The best ``T_eps`` set grown from one sampled component."""

    root: int
    component: frozenset[int]
    x: frozenset[int]
    t: frozenset[int]
    version: int = 0

    @property
    def rank(self) -> tuple[int, int, int]:
        return (len(self.t), self.root, self.version)


def component_candidates(g: Graph, s: Iterable[int], eps, version: int = 0,
                         cap: int = DEFAULT_ENUMERATION_CAP) -> list[Candidate]:
    out = []
    for comp in induced_components(g, s):
        x, t = best_subset(g, comp, eps, cap)
        out.append(Candidate(min(comp), comp, x, t, version))
    return out


def resolve_candidates(g: Graph, candidates: Sequence[Candidate], min_size: int = 0
                       ) -> list[int | None]:
    """Apply the ack/abort rule and return per-node labels (``None`` is ⊥).

    Every node in or adjacent to a candidate's component votes for the
    adjacent candidate with the largest ``(|T|, root, version)`` and aborts
    the rest; a candidate survives iff nobody aborted it.
    """
    voters: dict[int, list[Candidate]] = {}
    for c in candidates:
        touched = set(c.component)
        for v in c.component:
            touched |= g.neighbors(v)
        for u in touched:
            voters.setdefault(u, []).append(c)
    aborted = set()
    for cands in voters.values():
        best = max(cands, key=lambda c: c.rank)
        aborted.update(c.rank for c in cands if c is not best)
    labels: list[int | None] = [None] * g.n
    for c in candidates:
        if c.rank in aborted or len(c.t) < min_size:
            continue
        for v in c.t:
            if labels[v] is not None:
                raise AssertionError(f"node {v} claimed by two surviving candidates")
            labels[v] = c.root
    return labels


def centralized_reference(g: Graph, s: Iterable[int], eps, min_size: int = 0,
                          cap: int = DEFAULT_ENUMERATION_CAP) -> list[int | None]:
    """Sequential emulation of exploration + decision for a realized sample ``s``."""
    s = _check_set(g, s)
    return resolve_candidates(g, component_candidates(g, s, eps, cap=cap), min_size)


def centralized_reference_multi(g: Graph, samples: Sequence[Iterable[int]], eps,
                                min_size: int = 0, cap: int = DEFAULT_ENUMERATION_CAP
                                ) -> list[int | None]:
    """Reference for the boosted run: candidates of all versions compete at once."""
    cands = []
    for version, s in enumerate(samples):
        cands.extend(component_candidates(g, _check_set(g, s), eps, version, cap))
    return resolve_candidates(g, cands, min_size)


# -- edge-list files ----------------------------------------------------------


def write_graph(g: Graph, path) -> None:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_graph(path) -> Graph:
    """Load ``n m`` followed by ``m`` lines ``u v`` with ``u < v``."""
    rows = [ln.split() for ln in Path(path).read_text(encoding="ascii").splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise GraphFormatError("header must be 'n m'")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        pairs = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise GraphFormatError(f"bad integer or line shape: {exc}") from None
    if len(pairs) != m:
        raise GraphFormatError(f"header declares {m} edges, found {len(pairs)}")
    seen = set()
    for u, v in pairs:
        if not 0 <= u < v < n:
            raise GraphFormatError(f"edge line '{u} {v}' violates 0 <= u < v < n")
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate edge '{u} {v}'")
        seen.add((u, v))
    return Graph(n, pairs)
