"""Seeded graph families: planted near-cliques, G(n, p), and two fixed gadgets.

Random instances use numpy's ``Generator(Philox(seed))``.  Edge coins are drawn
in a fixed order (row-major over pairs ``i < j`` of construction indices), so an
instance is a pure function of its parameters and seed.  Portability across
implementations is by instance files, not by reproducing the stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .graph import Graph, as_fraction, density, read_graph, write_graph


@dataclass(frozen=True)
class PlantedInstance:
    graph: Graph
    planted: frozenset[int]
    planted_eps: Fraction
    delta: Fraction


@dataclass(frozen=True)
class ShinglesGadget:
    graph: Graph
    c1: frozenset[int]
    c2: frozenset[int]
    i1: frozenset[int]
    i2: frozenset[int]
    delta: Fraction


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _pair_coins(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    iu, ju = np.triu_indices(n, 1)
    return iu, ju, rng.random(len(iu))


def planted_near_clique(n: int, delta, plant_eps, background_p, seed: int) -> PlantedInstance:
    """Plant a ``plant_eps``-near clique on ``floor(delta * n)`` randomly placed nodes.

    Internal pairs are edges with probability ``1 - plant_eps``; if the realized
    density falls short, missing internal pairs are added in a seeded random
    order until it does not.  All other pairs are edges with probability
    ``background_p``.
    """
    delta = as_fraction(delta)
    plant_eps = as_fraction(plant_eps)
    if not 0 < delta <= 1:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    if not 0 <= plant_eps <= 1:
        raise ValueError(f"plant_eps must be in [0, 1], got {plant_eps}")
    if not 0 <= float(background_p) <= 1:
        raise ValueError(f"background_p must be in [0, 1], got {background_p}")
    d = math.floor(delta * n)
    if d < 2:
        raise ValueError(f"floor(delta * n) = {d}; the plant needs at least 2 nodes")

    rng = _rng(seed)
    perm = rng.permutation(n)
    iu, ju, coins = _pair_coins(rng, n)
    inside = ju < d
    keep_p = float(1 - plant_eps)
    edge = np.where(inside, coins < keep_p, coins < float(background_p))

    # top up internal edges until 2e >= (1 - eps) d (d - 1)
    need = math.ceil((1 - plant_eps) * d * (d - 1) / 2)
    have = int(edge[inside].sum())
    if have < need:
        missing = np.flatnonzero(inside & ~edge)
        order = rng.permutation(len(missing))
        edge[missing[order[: need - have]]] = True

    us, vs = perm[iu[edge]], perm[ju[edge]]
    g = Graph(n, zip(us.tolist(), vs.tolist()))
    planted = frozenset(perm[:d].tolist())
    if not density(g, planted).density >= 1 - plant_eps:
        raise AssertionError("planted set misses its declared density")
    return PlantedInstance(g, planted, plant_eps, delta)


def shingles_gadget(n: int, delta) -> ShinglesGadget:
    """Four blocks ``C1, C2, I1, I2`` (IDs in that order) defeating the shingles rule.

    ``C1`` and ``C2`` are cliques of size ``delta*n/2``, ``I1`` and ``I2`` are
    independent sets of size ``(1-delta)*n/2``, and the pairs ``(I1, C1)``,
    ``(C1, C2)``, ``(C2, I2)`` are complete bipartite.
    """
    delta = as_fraction(delta)
    dn = delta * n
    if not 0 < delta < 1 or dn.denominator != 1 or dn % 2 or n % 2:
        raise ValueError(f"need 0 < delta < 1 with delta*n and n even (n={n}, delta={delta})")
    c = int(dn) // 2
    i = (n - int(dn)) // 2
    c1 = range(0, c)
    c2 = range(c, 2 * c)
    i1 = range(2 * c, 2 * c + i)
    i2 = range(2 * c + i, n)
    edges = []
    for block in (c1, c2):
        edges += [(u, v) for u in block for v in block if u < v]
    for a, b in ((i1, c1), (c1, c2), (c2, i2)):
        edges += [(u, v) for u in a for v in b]
    return ShinglesGadget(Graph(n, edges), frozenset(c1), frozenset(c2),
                          frozenset(i1), frozenset(i2), delta)


def gnp(n: int, p, seed: int) -> Graph:
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    iu, ju, coins = _pair_coins(_rng(seed), n)
    edge = coins < p
    return Graph(n, zip(iu[edge].tolist(), ju[edge].tolist()))


def clique_path_clique(n: int) -> Graph:
    """Clique on ``n/2`` nodes, a path of ``n/4`` nodes, then a clique on ``n/4``."""
    if n <= 0 or n % 4:
        raise ValueError(f"n must be a positive multiple of 4, got {n}")
    a = range(0, n // 2)
    p = range(n // 2, 3 * n // 4)
    b = range(3 * n // 4, n)
    edges = [(u, v) for u in a for v in a if u < v]
    edges += [(u, u + 1) for u in p[:-1]]
    edges += [(u, v) for u in b for v in b if u < v]
    edges += [(a[-1], p[0]), (p[-1], b[0])]
    return Graph(n, edges)


# -- instance files -----------------------------------------------------------


def write_instance(path, g: Graph, meta: dict, planted=None) -> None:
    """Write the edge list to ``path`` plus ``path.meta`` (and ``path.planted``)."""
    path = Path(path)
    write_graph(g, path)
    Path(f"{path}.meta").write_text("".join(f"{k}={v}\n" for k, v in meta.items()),
                                    encoding="ascii")
    if planted is not None:
        Path(f"{path}.planted").write_text("".join(f"{v}\n" for v in sorted(planted)),
                                           encoding="ascii")


def read_meta(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def read_node_set(path) -> frozenset[int]:
    return frozenset(int(tok) for tok in Path(path).read_text(encoding="ascii").split())


def read_instance(path) -> tuple[Graph, dict[str, str], frozenset[int] | None]:
    path = Path(path)
    meta_path, planted_path = Path(f"{path}.meta"), Path(f"{path}.planted")
    meta = read_meta(meta_path) if meta_path.exists() else {}
    planted = read_node_set(planted_path) if planted_path.exists() else None
    return read_graph(path), meta, planted
