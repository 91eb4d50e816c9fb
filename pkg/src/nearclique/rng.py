"""Counter-based random streams keyed by ``(seed, node, index)``.

Draw ``i`` of node ``v`` under seed ``s`` is::

    x = splitmix64(splitmix64(splitmix64(s) ^ v) ^ i)

where ``splitmix64`` is the standard SplitMix64 output function (golden-gamma
increment followed by the two xor-shift-multiply rounds).  Uniform floats use
the top 53 bits.  Because every draw is a pure function of its key, a node's
stream does not depend on how many draws any other node made, and the whole
sample of a run can be computed in one vectorised call.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    z = (x + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def _splitmix64_array(x: np.ndarray) -> np.ndarray:
    z = x + np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def draw_u64(seed: int, node: int, index: int) -> int:
    return splitmix64(splitmix64(splitmix64(seed & _MASK) ^ node) ^ index)


def uniform_array(seed: int, nodes, index: int) -> np.ndarray:
    """Draw ``index`` of every node in ``nodes`` as floats in ``[0, 1)``."""
    with np.errstate(over="ignore"):
        base = np.uint64(splitmix64(seed & _MASK))
        x = _splitmix64_array(np.asarray(nodes, dtype=np.uint64) ^ base)
        x = _splitmix64_array(x ^ np.uint64(index))
    return (x >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


class NodeStream:
    """The random stream a single node sees; draws are consumed in order."""

    __slots__ = ("seed", "node", "index")

    def __init__(self, seed: int, node: int):
        self.seed = seed
        self.node = node
        self.index = 0

    def u64(self) -> int:
        x = draw_u64(self.seed, self.node, self.index)
        self.index += 1
        return x

    def random(self) -> float:
        return (self.u64() >> 11) * 2.0 ** -53

    def bernoulli(self, p) -> bool:
        return self.random() < float(p)
