"""
The shingles baseline and its four-block gadget
===============================================

Each node takes the neighbour (or itself) with the smallest random ID as its
label.  On the gadget no choice of the global minimum yields a large dense
labelled set.
"""

from fractions import Fraction

from nearclique import run_shingles, shingles_gadget, shingles_labels, summarize_candidates

eps, delta = Fraction(1, 10), Fraction(1, 2)
gd = shingles_gadget(80, delta)

# minimum inside the first clique: the label set swallows an independent block
res = run_shingles(gd.graph, eps, delta, forced_min=min(gd.c1))
print("largest set", res.rows[0][1], "density", res.rows[0][2], "qualifying", res.qualifying)

# sweep every possible minimum with the centralized form of the same rule
hits = 0
for v in range(gd.graph.n):
    hits += len(summarize_candidates(gd.graph, shingles_labels(gd.graph, forced_min=v),
                                     eps, delta).qualifying)
print("qualifying sets over all", gd.graph.n, "choices:", hits)
