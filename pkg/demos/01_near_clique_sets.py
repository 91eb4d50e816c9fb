"""
Near-clique set operations
==========================

Density, the K and T set operators, the core set, and the centralized
reference labelling on a small planted instance.
"""

from fractions import Fraction

from nearclique import centralized_reference, core_set, density, k_eps, planted_near_clique, t_eps

# a 60-node graph with a 30-node plant of density at least 0.99
inst = planted_near_clique(60, Fraction(1, 2), Fraction(1, 100), Fraction(1, 20), seed=4)
g, d = inst.graph, inst.planted
print("planted size", len(d), "density", density(g, d).density)

# K_eps(X): nodes adjacent to a (1 - eps) share of X; a node is not its own neighbour
eps = Fraction(1, 5)
x = sorted(d)[:3]
print("K of three plant nodes:", len(k_eps(g, x, 2 * eps * eps)), "nodes")
print("T of the same three nodes:", len(t_eps(g, x, eps)), "nodes")

# the core of the plant keeps the members adjacent to nearly all of it
print("core size", len(core_set(g, d, eps)), "bound", float((1 - eps) * len(d) - 1 / eps ** 2))

# the reference labelling for a chosen sample: every node gets a root ID or None
labels = centralized_reference(g, x, eps)
print("labelled nodes", sum(lab is not None for lab in labels))
