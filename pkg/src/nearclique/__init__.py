"""Near-clique detection in a simulated CONGEST network.

``graph`` holds the exact set predicates and the centralized reference,
``congest`` the round engine, ``dnc`` the distributed node program,
``shingles`` the baseline, ``generators`` the instance families and
``harness`` the experiment plumbing behind the ``nearclique`` command.
"""
from .congest import (Envelope, Outcome, Process, SimConfig, default_budget, id_bits,
                      run_simulation)
from .dnc import AlgoParams, run_boosted, run_distnearclique, sample_set
from .generators import clique_path_clique, gnp, planted_near_clique, shingles_gadget
from .graph import (Graph, centralized_reference, centralized_reference_multi, core_set, density,
                    k_eps, t_eps)
from .harness import ExperimentSpec, hard_invariants_hold, render_report, run_experiment
from .shingles import run_shingles, shingles_labels, summarize_candidates

__all__ = [
    "AlgoParams", "Envelope", "ExperimentSpec", "Graph", "Outcome", "Process", "SimConfig",
    "centralized_reference", "centralized_reference_multi", "clique_path_clique", "core_set",
    "default_budget", "density", "gnp", "hard_invariants_hold", "id_bits", "k_eps",
    "planted_near_clique", "render_report", "run_boosted", "run_distnearclique",
    "run_experiment", "run_shingles", "run_simulation", "sample_set", "shingles_gadget",
    "shingles_labels", "summarize_candidates", "t_eps",
]
