"""
Seeded experiments and reports
==============================

An experiment spec is a small key=value file.  Replaying it gives the same
report byte for byte.  The same spec drives ``nearclique report --spec``.
"""

from nearclique import ExperimentSpec, hard_invariants_hold, render_report, run_experiment

spec = ExperimentSpec.parse("""
family=planted
n=80
delta=1/2
eps=1/10
p=1/16
trials=5
seed=7
""")
records, summary = run_experiment(spec)
print(render_report(spec, records, summary))
print("hard invariants hold:", hard_invariants_hold(records))
print("replay identical:", render_report(spec, *run_experiment(spec)) ==
      render_report(spec, records, summary))
