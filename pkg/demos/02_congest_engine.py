"""
A synchronous CONGEST round engine
==================================

A process per node, one envelope per directed link per round, and a hard
per-envelope bit budget.  Here every node floods the smallest ID it has seen.
"""

import io

from nearclique import Envelope, Process, SimConfig, default_budget, gnp, id_bits, run_simulation


class MinFlood(Process):
    """Forward the smallest ID heard so far; decide on a timer at round n."""

    def start(self):
        self.best = self.node
        return self.tell(self.neighbors)

    def tell(self, targets):
        return [Envelope(self.node, w, ("min", self.best), id_bits(self.n)) for w in targets]

    def idle_until(self):
        return self.n

    def step(self, rnd, inbox):
        best = min([self.best] + [e.payload[1] for e in inbox])
        out = []
        if best < self.best:
            self.best = best
            out = self.tell(self.neighbors)
        if rnd >= self.n and not self.decided:
            self.decide(self.best)
        return out


g = gnp(30, 0.15, seed=2)
trace = io.StringIO()
out = run_simulation(g, lambda v, nbrs, rng, n: MinFlood(v, nbrs, rng, n), SimConfig(trace=trace))

# every node of a connected component agrees on its smallest ID; idle rounds are skipped
print("rounds", out.rounds_used, "distinct labels", len(set(out.labels)))
print("bits per envelope", out.max_envelope_bits, "of", default_budget(g.n))

# the trace has one line per delivered envelope: round, src, dst, bits, tag
print(trace.getvalue().splitlines()[0])
