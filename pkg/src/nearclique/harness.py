"""Seeded experiment campaigns: build instances, run an algorithm, judge the result.

Trial ``i`` of a spec uses seed ``base_seed + i`` for both the instance
generator and the run.  Densities in reports are always recomputed from the
graph.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

from .congest import SimulationError
from .dnc import AlgoParams, default_window, run_boosted, run_distnearclique, sample_set
from .generators import clique_path_clique, gnp, planted_near_clique, read_instance, \
    shingles_gadget
from .graph import Graph, as_fraction, centralized_reference, centralized_reference_multi, density
from .shingles import run_shingles

C_ENG = 16
C_0 = 64
FAMILIES = ("planted", "gadget", "gnp", "cpc", "file")
ALGORITHMS = ("dnc", "shingles", "ref")
PROBABILITY_BOUND = "1 - 1/(eps^2*delta) * exp(-Omega(eps^4*delta*p*n))"


def round_bound(sample_size: int) -> int:
    return C_ENG * 2 ** sample_size + C_0


@dataclass
class ExperimentSpec:
    family: str = "planted"
    n: int = 100
    delta: Fraction = Fraction(1, 2)
    plant_eps: Fraction = Fraction(0)
    background_p: Fraction = Fraction(1, 20)
    gnp_p: Fraction = Fraction(1, 2)
    graph: str = ""
    algorithm: str = "dnc"
    eps: Fraction = Fraction(1, 10)
    p: Fraction = Fraction(1, 20)
    min_size: int = 0
    lam: int = 1
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("delta", "plant_eps", "background_p", "gnp_p", "eps", "p"):
            setattr(self, name, as_fraction(getattr(self, name)))
        for name in ("n", "min_size", "lam", "trials", "seed"):
            setattr(self, name, int(getattr(self, name)))
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.family == "file" and not self.graph:
            raise ValueError("family=file needs a graph path")
        if self.trials < 0:
            raise ValueError("trials must be non-negative")

    @classmethod
    def from_mapping(cls, items: dict) -> "ExperimentSpec":
        items = {("lam" if k == "lambda" else k): v for k, v in items.items()}
        names = {f.name for f in fields(cls)}
        unknown = set(items) - names
        if unknown:
            raise ValueError(f"unknown spec keys: {sorted(unknown)}")
        return cls(**items)

    @classmethod
    def parse(cls, text: str) -> "ExperimentSpec":
        items = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"spec line without '=': {line!r}")
            items[key.strip()] = value.strip()
        return cls.from_mapping(items)

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        return cls.parse(Path(path).read_text(encoding="ascii"))

    def items(self) -> list[tuple[str, str]]:
        return [("lambda" if f.name == "lam" else f.name, str(getattr(self, f.name)))
                for f in fields(self)]

    def dumps(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.items())

    def params(self) -> AlgoParams:
        return AlgoParams(self.eps, self.p, self.min_size, self.lam)


@dataclass
class Instance:
    graph: Graph
    planted: frozenset[int] | None = None
    delta: Fraction | None = None


def build_instance(spec: ExperimentSpec, seed: int) -> Instance:
    if spec.family == "planted":
        inst = planted_near_clique(spec.n, spec.delta, spec.plant_eps, spec.background_p, seed)
        return Instance(inst.graph, inst.planted, inst.delta)
    if spec.family == "gadget":
        gd = shingles_gadget(spec.n, spec.delta)
        return Instance(gd.graph, None, gd.delta)
    if spec.family == "gnp":
        return Instance(gnp(spec.n, spec.gnp_p, seed))
    if spec.family == "cpc":
        return Instance(clique_path_clique(spec.n))
    g, meta, planted = read_instance(spec.graph)
    delta = as_fraction(meta["delta"]) if "delta" in meta else None
    return Instance(g, planted, delta)


# -- verification ---------------------------------------------------------------


@dataclass
class Flags:
    """Success flags of one outcome; ``None`` means the check does not apply."""

    density_bound: bool | None = None   # (a) largest class vs the delta-dependent bound
    size_bound: bool | None = None      # (b) largest class vs the planted size bound
    soundness: bool = True              # (c) every class is (n*eps/|L|)-near
    rounds_bound: bool | None = None    # (d) rounds <= 16 * 2^|S| + 64


def label_classes(labels) -> dict[object, frozenset[int]]:
    out: dict[object, set[int]] = {}
    for v, lab in enumerate(labels):
        if lab is not None:
            out.setdefault(lab, set()).add(v)
    return {k: frozenset(s) for k, s in out.items()}


def largest_class(labels) -> frozenset[int]:
    classes = label_classes(labels)
    if not classes:
        return frozenset()
    return max(classes.values(), key=lambda s: (len(s), -min(s)))


def size_bound(eps, planted_size: int) -> Fraction:
    eps = as_fraction(eps)
    return (1 - Fraction(13, 2) * eps) * planted_size - 1 / (eps * eps)


def density_bound(eps, delta) -> Fraction | None:
    """``1 - eps / ((1 - 13 eps / 2) * delta)``, or ``None`` when ``13 eps / 2 >= 1``."""
    eps, delta = as_fraction(eps), as_fraction(delta)
    scale = 1 - Fraction(13, 2) * eps
    if scale <= 0:
        return None
    return 1 - eps / (scale * delta)


def verify_outcome(g: Graph, labels, eps, *, planted=None, delta=None,
                   rounds: int | None = None, sample_size: int | None = None) -> Flags:
    eps = as_fraction(eps)
    classes = label_classes(labels)
    best = largest_class(labels)
    flags = Flags()
    flags.soundness = all(density(g, c).density >= 1 - g.n * eps / len(c)
                          for c in classes.values())
    if delta is not None:
        bound = density_bound(eps, delta)
        if bound is not None:
            flags.density_bound = bool(best) and density(g, best).density >= bound
    if planted is not None:
        flags.size_bound = bool(best) and len(best) >= size_bound(eps, len(planted))
    if rounds is not None and sample_size is not None:
        flags.rounds_bound = rounds <= round_bound(sample_size)
    return flags


# -- experiments ------------------------------------------------------------------


@dataclass
class TrialRecord:
    seed: int
    sample_size: int | None = None
    rounds: int | None = None
    max_bits: int | None = None
    labeled_size: int = 0
    labeled_density: Fraction | None = None
    flags: Flags = field(default_factory=Flags)
    oracle_match: bool | None = None
    error: str = ""
    labels: list = field(default_factory=list, repr=False)

    def row(self) -> dict[str, str]:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, bool):
                return str(int(x))
            return str(x)
        out = {
            "seed": fmt(self.seed), "sample_size": fmt(self.sample_size),
            "rounds": fmt(self.rounds), "max_bits": fmt(self.max_bits),
            "labeled_size": fmt(self.labeled_size), "labeled_density": fmt(self.labeled_density),
        }
        out.update({f"flag_{k}": fmt(v) for k, v in asdict(self.flags).items()})
        out["oracle_match"] = fmt(self.oracle_match)
        out["error"] = self.error
        return out


ROW_FIELDS = list(TrialRecord(0).row())


def run_trial(spec: ExperimentSpec, index: int) -> TrialRecord:
    seed = spec.seed + index
    rec = TrialRecord(seed)
    try:
        inst = build_instance(spec, seed)
        g = inst.graph
        if spec.algorithm == "shingles":
            res = run_shingles(g, spec.eps, inst.delta or spec.delta, seed)
            labels = res.outcome.labels
            rec.rounds, rec.max_bits = res.outcome.rounds_used, res.outcome.max_envelope_bits
        elif spec.algorithm == "ref":
            samples = [sample_set(g.n, spec.p, seed, i) for i in range(spec.lam)]
            rec.sample_size = max(len(s) for s in samples)
            labels = centralized_reference_multi(g, samples, spec.eps, spec.min_size)
        else:
            params = spec.params()
            out = run_boosted(g, params, seed) if spec.lam > 1 else run_distnearclique(g, params, seed)
            labels = out.labels
            samples = out.info["samples"]
            rec.sample_size = max((len(s) for s in samples), default=0)
            rec.rounds, rec.max_bits = out.rounds_used, out.max_envelope_bits
            if spec.lam > 1:
                ref = centralized_reference_multi(g, samples, spec.eps, spec.min_size)
            else:
                ref = centralized_reference(g, samples[0], spec.eps, spec.min_size)
            rec.oracle_match = ref == labels
        rec.labels = list(labels)
        best = largest_class(labels)
        rec.labeled_size = len(best)
        rec.labeled_density = density(g, best).density if best else None
        lam_rounds = rec.rounds if spec.lam == 1 else None
        rec.flags = verify_outcome(g, labels, spec.eps, planted=inst.planted, delta=inst.delta,
                                   rounds=lam_rounds, sample_size=rec.sample_size)
        if spec.lam > 1 and rec.rounds is not None:
            rec.flags.rounds_bound = rec.rounds <= (spec.lam + 1) * default_window(g.n, spec.p)
    except (ValueError, SimulationError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _rate(values) -> float | None:
    vals = [bool(v) for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def summarize(spec: ExperimentSpec, records: list[TrialRecord]) -> dict[str, object]:
    ok = [r for r in records if not r.error]
    summary: dict[str, object] = {
        "trials": len(records),
        "errors": len(records) - len(ok),
        "rate_density_bound": _rate(r.flags.density_bound for r in ok),
        "rate_size_bound": _rate(r.flags.size_bound for r in ok),
        "rate_soundness": _rate(r.flags.soundness for r in ok),
        "rate_rounds_bound": _rate(r.flags.rounds_bound for r in ok),
        "rate_oracle_match": _rate(r.oracle_match for r in ok),
        "max_rounds": max((r.rounds for r in ok if r.rounds is not None), default=None),
        "max_bits": max((r.max_bits for r in ok if r.max_bits is not None), default=None),
        "max_sample_size": max((r.sample_size for r in ok if r.sample_size is not None),
                               default=None),
        "mean_labeled_size": (sum(r.labeled_size for r in ok) / len(ok)) if ok else None,
    }
    planted_size = math.floor(spec.delta * spec.n) if spec.family == "planted" else None
    summary["theory_size_bound"] = (size_bound(spec.eps, planted_size)
                                    if planted_size is not None else None)
    summary["theory_density_bound"] = (density_bound(spec.eps, spec.delta)
                                       if spec.family in ("planted", "gadget") else None)
    summary["theory_probability_bound"] = PROBABILITY_BOUND
    return summary


def run_experiment(spec: ExperimentSpec) -> tuple[list[TrialRecord], dict[str, object]]:
    records = [run_trial(spec, i) for i in range(spec.trials)]
    return records, summarize(spec, records)


def hard_invariants_hold(records: list[TrialRecord], algorithm: str = "dnc") -> bool:
    """Oracle equivalence and (for near-clique outputs) soundness on every trial.

    Engine violations count as failures.  The shingles baseline carries no
    soundness guarantee, so its flag is reported but not enforced.
    """
    enforce_soundness = algorithm != "shingles"
    for r in records:
        if r.error.startswith(("BudgetViolation", "TopologyViolation", "ProtocolError",
                               "SimulationDeadlock", "SimulationError")):
            return False
        if not r.error and ((enforce_soundness and not r.flags.soundness)
                            or r.oracle_match is False):
            return False
    return True


# -- reports ----------------------------------------------------------------------


def _text(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(round(x, 12))
    return str(x)


def render_report(spec: ExperimentSpec, records: list[TrialRecord], summary: dict,
                  fmt: str = "csv") -> str:
    """Deterministic text report; identical inputs give identical bytes."""
    records = sorted(records, key=lambda r: r.seed)
    if fmt == "json":
        doc = {
            "spec": dict(spec.items()),
            "summary": {k: _text(v) for k, v in summary.items()},
            "trials": [r.row() for r in records],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    for k, v in spec.items():
        buf.write(f"# spec {k}={v}\n")
    for k in sorted(summary):
        buf.write(f"# summary {k}={_text(summary[k])}\n")
    writer = csv.DictWriter(buf, fieldnames=ROW_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def emit_report(path, spec: ExperimentSpec, records: list[TrialRecord], summary: dict,
                fmt: str = "csv") -> Path:
    path = Path(path)
    path.write_text(render_report(spec, records, summary, fmt), encoding="ascii")
    return path


# -- label files ------------------------------------------------------------------


def write_labels(path, labels, header: dict | None = None) -> None:
    lines = [f"# {k}={v}" for k, v in (header or {}).items()]
    lines += [f"{v} {'-' if lab is None else lab}" for v, lab in enumerate(labels)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_labels(path, n: int | None = None) -> tuple[list, dict[str, str]]:
    """Parse ``node label`` lines (``-`` for no label) plus ``# key=value`` comments."""
    header: dict[str, str] = {}
    pairs: dict[int, object] = {}
    for line in Path(path).read_text(encoding="ascii").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                header[key.strip()] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"labels line must be 'node label': {line!r}")
        node = int(parts[0])
        if node in pairs:
            raise ValueError(f"node {node} labelled twice")
        pairs[node] = None if parts[1] == "-" else int(parts[1])
    size = n if n is not None else (max(pairs) + 1 if pairs else 0)
    if any(not 0 <= v < size for v in pairs):
        raise ValueError("label file names a node outside the graph")
    return [pairs.get(v) for v in range(size)], header
