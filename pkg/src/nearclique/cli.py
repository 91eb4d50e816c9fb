"""Command line entry point: ``generate``, ``run``, ``verify`` and ``report``.

Exit status is 0 iff every hard invariant held (oracle equivalence and
soundness of near-clique outputs), 1 if one failed and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .generators import clique_path_clique, gnp, planted_near_clique, read_node_set, \
    shingles_gadget, write_instance
from .graph import as_fraction, read_graph
from .harness import ExperimentSpec, hard_invariants_hold, read_labels, render_report, \
    run_experiment, verify_outcome, write_labels


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _add_family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=("planted", "gadget", "gnp", "cpc"), default="planted")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--delta", type=_frac, default=Fraction(1, 2))
    p.add_argument("--plant-eps", type=_frac, default=Fraction(0))
    p.add_argument("--background-p", type=_frac, default=Fraction(1, 20))
    p.add_argument("--gnp-p", type=_frac, default=Fraction(1, 2))


def _add_algo_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=("dnc", "shingles", "ref"), default="dnc")
    p.add_argument("--eps", type=_frac, default=Fraction(1, 10))
    p.add_argument("--p", type=_frac, default=Fraction(1, 20))
    p.add_argument("--min-size", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=int, default=1)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nearclique", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded instance as an edge list")
    _add_family_args(gen)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="edge-list path; .meta/.planted sidecars are added")

    run = sub.add_parser("run", help="run an algorithm over seeded trials")
    _add_family_args(run)
    _add_algo_args(run)
    run.add_argument("--graph", help="edge-list file (overrides --family)")
    run.add_argument("--spec", help="key=value spec file (overrides the flags above)")
    run.add_argument("--labels", help="write labels of the first trial here")
    run.add_argument("--report", help="write a report here")
    run.add_argument("--format", choices=("csv", "json"), default="csv")

    ver = sub.add_parser("verify", help="check a labels file against a graph")
    ver.add_argument("--graph", required=True)
    ver.add_argument("--labels", required=True)
    ver.add_argument("--planted")
    ver.add_argument("--eps", type=_frac, help="defaults to the eps recorded in the labels file")
    ver.add_argument("--delta", type=_frac)

    rep = sub.add_parser("report", help="replay a spec file and print its report")
    rep.add_argument("--spec", required=True)
    rep.add_argument("--format", choices=("csv", "json"), default="csv")
    rep.add_argument("--out", help="write here instead of stdout")
    return parser


def _spec_from_args(args) -> ExperimentSpec:
    if args.spec:
        return ExperimentSpec.load(args.spec)
    n = read_graph(args.graph).n if args.graph else args.n
    return ExperimentSpec(
        family="file" if args.graph else args.family, n=n, delta=args.delta,
        plant_eps=args.plant_eps, background_p=args.background_p, gnp_p=args.gnp_p,
        graph=args.graph or "", algorithm=args.algo, eps=args.eps, p=args.p,
        min_size=args.min_size, lam=args.lam, trials=args.trials, seed=args.seed)


def cmd_generate(args) -> int:
    meta = {"family": args.family, "n": args.n, "seed": args.seed}
    planted = None
    if args.family == "planted":
        inst = planted_near_clique(args.n, args.delta, args.plant_eps, args.background_p, args.seed)
        g, planted = inst.graph, inst.planted
        meta.update(delta=args.delta, plant_eps=args.plant_eps, background_p=args.background_p)
    elif args.family == "gadget":
        g = shingles_gadget(args.n, args.delta).graph
        meta.update(delta=args.delta)
    elif args.family == "gnp":
        g = gnp(args.n, args.gnp_p, args.seed)
        meta.update(p=args.gnp_p)
    else:
        g = clique_path_clique(args.n)
    write_instance(args.out, g, meta, planted)
    print(f"wrote {args.out}: n={g.n} m={g.m}")
    return 0


def cmd_run(args) -> int:
    spec = _spec_from_args(args)
    records, summary = run_experiment(spec)
    if args.labels and records:
        write_labels(args.labels, records[0].labels,
                     {"eps": spec.eps, "p": spec.p, "seed": records[0].seed,
                      "rounds": records[0].rounds, "sample_size": records[0].sample_size})
    text = render_report(spec, records, summary, args.format)
    if args.report:
        Path(args.report).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    for r in records:
        if r.error:
            print(f"trial seed={r.seed}: {r.error}", file=sys.stderr)
    return 0 if hard_invariants_hold(records, spec.algorithm) else 1


def cmd_verify(args) -> int:
    g = read_graph(args.graph)
    labels, header = read_labels(args.labels, g.n)
    if args.eps is not None:
        eps = args.eps
    elif "eps" in header:
        eps = as_fraction(header["eps"])
    else:
        print("verify: --eps is required (the labels file records none)", file=sys.stderr)
        return 2
    planted = read_node_set(args.planted) if args.planted else None
    rounds = int(header["rounds"]) if header.get("rounds", "None") != "None" else None
    sample = int(header["sample_size"]) if header.get("sample_size", "None") != "None" else None
    flags = verify_outcome(g, labels, eps, planted=planted, delta=args.delta,
                           rounds=rounds, sample_size=sample)
    for name, value in vars(flags).items():
        print(f"{name}={'' if value is None else int(value)}")
    return 0 if flags.soundness else 1


def cmd_report(args) -> int:
    spec = ExperimentSpec.load(args.spec)
    records, summary = run_experiment(spec)
    text = render_report(spec, records, summary, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="ascii")
    else:
        sys.stdout.write(text)
    return 0 if hard_invariants_hold(records, spec.algorithm) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"generate": cmd_generate, "run": cmd_run, "verify": cmd_verify,
                "report": cmd_report}[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
