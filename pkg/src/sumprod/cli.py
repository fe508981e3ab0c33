"""Command-line entry point.

Exit status: 0 success, 1 a checked inequality was violated, 2 usage
error, 3 budget or resource error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .dist import DEFAULT_BUDGET, Dist, binomial_law, entropy_of
from .errors import BudgetError, DomainError, PreconditionError, SumprodError, UsageError
from .expr import parse_query, print_query
from .extractor import condense_exact, condense_sampled, plan
from .field import FieldSpec
from .flat import decompose_flat, validate_mixture
from .incidence import (collision_entropy_abc, count_incidences, energy_product_sum,
                        expander_size, koh_construction)
from .rng import substream
from .search import Objective, search as run_search
from .verifier import SUITES, Corpus, dumps_report, gap_uniform, random_dist, run_suite, uniform_set

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


def _read_dist(path, field=None) -> Dist:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return Dist.from_tsv(text, field)


def _write_json(path, obj):
    if path:
        with open(path, "w") as fh:
            fh.write(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def _field_arg(text):
    return FieldSpec.parse(text) if text else None


def _scalars(field, text):
    return [field.parse_scalar(t) for t in text.split(",") if t.strip()]


def cmd_entropy(args) -> int:
    field = _field_arg(args.field)
    bindings = {}
    for b in args.bind:
        name, sep, path = b.partition("=")
        if not sep or not name:
            raise UsageError(f"--bind expects NAME=path, got {b!r}")
        bindings[name] = _read_dist(path, field)
    results = []
    for text in args.queries:
        q = parse_query(text)
        v = entropy_of(q, bindings, field=field, budget=args.budget)
        row = {"query": print_query(q), "bits": v.bits}
        if v.exact is not None:
            row["exact"] = f"{v.exact.numerator}/{v.exact.denominator}"
        results.append(row)
        print(f"{row['query']}\t{v.bits:.6f}")
    _write_json(args.out, {"command": "entropy", "results": results, "version": __version__})
    return EXIT_OK


def cmd_verify(args) -> int:
    corpus = Corpus(structure=args.structure, trials=args.trials, seed=args.seed,
                    fields=tuple(args.fields.split(",")) if args.fields else Corpus().fields)
    report = run_suite(args.suite, corpus)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps_report(report))
    s = report["summary"]
    print(f"suite {args.suite}: {s['trials']} trials, {s['violations']} violations, {s['skipped']} skipped")
    if s.get("warning"):
        print(f"warning: {s['warning']}", file=sys.stderr)
    return EXIT_VIOLATION if s["violations"] else EXIT_OK


def cmd_incidence(args) -> int:
    f = FieldSpec.parse(args.field)
    A, B, C = (_scalars(f, t) for t in (args.A, args.B, args.C))
    n = energy_product_sum(f, A, B, C, args.budget)
    out = {"N": n, "expander": expander_size(f, A, B, C, args.budget),
           "H2": collision_entropy_abc(f, A, B, C, args.budget).bits}
    if args.incidences:
        P, Q = koh_construction(f, A, B, C)
        out["points"], out["planes"] = len(P), len(Q)
        out["incidences"] = count_incidences(f, P, Q, args.budget)
    for k in sorted(out):
        print(f"{k}\t{out[k]}")
    _write_json(args.out, {"command": "incidence", "field": str(f), "values": out})
    return EXIT_OK


def cmd_decompose(args) -> int:
    x = _read_dist(args.dist, _field_arg(args.field))
    mix = decompose_flat(x, args.m)
    problems = validate_mixture(mix, x)
    obj = {"command": "decompose", "mixture": mix.to_json(), "problems": problems}
    print(f"m\t{mix.m}\nparts\t{len(mix.parts)}\nvalid\t{not problems}")
    _write_json(args.out, obj)
    return EXIT_VIOLATION if problems else EXIT_OK


def cmd_extract(args) -> int:
    cp = plan(args.p, Fraction(args.delta))
    obj = {"command": "extract", "plan": cp.to_json(), "mode": args.mode, "seed": args.seed}
    print(f"depth\t{cp.depth}\nleaves\t{cp.leaves}\nleaf_bound\t{cp.leaf_bound}")
    if args.mode != "plan":
        f = FieldSpec.prime(args.p)
        src = _read_dist(args.source, f) if args.source else Dist.uniform(f, range(args.p))
        if args.mode == "exact":
            tr = condense_exact(src, args.rounds if args.rounds is not None else cp.depth, args.budget)
        else:
            tr = condense_sampled(src, cp, args.trials, args.seed)
        obj.update(tr.to_json())
        for lv in tr.levels:
            key = "hmin" if "hmin" in lv else "h2"
            print(f"level {lv['level']}\t{key}\t{lv[key]}")
        if tr.battery:
            print(f"battery_reject\t{tr.battery['reject']}")
    _write_json(args.out, obj)
    return EXIT_OK


def cmd_search(args) -> int:
    field = _field_arg(args.field)
    if args.support:
        d = _read_dist(args.support, field)
        field, support, init = d.field, d.support, [float(m) for m in d.masses]
    elif args.support_list:
        if field is None:
            raise UsageError("--support-list needs --field")
        support, init = _scalars(field, args.support_list), None
    else:
        raise UsageError("give --support or --support-list")
    o = Objective(args.objective, field, tuple(support), Fraction(args.delta))
    res = run_search(o, args.method, args.iters, args.step, args.floor, args.seed, init)
    obj = res.to_json()
    print(f"value\t{res.value}\naudit\t{res.audit}\niterations\t{res.iterations}")
    _write_json(args.out, obj)
    return EXIT_OK


def cmd_gen(args) -> int:
    f = FieldSpec.parse(args.field)
    rng = substream(args.seed, "gen", args.kind)
    if args.kind == "random":
        d = random_dist(rng, f, args.max_support, avoid_zero=args.avoid_zero)
    elif args.kind == "uniform-set":
        d = uniform_set(rng, f, args.max_support, avoid_zero=args.avoid_zero)
    elif args.kind == "GAP-uniform":
        d = gap_uniform(rng, f, args.max_support)
    else:
        d = binomial_law(args.n)
    text = d.to_tsv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sumprod", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("entropy", help="evaluate entropy queries")
    e.add_argument("--field")
    e.add_argument("--bind", action="append", default=[], metavar="NAME=FILE")
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    e.add_argument("--out")
    e.add_argument("queries", nargs="+")
    e.set_defaults(func=cmd_entropy)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--fields")
    v.add_argument("--structure", default="random",
                   choices=["random", "uniform-set", "GAP-uniform", "U-plus-Z"])
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("incidence", help="product-sum energy and point-plane incidences")
    i.add_argument("--field", required=True)
    i.add_argument("--A", required=True)
    i.add_argument("--B", required=True)
    i.add_argument("--C", required=True)
    i.add_argument("--incidences", action="store_true", help="also build points and planes")
    i.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    i.add_argument("--out")
    i.set_defaults(func=cmd_incidence)

    d = sub.add_parser("decompose", help="flat decomposition of a distribution")
    d.add_argument("--dist", required=True)
    d.add_argument("--field")
    d.add_argument("--m", type=int)
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)

    x = sub.add_parser("extract", help="iterate X(Y+Z)")
    x.add_argument("--p", type=int, required=True)
    x.add_argument("--delta", default="1")
    x.add_argument("--mode", choices=["plan", "exact", "sampled"], default="plan")
    x.add_argument("--rounds", type=int)
    x.add_argument("--trials", type=int, default=10_000)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--source")
    x.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    x.add_argument("--out")
    x.set_defaults(func=cmd_extract)

    s = sub.add_parser("search", help="minimise an entropic doubling objective")
    s.add_argument("--objective", default="maxdoubling")
    s.add_argument("--delta", default="1/3")
    s.add_argument("--support", help="distribution file; its masses are the starting point")
    s.add_argument("--support-list")
    s.add_argument("--field")
    s.add_argument("--method", default="pg", choices=["pg", "anneal"])
    s.add_argument("--iters", type=int, default=500)
    s.add_argument("--step", type=float, default=0.05)
    s.add_argument("--floor", type=float, default=1e-9)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    g = sub.add_parser("gen", help="seeded distribution generators")
    g.add_argument("--kind", choices=["random", "uniform-set", "GAP-uniform", "binomial"], default="random")
    g.add_argument("--field", default="Q")
    g.add_argument("--max-support", type=int, default=12)
    g.add_argument("--avoid-zero", action="store_true")
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        return args.func(args)
    except BudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, PreconditionError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SumprodError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
