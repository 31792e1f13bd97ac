"""Command-line front end.

Exit codes: 0 success (including a reported NotFound), 1 a manifest claim
was not reached, 2 invalid input or manifest, 3 undecided (precision cap
or search budget exhausted).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import core_diff, hierarchy, measure_sim, ramsey, witness
from .core_diff import FiniteSequence, read_sequence_file
from .dioph import DEFAULT_CAP, HALF, PolySpec
from .errors import (BoundExceeded, IterDiffError, NotFound, PipelineIncomplete,
                     PrecisionExhausted)
from .experiments import (EXIT_SCHEMA, EXIT_UNKNOWN, Context, SchemaViolation,
                          bundled_manifests, resolve_manifest, run_manifest)
from .reals import parse_rational, parse_real
from .serialize import decimal_str, dumps, to_jsonable


class InputError(Exception):
    pass


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError as exc:
        raise InputError(f"not a list of integers: {text!r}") from exc


def _sequence(args, name: str = "sequence") -> FiniteSequence:
    terms = getattr(args, "terms", None)
    path = getattr(args, name, None)
    if (terms is None) == (path is None):
        raise InputError(f"give exactly one of --terms or --{name}")
    if terms is not None:
        return FiniteSequence(_ints(terms), "terms")
    return read_sequence_file(path)


def _rational(text: str) -> Fraction:
    return parse_rational(text)


def _emit(args, obj) -> None:
    text = dumps(obj)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _add_seq_args(p, name="sequence"):
    p.add_argument(f"--{name}", help="file with one integer per line ('#' comments)")
    p.add_argument("--terms", help="comma- or space-separated integers")


# --- diff -----------------------------------------------------------------

def cmd_diff_tuple(args):
    t = _ints(" ".join(args.values))
    return {"values": t, "level": core_diff.level_of(len(t)), "diff": core_diff.iterated_diff(t)}


def cmd_diff_set(args):
    return core_diff.diff_set(_sequence(args), args.level, args.positive_only)


def cmd_diff_contains(args):
    E = _sequence(args, "set").elements
    return core_diff.contains_diff_structure(E, args.level, args.r, args.bound, args.node_budget)


def cmd_diff_fs(args):
    return core_diff.contains_fs_structure(_sequence(args, "set").elements, args.r, args.bound)


# --- witness --------------------------------------------------------------

def cmd_find(args):
    eps = _rational(args.eps)
    if not 0 < eps <= HALF:
        raise InputError("--eps must lie in (0, 1/2]")
    v = PolySpec.parse(args.poly, args.constants_dir)
    return witness.find_delta_witness(_sequence(args), v, eps, args.level, args.precision_cap,
                                      args.threads, not args.allow_nonpositive)


def cmd_avoid_square(args):
    return witness.build_square_avoider(parse_real(args.alpha, args.constants_dir),
                                        _rational(args.eps), args.length, args.scan_bound,
                                        args.box, args.precision_cap)


def cmd_avoid_even(args):
    return witness.build_even_avoider(PolySpec.parse(args.poly, args.constants_dir),
                                      _rational(args.eps), args.level_max, args.length,
                                      args.scan_bound, args.box, args.precision_cap)


def cmd_avoid_highdeg(args):
    aux = [parse_real(a, args.constants_dir) for a in (args.aux or "").split(",") if a]
    return witness.build_high_degree_avoider(PolySpec.parse(args.poly, args.constants_dir),
                                             args.level, args.length, aux, args.scan_bound,
                                             _rational(args.tolerance_floor), args.precision_cap)


def cmd_nonsyndetic(args):
    intervals = witness.nonsyndetic_intervals(args.count, args.L1, args.R1)
    return witness.build_nonsyndetic_avoider(intervals, args.level)


def cmd_sarkozy(args):
    return witness.sarkozy_search(_sequence(args, "set").elements,
                                  PolySpec.parse(args.poly, args.constants_dir), args.N)


# --- ramsey ---------------------------------------------------------------

def cmd_ramsey_bound(args):
    value = ramsey.ramsey_upper_bound(args.level, args.M, args.r)
    return {"level": args.level, "M": args.M, "r": args.r, "bound": value,
            "bit_length": value.bit_length()}


def cmd_ramsey_mono(args):
    try:
        data = json.loads(Path(args.coloring).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read colouring: {exc}") from exc
    c = ramsey.Coloring.from_json(data)
    return ramsey.monochromatic_search(c, args.r, args.node_budget)


def cmd_pipeline(args):
    return ramsey.finitistic_cubic_pipeline(parse_real(args.alpha, args.constants_dir),
                                            _rational(args.eps), _sequence(args),
                                            args.precision_cap, args.node_budget)


# --- hierarchy ------------------------------------------------------------

def cmd_hier_build(args):
    if args.name == "strict-inclusion":
        return hierarchy.strict_inclusion_set(args.K)
    return hierarchy.powers_of_ten_set(args.K)


def cmd_hier_check(args):
    if args.claim == "strict-inclusion":
        return hierarchy.check_strict_inclusion(args.K or 4, args.bound)
    if args.claim == "powers-of-ten":
        return hierarchy.check_powers_of_ten(args.K or 8, args.r)
    if args.claim == "gap":
        return hierarchy.gap_check(hierarchy.strict_inclusion_set(args.K or 4))
    seq = (_sequence(args) if args.terms or args.sequence
           else FiniteSequence(tuple(3 ** k for k in range(1, 7)), "3^k"))
    return hierarchy.lacunary_fs_check(seq, 2, args.c_bound)


# --- measure --------------------------------------------------------------

def cmd_limits(args):
    word = [int(ch) for ch in args.word]
    ks = range(args.k_min, args.k_max + 1)
    rows = measure_sim.limit_table(word, ks, args.M, args.pad_zeros)
    if args.format == "json":
        return rows
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["k", "unknown"]
    for col in ("cubic", "quadratic", "linear"):
        header += [f"{col}_lower", f"{col}_upper", f"{col}_upper_decimal"]
    w.writerow(header + ["cubic_tail_estimate", "cubic_within_bound"])
    for r in rows:
        line = [r.k, r.unknown]
        for b in (r.cubic, r.quadratic, r.linear):
            line += [str(b.lower), str(b.upper), decimal_str(b.upper)]
        w.writerow(line + [str(r.tail_estimate), r.cubic_within_bound])
    return buf.getvalue()


def _interval_doc(iv) -> dict:
    return {"lower": iv.lo, "upper": iv.hi,
            "lower_decimal": decimal_str(iv.lo), "upper_decimal": decimal_str(iv.hi)}


def cmd_char(args):
    res = measure_sim.char_integral(int(args.m), args.depth, args.bits,
                                    _rational(args.target_width) if args.target_width else None,
                                    args.precision_cap)
    return {
        "m": res.m, "depth": res.depth, "bits": res.bits, "flagged": res.flagged,
        "phases": res.phases,
        "product": {"re": _interval_doc(res.product.re), "im": _interval_doc(res.product.im)},
        "tail_bound": res.tail_bound, "tail_bound_decimal": decimal_str(res.tail_bound),
        "value": {"re": _interval_doc(res.value.re), "im": _interval_doc(res.value.im)},
    }


def cmd_point(args):
    p = measure_sim.cantor_point([int(ch) for ch in args.word])
    return {"value": p.value, "value_decimal": decimal_str(p.value),
            "tail_radius": p.tail_radius, "tail_radius_decimal": decimal_str(p.tail_radius),
            "depth": p.depth}


# --- run ------------------------------------------------------------------

def cmd_run(args):
    if args.list:
        for name in sorted(bundled_manifests()):
            print(name)
        return 0
    if not args.manifest:
        raise InputError("run needs a manifest path or bundled name")
    path = resolve_manifest(args.manifest)
    out_dir = Path(args.out_dir) if args.out_dir else Path("iterdiff-out") / path.stem
    ctx = Context(precision_cap=args.precision_cap, threads=args.threads, seed=args.seed,
                  constants_dir=args.constants_dir)
    status, outcomes = run_manifest(path, out_dir, ctx)
    for o in outcomes:
        mark = "ok  " if o.achieved else "FAIL"
        print(f"{mark} {o.id}: expected {o.expect}, got {o.verdict}")
    if outcomes:
        print(f"certificates written to {out_dir}")
    return status


def _global_flags(p, leaf: bool) -> None:
    # leaves repeat the flags without defaults so they may follow the subcommand
    def d(value):
        return argparse.SUPPRESS if leaf else value
    p.add_argument("--precision-cap", type=int, default=d(DEFAULT_CAP), metavar="BITS")
    p.add_argument("--threads", type=int, default=d(1))
    p.add_argument("--seed", type=int, default=d(0),
                   help="seeds random test sequences in manifests; never affects verdicts")
    p.add_argument("--constants-dir", default=d(os.environ.get("ITERDIFF_CONSTANTS")),
                   help="directory of named-constant files (default $ITERDIFF_CONSTANTS)")
    p.add_argument("-o", "--output", default=d(None),
                   help="write the result here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iterdiff", description=__doc__.splitlines()[0])
    _global_flags(p, leaf=False)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("diff", help="iterated differences and structure searches")
    dsub = d.add_subparsers(dest="action", required=True)
    q = dsub.add_parser("tuple")
    q.add_argument("values", nargs="+")
    q.set_defaults(func=cmd_diff_tuple)
    q = dsub.add_parser("set")
    _add_seq_args(q)
    q.add_argument("--level", type=int, required=True)
    q.add_argument("--positive-only", action="store_true")
    q.set_defaults(func=cmd_diff_set)
    q = dsub.add_parser("contains")
    _add_seq_args(q, "set")
    q.add_argument("--level", type=int, required=True)
    q.add_argument("--r", type=int, required=True)
    q.add_argument("--bound", type=int, required=True)
    q.add_argument("--node-budget", type=int)
    q.set_defaults(func=cmd_diff_contains)
    q = dsub.add_parser("fs")
    _add_seq_args(q, "set")
    q.add_argument("--r", type=int, required=True)
    q.add_argument("--bound", type=int)
    q.set_defaults(func=cmd_diff_fs)

    w = sub.add_parser("witness", help="recurrence witnesses and avoiding sequences")
    wsub = w.add_subparsers(dest="action", required=True)
    q = wsub.add_parser("find")
    _add_seq_args(q)
    q.add_argument("--poly", required=True)
    q.add_argument("--eps", required=True)
    q.add_argument("--level", type=int, required=True)
    q.add_argument("--allow-nonpositive", action="store_true")
    q.set_defaults(func=cmd_find)
    q = wsub.add_parser("avoid-square")
    q.add_argument("--alpha", default="sqrt2")
    q.add_argument("--eps", default="1/6")
    q.add_argument("--length", type=int, default=8)
    q.add_argument("--scan-bound", type=int, default=20000)
    q.add_argument("--box", type=int, default=24)
    q.set_defaults(func=cmd_avoid_square)
    q = wsub.add_parser("avoid-even")
    q.add_argument("--poly", required=True)
    q.add_argument("--eps", required=True)
    q.add_argument("--level-max", type=int, required=True)
    q.add_argument("--length", type=int, default=8)
    q.add_argument("--scan-bound", type=int, default=20000)
    q.add_argument("--box", type=int, default=24)
    q.set_defaults(func=cmd_avoid_even)
    q = wsub.add_parser("avoid-highdeg")
    q.add_argument("--poly", required=True)
    q.add_argument("--level", type=int, required=True)
    q.add_argument("--length", type=int, default=8)
    q.add_argument("--aux", help="comma-separated auxiliary constants")
    q.add_argument("--scan-bound", type=int, default=200000)
    q.add_argument("--tolerance-floor", default="1/8")
    q.set_defaults(func=cmd_avoid_highdeg)
    q = wsub.add_parser("nonsyndetic")
    q.add_argument("--count", type=int, default=6)
    q.add_argument("--level", type=int, default=2)
    q.add_argument("--L1", type=int, default=1)
    q.add_argument("--R1", type=int, default=2)
    q.set_defaults(func=cmd_nonsyndetic)
    q = wsub.add_parser("sarkozy")
    _add_seq_args(q, "set")
    q.add_argument("--poly", required=True)
    q.add_argument("--N", type=int, required=True)
    q.set_defaults(func=cmd_sarkozy)

    r = sub.add_parser("ramsey", help="Ramsey bounds, monochromatic sets, cubic pipeline")
    rsub = r.add_subparsers(dest="action", required=True)
    q = rsub.add_parser("bound")
    q.add_argument("--level", type=int, required=True)
    q.add_argument("--M", type=int, required=True)
    q.add_argument("--r", type=int, required=True)
    q.set_defaults(func=cmd_ramsey_bound)
    q = rsub.add_parser("mono")
    q.add_argument("--coloring", required=True, help='JSON {"ground", "arity", "colors"}')
    q.add_argument("--r", type=int, required=True)
    q.add_argument("--node-budget", type=int, default=2_000_000)
    q.set_defaults(func=cmd_ramsey_mono)
    q = rsub.add_parser("cubic-pipeline")
    _add_seq_args(q)
    q.add_argument("--alpha", default="sqrt2")
    q.add_argument("--eps", required=True)
    q.add_argument("--node-budget", type=int, default=2_000_000)
    q.set_defaults(func=cmd_pipeline)

    h = sub.add_parser("hierarchy", help="separating sets")
    hsub = h.add_subparsers(dest="action", required=True)
    q = hsub.add_parser("build")
    q.add_argument("name", choices=["strict-inclusion", "powers-of-ten"])
    q.add_argument("--K", type=int, required=True)
    q.set_defaults(func=cmd_hier_build)
    q = hsub.add_parser("check")
    q.add_argument("claim", choices=["strict-inclusion", "powers-of-ten", "gap", "lacunary"])
    q.add_argument("--K", type=int)
    q.add_argument("--r", type=int, default=3)
    q.add_argument("--bound", type=int)
    q.add_argument("--c-bound", type=int, default=200)
    _add_seq_args(q)
    q.set_defaults(func=cmd_hier_check)

    m = sub.add_parser("measure", help="Cantor map limits and character integrals")
    msub = m.add_subparsers(dest="action", required=True)
    q = msub.add_parser("point")
    q.add_argument("word", help="bit word such as 1011")
    q.set_defaults(func=cmd_point)
    q = msub.add_parser("limits")
    q.add_argument("word")
    q.add_argument("--k-min", type=int, default=1)
    q.add_argument("--k-max", type=int, default=None)
    q.add_argument("--M", type=int, default=1)
    q.add_argument("--pad-zeros", action="store_true")
    q.add_argument("--format", choices=["csv", "json"], default="csv")
    q.set_defaults(func=cmd_limits)
    q = msub.add_parser("char")
    q.add_argument("--m", required=True)
    q.add_argument("--depth", type=int, required=True)
    q.add_argument("--bits", type=int, default=measure_sim.DEFAULT_BITS)
    q.add_argument("--target-width")
    q.set_defaults(func=cmd_char)

    q = sub.add_parser("run", help="run an experiment manifest")
    q.add_argument("manifest", nargs="?", help="path, or the name of a bundled manifest")
    q.add_argument("--out-dir")
    q.add_argument("--list", action="store_true", help="list bundled manifests")
    q.set_defaults(func=cmd_run)

    for leaf in _leaves(p):
        _global_flags(leaf, leaf=True)
    return p


def _leaves(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for child in action.choices.values():
                if any(isinstance(a, argparse._SubParsersAction) for a in child._actions):
                    yield from _leaves(child)
                else:
                    yield child


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "k_max", 0) is None:
        args.k_max = len(args.word)
    try:
        result = args.func(args)
    except (SchemaViolation, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (PrecisionExhausted, BoundExceeded, PipelineIncomplete) as exc:
        _emit(args, {"error": type(exc).__name__, "message": str(exc),
                     "stats": getattr(exc, "stats", None) or getattr(exc, "coverage", None)})
        return EXIT_UNKNOWN
    except IterDiffError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.command == "run":
        return result
    if isinstance(result, str):
        if args.output:
            Path(args.output).write_text(result, encoding="utf-8")
        else:
            sys.stdout.write(result)
    else:
        _emit(args, result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
