"""Experiment manifests: schema, dispatch to library operations, artifacts."""

from __future__ import annotations

import csv
import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable

import jsonschema

from . import core_diff, hierarchy, measure_sim, ramsey, witness
from .core_diff import FiniteSequence, read_sequence_file
from .dioph import DEFAULT_CAP, HALF, IN, UNKNOWN, PolySpec
from .errors import (BoundExceeded, IterDiffError, MalformedInput, NotFound, PipelineIncomplete,
                     PrecisionExhausted)
from .reals import parse_rational, parse_real
from .serialize import dumps, to_jsonable

EXIT_OK, EXIT_FAILED, EXIT_SCHEMA, EXIT_UNKNOWN = 0, 1, 2, 3

VERDICTS = ["found", "not_found", "verified", "failed", "partial", "computed", "unknown"]

_INT = {"anyOf": [{"type": "integer"}, {"type": "string", "pattern": r"^-?[0-9]+$"}]}
_POS = {"type": "integer", "minimum": 1}
_RAT = {"anyOf": [{"type": "number"},
                  {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+|\.[0-9]+)?$"}]}
_SEQ = {
    "type": "object",
    "oneOf": [
        {"required": ["terms"]},
        {"required": ["file"]},
        {"required": ["kind"]},
    ],
    "properties": {
        "terms": {"type": "array", "items": _INT, "minItems": 1},
        "file": {"type": "string"},
        "kind": {"enum": ["geometric", "fibonacci", "powers", "random"]},
        "count": _POS,
        "base": _POS,
        "start": {"type": "integer", "minimum": 0},
        "scale": _INT,
        "degree": _POS,
        "growth": {"enum": ["lacunary", "polynomial", "mixed"]},
    },
    "additionalProperties": False,
}

# op -> (required inputs, optional inputs)
_OP_INPUTS = {
    "find_delta_witness": ({"sequence": _SEQ, "poly": {"type": "string"}, "epsilon": _RAT,
                            "level": _POS}, {"positive_only": {"type": "boolean"}}),
    "diff_structure": ({"set": _SEQ, "level": _POS, "r": _POS, "bound": _POS},
                       {"node_budget": _POS}),
    "fs_structure": ({"set": _SEQ, "r": _POS}, {"bound": _POS}),
    "square_avoider": ({"alpha": {"type": "string"}, "epsilon": _RAT, "length": _POS},
                       {"scan_bound": _POS, "box": _POS}),
    "even_avoider": ({"poly": {"type": "string"}, "epsilon": _RAT, "level_max": _POS,
                      "length": _POS}, {"scan_bound": _POS, "box": _POS}),
    "highdeg_avoider": ({"poly": {"type": "string"}, "level": _POS, "length": _POS},
                        {"aux": {"type": "array", "items": {"type": "string"}},
                         "scan_bound": _POS, "tolerance_floor": _RAT}),
    "nonsyndetic": ({"count": _POS, "level": _POS}, {"L1": _POS, "R1": _POS}),
    "sarkozy": ({"set": _SEQ, "poly": {"type": "string"}, "N": _POS}, {}),
    "ramsey_bound": ({"level": _POS, "M": _POS, "r": _POS}, {}),
    "monochromatic": ({"coloring": {"type": "object"}, "r": _POS}, {"node_budget": _POS}),
    "cubic_pipeline": ({"alpha": {"type": "string"}, "epsilon": _RAT, "sequence": _SEQ},
                       {"node_budget": _POS}),
    "hierarchy": ({"claim": {"enum": ["strict-inclusion", "powers-of-ten", "lacunary"]}},
                  {"K": _POS, "r": _POS, "bound": _POS, "sequence": _SEQ, "c_bound": _POS}),
    "char_integral": ({"m": _INT, "depth": _POS}, {"bits": _POS}),
    "limit_table": ({"word": {"type": "string", "pattern": "^[01]+$"},
                     "k": {"type": "array", "items": _POS, "minItems": 1}}, {"M": _INT}),
}


def _op_schema(op: str) -> dict:
    required, optional = _OP_INPUTS[op]
    return {
        "if": {"properties": {"op": {"const": op}}},
        "then": {"properties": {"inputs": {
            "type": "object",
            "required": sorted(required),
            "properties": {**required, **optional},
            "additionalProperties": False,
        }}},
    }


EXPERIMENT_SCHEMA = {
    "type": "object",
    "required": ["id", "op", "inputs"],
    "properties": {
        "id": {"type": "string", "pattern": r"^[A-Za-z0-9][A-Za-z0-9._-]*$"},
        "claim": {"type": "string"},
        "op": {"enum": sorted(_OP_INPUTS)},
        "inputs": {"type": "object"},
        "expect": {"enum": VERDICTS},
    },
    "additionalProperties": False,
    "allOf": [_op_schema(op) for op in sorted(_OP_INPUTS)],
}

MANIFEST_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "oneOf": [
        {"type": "array", "items": EXPERIMENT_SCHEMA},
        {
            "type": "object",
            "required": ["experiments"],
            "properties": {
                "name": {"type": "string"},
                "description": {"type": "string"},
                "experiments": {"type": "array", "items": EXPERIMENT_SCHEMA},
            },
            "additionalProperties": False,
        },
    ],
}


class SchemaViolation(Exception):
    pass


@dataclass
class Context:
    base_dir: Path = Path(".")
    precision_cap: int = DEFAULT_CAP
    threads: int = 1
    seed: int = 0
    constants_dir: str | None = None


def random_sequence(rng: random.Random, count: int, growth: str = "mixed") -> tuple[int, ...]:
    """Strictly increasing test sequence.

    ``lacunary`` multiplies by a ratio in [2, 4], ``polynomial`` walks k^e
    for a random exponent in 2..4 with jitter, ``mixed`` picks per step.
    """
    out = [rng.randint(1, 9)]
    exponent = rng.randint(2, 4)
    for k in range(2, count + 1):
        mode = growth if growth != "mixed" else rng.choice(["lacunary", "polynomial"])
        if mode == "lacunary":
            nxt = out[-1] * rng.randint(2, 4) + rng.randint(0, 9)
        else:
            nxt = max(out[-1] + 1, k ** exponent + rng.randint(0, k))
        out.append(nxt)
    return tuple(out)


def build_sequence(spec: dict, ctx: Context, label: str) -> FiniteSequence:
    if "terms" in spec:
        return FiniteSequence(tuple(int(t) for t in spec["terms"]), label)
    if "file" in spec:
        path = Path(spec["file"])
        return read_sequence_file(path if path.is_absolute() else ctx.base_dir / path)
    kind, count = spec["kind"], spec.get("count", 20)
    start = spec.get("start", 1)
    if kind == "geometric":
        base = spec.get("base", 3)
        values = tuple(base ** k for k in range(start, start + count))
    elif kind == "powers":
        degree = spec.get("degree", 2)
        values = tuple(k ** degree for k in range(start, start + count))
    elif kind == "fibonacci":
        scale = int(spec.get("scale", 1))
        a, b, values = 1, 2, []
        for _ in range(count):
            values.append(scale * a)
            a, b = b, a + b
        values = tuple(values)
    else:
        # string seeding is hashed with sha512, so it is stable across runs
        rng = random.Random(f"{ctx.seed}:{label}")
        values = random_sequence(rng, count, spec.get("growth", "mixed"))
    return FiniteSequence(values, f"{label}:{kind}")


def _eps(inputs: dict, hi: Fraction | None = None, strict_hi: Fraction | None = None) -> Fraction:
    eps = parse_rational(str(inputs["epsilon"]))
    if eps <= 0:
        raise SchemaViolation("epsilon must be positive")
    if hi is not None and eps > hi:
        raise SchemaViolation(f"epsilon {eps} exceeds {hi}")
    if strict_hi is not None and eps >= strict_hi:
        raise SchemaViolation(f"epsilon {eps} must be below {strict_hi}")
    return eps


def _found(res) -> str:
    return "not_found" if isinstance(res, NotFound) else "found"


def _cert_verdict(cert) -> str:
    if cert.verified:
        return "verified"
    if any(c.bound is not None and c.bound.verdict == UNKNOWN for c in cert.checks):
        return "unknown"
    return cert.status


def _op_find(inputs, ctx, label):
    s = build_sequence(inputs["sequence"], ctx, label)
    v = PolySpec.parse(inputs["poly"], ctx.constants_dir)
    eps = _eps(inputs, hi=HALF)
    res = witness.find_delta_witness(s, v, eps, inputs["level"], ctx.precision_cap,
                                     ctx.threads, inputs.get("positive_only", True))
    if isinstance(res, NotFound) and res.stats.get("unknown"):
        return res, "unknown"
    return res, _found(res)


def _op_diff(inputs, ctx, label):
    E = build_sequence(inputs["set"], ctx, label).elements
    res = core_diff.contains_diff_structure(E, inputs["level"], inputs["r"], inputs["bound"],
                                            inputs.get("node_budget"))
    return res, _found(res)


def _op_fs(inputs, ctx, label):
    E = build_sequence(inputs["set"], ctx, label).elements
    res = core_diff.contains_fs_structure(E, inputs["r"], inputs.get("bound"))
    return res, _found(res)


def _op_square(inputs, ctx, label):
    eps = _eps(inputs, strict_hi=Fraction(1, 3))
    cert = witness.build_square_avoider(parse_real(inputs["alpha"], ctx.constants_dir), eps,
                                        inputs["length"], inputs.get("scan_bound", 20000),
                                        inputs.get("box", 24), ctx.precision_cap)
    return cert, _cert_verdict(cert)


def _op_even(inputs, ctx, label):
    eps = _eps(inputs, strict_hi=Fraction(1, 3))
    cert = witness.build_even_avoider(PolySpec.parse(inputs["poly"], ctx.constants_dir), eps,
                                      inputs["level_max"], inputs["length"],
                                      inputs.get("scan_bound", 20000), inputs.get("box", 24),
                                      ctx.precision_cap)
    return cert, _cert_verdict(cert)


def _op_highdeg(inputs, ctx, label):
    aux = [parse_real(a, ctx.constants_dir) for a in inputs.get("aux", [])]
    floor = parse_rational(str(inputs.get("tolerance_floor", "1/8")))
    cert = witness.build_high_degree_avoider(PolySpec.parse(inputs["poly"], ctx.constants_dir),
                                             inputs["level"], inputs["length"], aux,
                                             inputs.get("scan_bound", 200000), floor,
                                             ctx.precision_cap)
    return cert, _cert_verdict(cert)


def _op_nonsyndetic(inputs, ctx, label):
    intervals = witness.nonsyndetic_intervals(inputs["count"], inputs.get("L1", 1),
                                              inputs.get("R1", 2))
    cert = witness.build_nonsyndetic_avoider(intervals, inputs["level"])
    return cert, _cert_verdict(cert)


def _op_sarkozy(inputs, ctx, label):
    E = build_sequence(inputs["set"], ctx, label).elements
    res = witness.sarkozy_search(E, PolySpec.parse(inputs["poly"], ctx.constants_dir),
                                 inputs["N"])
    return res, "found" if res.hits else "not_found"


def _op_ramsey_bound(inputs, ctx, label):
    value = ramsey.ramsey_upper_bound(inputs["level"], inputs["M"], inputs["r"])
    return {"bound": value, "bit_length": value.bit_length()}, "computed"


def _op_mono(inputs, ctx, label):
    c = ramsey.Coloring.from_json(inputs["coloring"])
    res = ramsey.monochromatic_search(c, inputs["r"], inputs.get("node_budget", 2_000_000))
    return res, _found(res)


def _op_pipeline(inputs, ctx, label):
    eps = _eps(inputs)
    s = build_sequence(inputs["sequence"], ctx, label)
    rep = ramsey.finitistic_cubic_pipeline(parse_real(inputs["alpha"], ctx.constants_dir), eps,
                                           s, ctx.precision_cap,
                                           inputs.get("node_budget", 2_000_000))
    agrees = rep.direct_check.get("agrees", True)
    return rep, "verified" if rep.verified and agrees else "failed"


def _op_hierarchy(inputs, ctx, label):
    claim = inputs["claim"]
    if claim == "strict-inclusion":
        out = hierarchy.check_strict_inclusion(inputs.get("K", 4), inputs.get("bound"))
        ok = all(g["ok"] for g in out["gaps"]) and not any(
            isinstance(w, NotFound) for w in out["witnesses"].values())
        return out, "verified" if ok else "failed"
    if claim == "powers-of-ten":
        res = hierarchy.check_powers_of_ten(inputs.get("K", 8), inputs.get("r", 3))
        return res, "verified" if isinstance(res, NotFound) else "failed"
    seq = (build_sequence(inputs["sequence"], ctx, label) if "sequence" in inputs
           else FiniteSequence(tuple(3 ** k for k in range(1, 7)), "3^k"))
    res = hierarchy.lacunary_fs_check(seq, 2, inputs.get("c_bound", 200))
    return res, "verified" if isinstance(res.result, NotFound) else "failed"


def _op_char(inputs, ctx, label):
    res = measure_sim.char_integral(int(inputs["m"]), inputs["depth"],
                                    inputs.get("bits", measure_sim.DEFAULT_BITS))
    return res, "computed"


def _op_limits(inputs, ctx, label):
    rows = measure_sim.limit_table([int(b) for b in inputs["word"]], inputs["k"],
                                   int(inputs.get("M", 1)))
    return rows, "computed"


OPS: dict[str, Callable] = {
    "find_delta_witness": _op_find,
    "diff_structure": _op_diff,
    "fs_structure": _op_fs,
    "square_avoider": _op_square,
    "even_avoider": _op_even,
    "highdeg_avoider": _op_highdeg,
    "nonsyndetic": _op_nonsyndetic,
    "sarkozy": _op_sarkozy,
    "ramsey_bound": _op_ramsey_bound,
    "monochromatic": _op_mono,
    "cubic_pipeline": _op_pipeline,
    "hierarchy": _op_hierarchy,
    "char_integral": _op_char,
    "limit_table": _op_limits,
}

DEFAULT_EXPECT = {
    "find_delta_witness": "found",
    "diff_structure": "found",
    "fs_structure": "found",
    "square_avoider": "verified",
    "even_avoider": "verified",
    "highdeg_avoider": "verified",
    "nonsyndetic": "verified",
    "sarkozy": "found",
    "ramsey_bound": "computed",
    "monochromatic": "found",
    "cubic_pipeline": "verified",
    "hierarchy": "verified",
    "char_integral": "computed",
    "limit_table": "computed",
}


def _bits_used(obj, acc: set) -> set:
    if isinstance(obj, dict):
        for k, v in obj.items():
            if k == "bits" and isinstance(v, str) and v.isdigit():
                acc.add(int(v))
            else:
                _bits_used(v, acc)
    elif isinstance(obj, list):
        for v in obj:
            _bits_used(v, acc)
    return acc


@dataclass
class Outcome:
    id: str
    claim: str
    op: str
    expect: str
    verdict: str
    certificate: str
    seconds: float = field(default=0.0, compare=False)

    @property
    def achieved(self) -> bool:
        return self.verdict == self.expect


def run_experiment(exp: dict, ctx: Context) -> Outcome:
    op, inputs = exp["op"], exp["inputs"]
    expect = exp.get("expect", DEFAULT_EXPECT[op])
    started = time.perf_counter()
    try:
        result, verdict = OPS[op](inputs, ctx, exp["id"])
    except (PrecisionExhausted, BoundExceeded, PipelineIncomplete) as exc:
        result = {"error": type(exc).__name__, "message": str(exc),
                  "stats": getattr(exc, "stats", None) or getattr(exc, "coverage", None)}
        verdict = "unknown"
    payload = to_jsonable(result)
    # generated sequences are recorded so certificates can be checked standalone
    resolved = {key: build_sequence(inputs[key], ctx, exp["id"]).elements
                for key in ("sequence", "set") if isinstance(inputs.get(key), dict)}
    doc = {
        "id": exp["id"],
        "claim": exp.get("claim", ""),
        "op": op,
        "inputs": to_jsonable(inputs),
        "expect": expect,
        "verdict": verdict,
        "achieved": verdict == expect,
        "precision_trace": sorted(_bits_used(payload, set())),
        "result": payload,
        "sequences": to_jsonable(resolved),
    }
    return Outcome(exp["id"], exp.get("claim", ""), op, expect, verdict, dumps(doc),
                   time.perf_counter() - started)


def load_manifest(path: Path) -> list[dict]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"cannot read manifest {path}: {exc}") from exc
    try:
        jsonschema.validate(data, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(f"{path}: {exc.message}") from exc
    experiments = data if isinstance(data, list) else data["experiments"]
    ids = [e["id"] for e in experiments]
    if len(set(ids)) != len(ids):
        raise SchemaViolation("experiment ids must be unique")
    for e in experiments:
        if "epsilon" in e["inputs"]:
            # rejects malformed or out-of-range tolerances before any work starts
            try:
                eps = parse_rational(str(e["inputs"]["epsilon"]))
            except MalformedInput as exc:
                raise SchemaViolation(str(exc)) from exc
            if eps <= 0 or (e["op"] == "find_delta_witness" and eps > HALF):
                raise SchemaViolation(f"{e['id']}: epsilon {eps} out of range for {e['op']}")
    return experiments


def bundled_manifests() -> dict[str, Path]:
    root = resources.files("iterdiff") / "manifests"
    return {p.name[:-5]: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


def resolve_manifest(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = bundled_manifests()
    if name in bundled:
        return bundled[name]
    raise SchemaViolation(f"no manifest file or bundled manifest named {name!r}")


def run_manifest(path: Path, out_dir: Path, ctx: Context) -> tuple[int, list[Outcome]]:
    """Run every experiment in manifest order and write one certificate each.

    Returns the exit status: 0 when every expected verdict was reached, 3
    when any experiment ended undecided, 1 otherwise.
    """
    experiments = load_manifest(path)
    ctx.base_dir = path.parent
    if not experiments:
        return EXIT_OK, []
    try:
        if ctx.threads > 1:
            with ThreadPoolExecutor(ctx.threads) as pool:
                outcomes = list(pool.map(lambda e: run_experiment(e, ctx), experiments))
        else:
            outcomes = [run_experiment(e, ctx) for e in experiments]
    except SchemaViolation:
        raise
    except IterDiffError as exc:
        raise SchemaViolation(f"{type(exc).__name__}: {exc}") from exc
    out_dir.mkdir(parents=True, exist_ok=True)
    for o in outcomes:
        (out_dir / f"{o.id}.json").write_text(o.certificate, encoding="utf-8")
    with open(out_dir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "claim", "op", "expect", "verdict", "achieved", "seconds"])
        for o in outcomes:
            w.writerow([o.id, o.claim, o.op, o.expect, o.verdict, o.achieved, f"{o.seconds:.3f}"])
    if any(o.verdict == "unknown" and not o.achieved for o in outcomes):
        return EXIT_UNKNOWN, outcomes
    return (EXIT_OK if all(o.achieved for o in outcomes) else EXIT_FAILED), outcomes
