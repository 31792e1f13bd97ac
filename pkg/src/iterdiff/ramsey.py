"""Hypergraph Ramsey bounds, monochromatic subset search, torus cells and the
cubic pipeline that turns a monochromatic 6-set into a quadruple witness."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .core_diff import FiniteSequence, IndexTuple, as_sequence
from .dioph import DEFAULT_CAP, HALF, IN, START_BITS, Mod1Bound, PolySpec, certify, poly_eval_mod1
from .errors import BoundExceeded, MalformedInput, MalformedQuery, NotFound, PipelineIncomplete, TooShort
from .reals import Interval, Rational, scaled
from .witness import find_delta_witness

MAX_BOUND_BITS = 1 << 20


def _ramsey(k: int, r: int, M: int, max_bits: int) -> int:
    if M == 1 or r <= k:
        return max(r, k)
    if k == 1:
        return M * (r - 1) + 1  # pigeonhole
    # Erdos-Rado: an end-homogeneous sequence x_1 < ... < x_m, on which the
    # colour of a k-set depends only on its first k-1 points, induces a
    # colouring of (k-1)-sets of x_1..x_{m-1}. With m - 1 = R(k-1, r-1) that
    # colouring has a monochromatic (r-1)-set, and adding x_m gives an r-set.
    m = _ramsey(k - 1, r - 1, M, max_bits) + 1
    # the product below is at least 2^(C(m-1, k-1) * floor(log2 M))
    if math.comb(m - 1, k - 1) * (M.bit_length() - 1) > max_bits:
        raise BoundExceeded(f"bound for arity {k}, r={r}, M={M} exceeds 2^{max_bits}",
                            {"arity": k, "r": r, "M": M, "inner": m - 1})
    # Greedy construction: pick x_i = min S, then keep the largest class of S
    # under the colours of F + {y}, F ranging over the C(i-1, k-2) new
    # (k-1)-sets containing x_i. need_i is a size of S that guarantees the
    # construction reaches x_m; need_m = 1.
    need = 1
    for i in range(m - 1, 0, -1):
        classes = M ** math.comb(i - 1, k - 2)
        need = (need - 1) * classes + 2
    return need


def ramsey_upper_bound(level: int, M: int, r: int, max_bits: int = MAX_BOUND_BITS) -> int:
    """Certified upper bound on the least R such that every M-colouring of the
    2^level-subsets of [R] has a monochromatic r-set."""
    if level < 1 or M < 1 or r < 1 << level:
        raise MalformedQuery("need level >= 1, M >= 1 and r >= 2**level")
    return _ramsey(1 << level, r, M, max_bits)


@dataclass
class Coloring:
    """Colouring of the ``arity``-subsets of ``1..ground``.

    ``color`` maps a sorted tuple to a colour id; ``None`` marks a subset
    whose colour could not be certified, and such subsets never join a
    monochromatic set.
    """

    ground: int
    arity: int
    color: Callable[[tuple[int, ...]], object]

    @classmethod
    def from_map(cls, ground: int, arity: int, colors: dict) -> "Coloring":
        table = {}
        for key, value in colors.items():
            subset = tuple(sorted(_parse_subset(key)))
            if len(subset) != arity or len(set(subset)) != arity:
                raise MalformedInput(f"subset {key!r} does not have {arity} distinct elements")
            if subset[0] < 1 or subset[-1] > ground:
                raise MalformedInput(f"subset {key!r} leaves the ground set")
            table[subset] = value
        expected = math.comb(ground, arity)
        if len(table) != expected:
            raise MalformedInput(f"colouring covers {len(table)} of {expected} subsets")
        return cls(ground, arity, table.__getitem__)

    @classmethod
    def from_json(cls, data: dict | str) -> "Coloring":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_map(int(data["ground"]), int(data["arity"]), data["colors"])


def _parse_subset(key) -> tuple[int, ...]:
    if isinstance(key, (list, tuple)):
        return tuple(int(x) for x in key)
    text = str(key).strip().strip("[]()")
    return tuple(int(x) for x in text.replace(",", " ").split())


def monochromatic_search(c: Coloring, r: int, node_budget: int = 2_000_000) -> tuple[int, ...] | NotFound:
    """Lex-least r-subset of the ground set with all ``arity``-subsets one colour.

    Exhaustive backtracking; raises BoundExceeded when ``node_budget`` nodes
    are visited without settling the question.
    """
    k = c.arity
    if r > c.ground:
        raise MalformedQuery(f"target size {r} exceeds ground size {c.ground}")
    if r < k:
        return tuple(range(1, r + 1))
    chosen: list[int] = []
    state = {"nodes": 0, "colour": None}

    def fits(x: int) -> bool:
        for head in itertools.combinations(chosen, k - 1):
            col = c.color(head + (x,))
            if col is None:
                return False
            if state["colour"] is None:
                state["colour"] = col
            elif col != state["colour"]:
                return False
        return True

    def extend(start: int) -> bool:
        if len(chosen) == r:
            return True
        for x in range(start, c.ground - (r - len(chosen)) + 2):
            state["nodes"] += 1
            if state["nodes"] > node_budget:
                raise BoundExceeded(f"monochromatic search exceeded {node_budget} nodes",
                                    {"nodes": state["nodes"], "prefix": list(chosen)})
            saved = state["colour"]
            if len(chosen) >= k - 1 and not fits(x):
                state["colour"] = saved
                continue
            chosen.append(x)
            if extend(x + 1):
                return True
            chosen.pop()
            state["colour"] = saved
        return False

    if extend(1):
        return tuple(chosen)
    return NotFound("within_bound", {"nodes": state["nodes"]})


def is_monochromatic(c: Coloring, subset: Sequence[int]) -> bool:
    colours = {c.color(tuple(sorted(s))) for s in itertools.combinations(subset, c.arity)}
    return len(colours) == 1 and None not in colours


def _cell_of(iv: Interval, N: int) -> int | None:
    base = math.floor(iv.lo)
    lo, hi = iv.lo - base, iv.hi - base
    if hi >= 1:
        return None
    cell = math.floor(lo * N)
    return cell if math.floor(hi * N) == cell else None


def cube_cell(point: Sequence, N: int, precision_cap: int = DEFAULT_CAP) -> tuple[int, int, int] | None:
    """Cell (k1, k2, k3) with each coordinate mod 1 in [k/N, (k+1)/N).

    Coordinates may be rationals or refinable reals. Returns None (Unknown)
    when some coordinate stays within its enclosure of a cell boundary up to
    the precision cap.
    """
    if N < 1:
        raise MalformedQuery("N must be >= 1")
    cells = []
    for x in point:
        if isinstance(x, (int, Fraction)):
            cells.append(_cell_of(Interval(Fraction(x)), N))
            continue
        bits, cell = START_BITS, None
        while True:
            iv = x.enclose(bits)
            cell = _cell_of(iv, N)
            if cell is not None or iv.radius == 0 or bits >= precision_cap:
                break
            bits = min(2 * bits, precision_cap)
        cells.append(cell)
    if any(cell is None for cell in cells):
        return None
    return tuple(cells)  # type: ignore[return-value]


def cells_for(eps: Rational) -> int:
    """Least N with 7/N < eps."""
    eps = Fraction(eps)
    if eps <= 0:
        raise MalformedInput("epsilon must be positive")
    return math.floor(7 / eps) + 1


@dataclass
class PipelineReport:
    epsilon: Fraction
    N: int
    mono_set: tuple[int, ...]
    witness_indices: IndexTuple
    values: tuple[int, ...]
    diff_value: int
    inequalities: list[dict]
    final: Mod1Bound
    stats: dict = field(default_factory=dict)
    direct_check: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return all(i["bound"].verdict == IN for i in self.inequalities) and self.final.verdict == IN


def _coord_bound(alpha, m: int, tol: Fraction, cap: int) -> Mod1Bound:
    return certify(lambda bits: alpha.enclose(bits + abs(m).bit_length() + 1) * m, tol, cap)


def finitistic_cubic_pipeline(alpha, eps: Rational, s, precision_cap: int = DEFAULT_CAP,
                              node_budget: int = 2_000_000, cross_check: bool = True) -> PipelineReport:
    """Colour quadruples by torus cells, find a monochromatic 6-set t1<...<t6 and
    certify ‖d^3 alpha‖ < eps for d the difference of (t1, t2, t3, t4).

    With a = n_t2 - n_t1 and b = n_t4 - n_t3 the cells give
    ‖(b^3 - a^3) alpha‖ < 1/N, ‖3 b a^2 alpha‖ < 3/N and ‖3 b^2 a alpha‖ < 3/N,
    and d^3 = b^3 - 3 b^2 a + 3 b a^2 - a^3 closes the bound at 7/N < eps.
    """
    s = as_sequence(s)
    eps = Fraction(eps)
    if len(s) < 6:
        raise TooShort("the pipeline needs at least 6 terms")
    N = cells_for(eps)
    n = (0,) + s.elements  # 1-based
    cache: dict[tuple[int, int, int], object] = {}
    unknown = [0]

    def colour(q: tuple[int, ...]):
        j1, j2, j3 = q[0], q[1], q[2]
        key = (j1, j2, j3)
        if key not in cache:
            g = n[j2] - n[j1]
            point = (scaled(alpha, g ** 3), scaled(alpha, n[j3] * g * g),
                     scaled(alpha, (n[j3] - n[j2]) ** 2 * n[j1]))
            cache[key] = cube_cell(point, N, precision_cap)
            if cache[key] is None:
                unknown[0] += 1
        return cache[key]

    stats = {"N": N, "colours": N ** 3, "length": len(s)}
    try:
        stats["ramsey_bound"] = str(ramsey_upper_bound(2, N ** 3, 6))
    except BoundExceeded as exc:
        stats["ramsey_bound"] = f"exceeds 2^{MAX_BOUND_BITS} ({exc})"
    coloring = Coloring(len(s), 4, colour)
    try:
        mono = monochromatic_search(coloring, 6, node_budget)
    except BoundExceeded as exc:
        raise PipelineIncomplete(f"search budget exhausted: {exc}", {**stats, **exc.coverage})
    stats["cells_computed"] = len(cache)
    stats["unknown_cells"] = unknown[0]
    if not mono:
        stats.update(mono.stats)
        raise PipelineIncomplete("no monochromatic 6-set in the sequence", stats)
    t = mono
    a = n[t[1]] - n[t[0]]
    b = n[t[3]] - n[t[2]]
    third = Fraction(3, N)
    inequalities = [
        {"expr": "(b^3 - a^3)*alpha", "multiplier": b ** 3 - a ** 3, "threshold": Fraction(1, N)},
        {"expr": "3*b*a^2*alpha", "multiplier": 3 * b * a * a, "threshold": third},
        {"expr": "3*b^2*a*alpha", "multiplier": 3 * b * b * a, "threshold": third},
    ]
    for item in inequalities:
        item["bound"] = _coord_bound(alpha, item["multiplier"], item["threshold"], precision_cap)
    d = b - a
    final = _coord_bound(alpha, d ** 3, eps, precision_cap)
    report = PipelineReport(eps, N, t, IndexTuple(2, t[:4]), tuple(n[i] for i in t[:4]), d,
                            inequalities, final, stats)
    if cross_check:
        report.direct_check = pipeline_cross_check(alpha, eps, s, report, precision_cap)
    return report


def pipeline_cross_check(alpha, eps: Fraction, s: FiniteSequence, report: PipelineReport,
                         precision_cap: int = DEFAULT_CAP) -> dict:
    """Compare against the direct quadruple search on the same sequence."""
    direct_eps = min(eps, HALF)
    v = PolySpec.of((3, alpha))
    direct = find_delta_witness(s, v, direct_eps, 2, precision_cap)
    own = poly_eval_mod1(v, report.diff_value, direct_eps, precision_cap) if report.diff_value > 0 else None
    accepted = own is not None and own.verdict == IN
    return {
        "epsilon": direct_eps,
        # both routes must certify a quadruple; a negative pipeline difference
        # lies outside the direct search, which only tries positive ones
        "agrees": bool(direct) and (accepted or report.diff_value <= 0),
        "direct_found": bool(direct),
        "direct_indices": direct.indices.indices if direct else None,
        "pipeline_positive": report.diff_value > 0,
        "pipeline_accepted": accepted,
        "pipeline_bound": own,
    }
