"""Witness searches over finite sequences and constructions of avoiding sequences.

A witness is an index tuple whose iterated difference lands in
``{n : ||v(n)|| < eps}``. Avoider constructions build sequences whose
iterated differences all stay away from that set, and emit certificates that
check every tuple exactly.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core_diff import FiniteSequence, IndexTuple, as_sequence, diff_signs
from .dioph import (DEFAULT_CAP, HALF, IN, UNKNOWN, Condition, Mod1Bound, PolySpec,
                    cf_convergents, dist_interval, poly_eval_mod1, simultaneous_search)
from .errors import MalformedInput, MalformedQuery, NotFound, TooShort
from .reals import ExactRational, Rational, is_exact, scaled


@dataclass
class WitnessReport:
    indices: IndexTuple
    values: tuple[int, ...]
    diff_value: int
    bound: Mod1Bound
    poly: PolySpec
    epsilon: Fraction
    candidates_examined: int
    unknown: int = 0
    nonpositive_skipped: int = 0
    sequence_id: str = ""


def _tuple_search(s: FiniteSequence, v: PolySpec, eps: Fraction, level: int,
                  first: int, cap: int, positive_only: bool):
    """Lex-first hit among tuples whose first index is ``first`` (0-based)."""
    k = 1 << level
    signs = diff_signs(level)
    elems = s.elements
    examined = unknown = skipped = 0
    for rest in itertools.combinations(range(first + 1, len(elems)), k - 1):
        idx = (first,) + rest
        examined += 1
        d = sum(c * elems[i] for c, i in zip(signs, idx))
        if positive_only and d <= 0:
            skipped += 1
            continue
        bound = poly_eval_mod1(v, d, eps, cap)
        if bound.verdict == IN:
            return (idx, d, bound), examined, unknown, skipped
        if bound.verdict == UNKNOWN:
            unknown += 1
    return None, examined, unknown, skipped


def find_delta_witness(s, v: PolySpec, eps: Rational, level: int,
                       precision_cap: int = DEFAULT_CAP, threads: int = 1,
                       positive_only: bool = True) -> WitnessReport | NotFound:
    """Lex-least index tuple whose iterated difference d has ‖v(d)‖ < eps.

    Differences must be positive unless ``positive_only`` is cleared, since
    the target set lives in the positive integers. Unknown verdicts are
    counted, never treated as failures of the inequality.
    """
    s = as_sequence(s)
    eps = Fraction(eps)
    if not 0 < eps <= HALF:
        raise MalformedInput("epsilon must lie in (0, 1/2]")
    if level < 1:
        raise MalformedQuery("level must be >= 1")
    k = 1 << level
    if len(s) < k:
        raise TooShort(f"need at least {k} elements, got {len(s)}")
    firsts = range(len(s) - k + 1)
    totals = {"examined": 0, "unknown": 0, "skipped": 0}

    def run(first):
        return _tuple_search(s, v, eps, level, first, precision_cap, positive_only)

    def absorb(res) -> WitnessReport | None:
        hit, examined, unknown, skipped = res
        totals["examined"] += examined
        totals["unknown"] += unknown
        totals["skipped"] += skipped
        if hit is None:
            return None
        idx, d, bound = hit
        return WitnessReport(
            indices=IndexTuple(level, tuple(i + 1 for i in idx)),
            values=tuple(s.elements[i] for i in idx), diff_value=d, bound=bound,
            poly=v, epsilon=eps, candidates_examined=totals["examined"],
            unknown=totals["unknown"], nonpositive_skipped=totals["skipped"],
            sequence_id=s.source)

    if threads <= 1:
        for first in firsts:
            report = absorb(run(first))
            if report:
                return report
    else:
        # batches are absorbed in index order, so counts match the serial run
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for start in range(0, len(firsts), threads):
                batch = firsts[start:start + threads]
                for res in pool.map(run, batch):
                    report = absorb(res)
                    if report:
                        return report
    stats = {"examined": totals["examined"], "unknown": totals["unknown"],
             "nonpositive_skipped": totals["skipped"], "length": len(s)}
    if v.is_odd() and v.degree <= 2 * level - 1 and v.terms:
        stats["success_guaranteed"] = True
        stats["note"] = ("odd polynomial of degree <= 2*level-1: long enough sequences "
                         "always contain a witness; a miss on a long sequence is suspicious")
    return NotFound("within_sequence", stats)


@dataclass
class TupleCheck:
    level: int
    indices: tuple[int, ...]
    diff_value: int
    ok: bool
    bound: Mod1Bound | None = None
    direct: Mod1Bound | None = None
    note: str = ""
    target: Fraction = Fraction(0)


@dataclass
class AvoiderCertificate:
    sequence: FiniteSequence
    claim: str
    levels: tuple[int, ...]
    checks: list[TupleCheck]
    construction: list[dict] = field(default_factory=list)
    complete: bool = True
    target_length: int = 0
    params: dict = field(default_factory=dict)
    poly: PolySpec | None = None

    @property
    def status(self) -> str:
        if not self.complete:
            return "partial"
        return "verified" if all(c.ok for c in self.checks) else "failed"

    @property
    def verified(self) -> bool:
        return self.status == "verified"


def _sequence_or_placeholder(seq: Sequence[int], label: str) -> FiniteSequence:
    # a construction that fails on its first element still needs a sequence field
    return FiniteSequence(tuple(seq), label) if seq else FiniteSequence((0,), f"{label} (empty)")


def _tuples_ending_at(seq: Sequence[int], level: int, last: int):
    """Index tuples (0-based) of size 2**level whose final index is ``last``."""
    for head in itertools.combinations(range(last), (1 << level) - 1):
        yield head + (last,)


def _diff_of(seq: Sequence[int], idx: Sequence[int], level: int) -> int:
    return sum(c * seq[i] for c, i in zip(diff_signs(level), idx))


def _lattice_candidates(coeff, n_prev: int, lin_tol: Fraction, box: int,
                        multiplier: int = 1, max_blocks: int = 8):
    """Integers n > n_prev with ‖n * coeff‖ small.

    Takes two consecutive convergent denominators q, q' of ``multiplier*coeff``
    with ``2 * box * ‖q * multiplier * coeff‖ < lin_tol`` and yields
    ``multiplier * (x q + y q')`` for |x|, |y| <= box, ring by ring.
    """
    target = scaled(coeff, multiplier)
    depth = 8
    convs = cf_convergents(target, depth)
    i = 0
    blocks = 0
    while blocks < max_blocks:
        while i + 1 >= len(convs):
            depth *= 2
            convs = cf_convergents(target, depth)
        q, q2 = convs[i].denominator, convs[i + 1].denominator
        off = target.enclose(64 + 2 * q.bit_length()) * q - convs[i].numerator
        err = max(abs(off.lo), abs(off.hi))
        if multiplier * q <= n_prev or 2 * box * err >= lin_tol:
            i += 1
            continue
        blocks += 1
        for t in range(1, box + 1):
            for x in range(-t, t + 1):
                for y in range(-t, t + 1):
                    if max(abs(x), abs(y)) != t:
                        continue
                    n = multiplier * (x * q + y * q2)
                    if n > n_prev:
                        yield n
        i += 1


def _quadratic_avoider(coeff, shift: Fraction, budget: Fraction, levels: Sequence[int],
                       L: int, scan_bound: int, box: int, multiplier: int,
                       precision_cap: int) -> tuple[list[int], list[dict], bool]:
    """Greedy sequence with ‖n coeff‖ tiny, ‖n^2 coeff - 1/3‖ < delta_k and
    ‖n_j n_k coeff‖ < eta_k, so that every level-l difference d has
    coeff*d^2 within ``budget`` of 2^l/3 (plus the shift from rational parts)."""
    worst = max(levels)
    pieces = 4 ** worst  # 2^l square terms plus 2^l (2^l - 1) cross terms
    seq: list[int] = []
    log: list[dict] = []
    for k in range(1, L + 1):
        delta = min(budget / pieces, Fraction(1, k * k))
        eta = min(budget / pieces, Fraction(1, k))
        n_prev = seq[-1] if seq else 0
        lin_tol = delta if not seq else min(delta, eta / n_prev)
        conds = [Condition(1, coeff, 0, lin_tol),
                 Condition(2, coeff, Fraction(1, 3), delta)]
        conds += [Condition(1, scaled(coeff, m), 0, eta) for m in seq]
        cands = itertools.islice(
            _lattice_candidates(coeff, n_prev, lin_tol, box, multiplier), scan_bound)
        hit = simultaneous_search(conds, n_prev + 1, 1 << 4096, cands, precision_cap)
        if not hit:
            log.append({"k": k, "found": False, "tolerance": str(delta),
                        "examined": hit.stats["examined"]})
            return seq, log, False
        seq.append(hit.n)
        log.append({"k": k, "n": hit.n, "tolerance": str(delta), "cross_tolerance": str(eta),
                    "linear_tolerance": str(lin_tol), "examined": hit.stats["examined"],
                    "bounds": [b.to_json() for b in hit.bounds]})
    return seq, log, True


def build_square_avoider(alpha, eps: Rational = Fraction(1, 6), L: int = 8,
                         scan_bound: int = 20000, box: int = 24,
                         precision_cap: int = DEFAULT_CAP) -> AvoiderCertificate:
    """Sequence whose quadruple differences d all satisfy ‖d^2 alpha - 4/3‖ < eps.

    Consequently ‖d^2 alpha‖ >= 1/3 - eps on every quadruple, so the set
    {n : ‖n^2 alpha‖ < 1/3 - eps} misses the whole second difference set.
    ``scan_bound`` caps the lattice candidates examined per element.
    """
    eps = Fraction(eps)
    if is_exact(alpha):
        raise MalformedInput("alpha must be an irrational-tagged constant")
    if not 0 < eps <= Fraction(1, 6):
        raise MalformedInput("epsilon must lie in (0, 1/6]")
    if L < 4:
        raise TooShort("need at least 4 terms for a quadruple")
    seq, log, done = _quadratic_avoider(alpha, Fraction(0), eps, (2,), L, scan_bound,
                                        box, 1, precision_cap)
    v = PolySpec.of((2, alpha))
    checks = []
    for last in range(len(seq)):
        for idx in _tuples_ending_at(seq, 2, last):
            d = _diff_of(seq, idx, 2)
            bound = poly_eval_mod1(v, d, eps, precision_cap, target=Fraction(4, 3))
            direct = poly_eval_mod1(v, d, Fraction(1, 3) - eps, precision_cap)
            checks.append(TupleCheck(2, tuple(i + 1 for i in idx), d, bound.verdict == IN,
                                     bound, direct, target=Fraction(4, 3)))
    return AvoiderCertificate(
        _sequence_or_placeholder(seq, "square avoider"),
        f"every quadruple difference d has ||d^2*{alpha} - 4/3|| < {eps}",
        (2,), checks, log, done, L,
        {"alpha": str(alpha), "epsilon": str(eps), "scan_bound": scan_bound, "box": box}, v)


def build_even_avoider(v: PolySpec, eps: Rational, level_max: int, L: int,
                       scan_bound: int = 20000, box: int = 24,
                       precision_cap: int = DEFAULT_CAP) -> AvoiderCertificate:
    """One sequence whose level-l differences, for every l <= level_max, avoid
    {n : ‖v(n)‖ <= eps}.

    Supports even v with v(0) = 0 whose irrational part is a single quadratic
    term a*x^2; rational even terms are neutralised by taking every element
    divisible by the common denominator. Each level-l difference d then has
    v(d) within 1/3 - eps of 2^l/3, hence ‖v(d)‖ > eps.
    """
    eps = Fraction(eps)
    if not v.is_even() or not v.terms:
        raise MalformedInput("v must be a nonzero even polynomial")
    if not v.has_irrational():
        raise MalformedInput("v needs an irrational coefficient")
    if any(t.degree == 0 for t in v.terms):
        raise MalformedInput("v(0) must be 0")
    if not 0 < eps < Fraction(1, 3):
        raise MalformedInput("epsilon must lie in (0, 1/3)")
    if level_max < 1:
        raise MalformedQuery("level_max must be >= 1")
    irr = [t for t in v.terms if t.tag == "irrational"]
    if len(irr) != 1 or irr[0].degree != 2:
        raise MalformedInput("only a single irrational quadratic term a*x^2 is supported")
    if L < 1 << level_max:
        raise TooShort(f"need at least {1 << level_max} terms")
    denom = math.lcm(*(t.coeff.value.denominator for t in v.terms if t.tag == "rational")) \
        if any(t.tag == "rational" for t in v.terms) else 1
    a = irr[0].coeff
    levels = tuple(range(1, level_max + 1))
    budget = Fraction(1, 3) - eps
    # elements are denom*m; the irrational part acts through denom^2 * a on m
    seq_m, log, done = _quadratic_avoider(scaled(a, denom * denom), Fraction(0), budget,
                                          levels, L, scan_bound, box, 1, precision_cap)
    seq = [denom * m for m in seq_m]
    checks = []
    for level in levels:
        for last in range(len(seq)):
            for idx in _tuples_ending_at(seq, level, last):
                d = _diff_of(seq, idx, level)
                bound = poly_eval_mod1(v, d, budget, precision_cap,
                                       target=Fraction(1 << level, 3))
                direct = poly_eval_mod1(v, d, eps, precision_cap)
                ok = bound.verdict == IN
                checks.append(TupleCheck(level, tuple(i + 1 for i in idx), d, ok, bound, direct,
                                         target=Fraction(1 << level, 3)))
    return AvoiderCertificate(
        _sequence_or_placeholder(seq, "even avoider"),
        f"for l <= {level_max}, every level-l difference d has ||v(d) - 2^l/3|| < {budget}, "
        f"so ||v(d)|| > {eps}",
        levels, checks, log, done, L,
        {"v": str(v), "epsilon": str(eps), "denominator": denom, "scan_bound": scan_bound}, v)


def odd_degree_factor(j: int) -> int:
    """-2^(j-1) (2j+1)! / (2! (2j-1)!) = -2^(j-1) j (2j+1)."""
    return -(1 << (j - 1)) * j * (2 * j + 1)


def build_high_degree_avoider(v: PolySpec, level: int, L: int, aux: Sequence = (),
                              scan_bound: int = 200000, tolerance_floor: Rational = Fraction(1, 8),
                              precision_cap: int = DEFAULT_CAP) -> AvoiderCertificate:
    """Sequence whose level-``level`` differences d satisfy ‖v(d) - 1/2‖ < 1/4.

    v is odd of degree 2m-1 with m > level. ``aux`` supplies the constants
    alpha_0..alpha_{m-2}; alpha_{m-1} is the leading coefficient. Each new
    element n is the least integer after the previous one such that
    ‖n alpha_0 - 1/2‖, ‖n alpha_j‖ and ‖n^2 c_j alpha_j - alpha_{j-1}‖ are
    below delta_k = min(1/4, max(tolerance_floor, 1/k)), and every tuple it
    closes meets the certificate inequality. The limits are only approximated
    at this scale; the exhaustive tuple check is what certifies the result.
    """
    if not v.is_odd() or not v.terms:
        raise MalformedInput("v must be a nonzero odd polynomial")
    lead = v.leading
    if lead.tag != "irrational":
        raise MalformedInput("leading coefficient must be irrational-tagged")
    m = (lead.degree + 1) // 2
    if level < 1 or level >= m:
        raise MalformedInput(f"need 1 <= level < {m} for degree {lead.degree}")
    if L < 1 << level:
        raise TooShort(f"need at least {1 << level} terms")
    if len(aux) != m - 1:
        raise MalformedInput(f"need {m - 1} auxiliary constants alpha_0..alpha_{m - 2}")
    alphas = list(aux) + [lead.coeff]
    floor_tol = Fraction(tolerance_floor)
    quarter = Fraction(1, 4)
    seq: list[int] = []
    log: list[dict] = []
    checks: list[TupleCheck] = []
    done = True
    n = 0
    for k in range(1, L + 1):
        delta = min(quarter, max(floor_tol, Fraction(1, k)))
        conds = [Condition(1, alphas[0], HALF, delta)]
        conds += [Condition(1, alphas[j], 0, delta) for j in range(1, m)]
        conds += [Condition(2, scaled(alphas[j], odd_degree_factor(j)), alphas[j - 1], delta)
                  for j in range(1, m)]
        start, examined, found = n + 1, 0, None
        while examined < scan_bound:
            hit = simultaneous_search(conds, start, n + scan_bound, precision_cap=precision_cap)
            if not hit:
                examined = scan_bound
                break
            cand = hit.n
            examined = cand - n
            trial = seq + [cand]
            new_checks = []
            for idx in _tuples_ending_at(trial, level, len(seq)):
                d = _diff_of(trial, idx, level)
                bound = poly_eval_mod1(v, d, quarter, precision_cap, target=HALF)
                if bound.verdict != IN:
                    break
                direct = poly_eval_mod1(v, d, quarter, precision_cap)
                new_checks.append(TupleCheck(level, tuple(i + 1 for i in idx), d, True,
                                             bound, direct, target=HALF))
            else:
                found = cand
                checks.extend(new_checks)
                break
            start = cand + 1
        if found is None:
            log.append({"k": k, "found": False, "scan": [n + 1, n + scan_bound]})
            done = False
            break
        log.append({"k": k, "n": found, "tolerance": str(delta), "scan": [n + 1, found]})
        seq.append(found)
        n = found
    return AvoiderCertificate(
        _sequence_or_placeholder(seq, "high-degree avoider"),
        f"every level-{level} difference d has ||v(d) - 1/2|| < 1/4, so ||v(d)|| > 1/4",
        (level,), checks, log, done, L,
        {"v": str(v), "aux": [str(a) for a in aux], "scan_bound": scan_bound}, v)


def nonsyndetic_intervals(count: int, L1: int = 1, R1: int = 2) -> list[tuple[int, int]]:
    """Intervals with L_{k+1} = R_1 + ... + R_k + k and R_{k+1} = 2 L_{k+1}."""
    out = [(L1, R1)]
    total = R1
    for k in range(1, count):
        lo = total + k
        out.append((lo, 2 * lo))
        total += 2 * lo
    return out


def build_nonsyndetic_avoider(intervals: Sequence[tuple[int, int]], level: int) -> AvoiderCertificate:
    """The right endpoints R_k; every level-``level`` difference lands in some [L_k, R_k].

    Requires L_k < R_k < L_{k+1} and R_1 + ... + R_k + L_{k+1} < R_{k+1}. The
    complement of the union of intervals then contains arbitrarily long gaps
    once the intervals are spaced out.
    """
    ivs = [(int(a), int(b)) for a, b in intervals]
    if level < 1:
        raise MalformedQuery("level must be >= 1")
    if len(ivs) < 1 << level:
        raise TooShort(f"need at least {1 << level} intervals for level {level}")
    total = 0
    for k, (lo, hi) in enumerate(ivs):
        if not lo < hi:
            raise MalformedInput(f"interval {k + 1}: need L < R")
        if k + 1 < len(ivs):
            nlo, nhi = ivs[k + 1]
            if not hi < nlo:
                raise MalformedInput(f"intervals {k + 1} and {k + 2} overlap or touch")
            total += hi
            if not total + nlo < nhi:
                raise MalformedInput(f"growth condition fails at k={k + 1}")
    seq = [hi for _, hi in ivs]
    checks = []
    for last in range(len(seq)):
        for idx in _tuples_ending_at(seq, level, last):
            d = _diff_of(seq, idx, level)
            home = [k + 1 for k, (lo, hi) in enumerate(ivs) if lo <= d <= hi]
            checks.append(TupleCheck(level, tuple(i + 1 for i in idx), d, bool(home),
                                     note=f"interval {home[0]}" if home else "outside"))
    return AvoiderCertificate(FiniteSequence(tuple(seq), "right endpoints"),
                              f"every level-{level} difference lies in the union of the intervals",
                              (level,), checks, [], True, len(seq),
                              {"intervals": [[lo, hi] for lo, hi in ivs]})


def integer_valued(v: PolySpec) -> bool:
    """A rational polynomial of degree d maps Z into Z iff v(0), ..., v(d) are integers."""
    if not v.is_rational():
        return False
    return all(v.exact_value(n).denominator == 1 for n in range(max(v.degree, 0) + 1))


@dataclass
class SarkozyResult:
    hits: tuple[int, ...]
    N: int
    difference_count: int

    @property
    def density(self) -> Fraction:
        return Fraction(len(self.hits), self.N) if self.N else Fraction(0)


def sarkozy_search(E: Iterable[int], v: PolySpec, N: int) -> SarkozyResult:
    """All n in [1, N] with v(n) a positive difference of two elements of E."""
    if not integer_valued(v):
        raise MalformedInput("v must have rational coefficients and map integers to integers")
    Es = sorted(set(int(e) for e in E))
    diffs = {b - a for a, b in itertools.combinations(Es, 2)}
    hits = tuple(n for n in range(1, N + 1) if int(v.exact_value(n)) in diffs)
    return SarkozyResult(hits, N, len(diffs))
