"""Distance to the nearest integer, polynomials mod 1, continued fractions and
simultaneous-approximation scans, all with certified interval verdicts."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import MalformedInput, NotFound, PrecisionExhausted
from .reals import (ExactRational, Interval, NamedIrrational, Rational, constant,
                    fraction_str, is_exact, parse_rational, parse_real, scaled)

START_BITS = 128
DEFAULT_CAP = 4096

IN, OUT, UNKNOWN = "In", "Out", "Unknown"
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Mod1Bound:
    """Certified enclosure ``[lower, upper]`` of a distance to the nearest integer.

    ``verdict`` compares against ``epsilon``: In iff upper < epsilon,
    Out iff lower >= epsilon, Unknown otherwise. ``bits`` is the working
    precision at which the verdict was settled.
    """

    lower: Fraction
    upper: Fraction
    epsilon: Fraction | None = None
    bits: int | None = None

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper <= HALF:
            raise ValueError(f"bad distance enclosure [{self.lower}, {self.upper}]")

    @property
    def verdict(self) -> str | None:
        if self.epsilon is None:
            return None
        if self.upper < self.epsilon:
            return IN
        if self.lower >= self.epsilon:
            return OUT
        return UNKNOWN

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def with_epsilon(self, eps: Rational) -> "Mod1Bound":
        return Mod1Bound(self.lower, self.upper, Fraction(eps), self.bits)

    def to_json(self) -> dict:
        out = {"lower": fraction_str(self.lower), "upper": fraction_str(self.upper)}
        if self.epsilon is not None:
            out["epsilon"] = fraction_str(self.epsilon)
            out["verdict"] = self.verdict
        if self.bits is not None:
            out["bits"] = self.bits
        return out


def _dist_point(y: Fraction) -> Fraction:
    f = y - math.floor(y)
    return min(f, 1 - f)


def dist_interval(x: Interval) -> tuple[Fraction, Fraction]:
    lo, hi = x.lo, x.hi
    if hi - lo >= 1:
        return Fraction(0), HALF
    base = math.floor(lo)
    f, g = lo - base, hi - base  # 0 <= f < 1, f <= g < f + 1 < 2
    ends = (_dist_point(f), _dist_point(g))
    upper = HALF if (f <= HALF <= g or g >= Fraction(3, 2)) else max(ends)
    lower = Fraction(0) if (f == 0 or g >= 1) else min(ends)
    return lower, upper


def dist_mod1(x, bits: int = START_BITS) -> Mod1Bound:
    """‖x‖ for a rational, interval or refinable real (enclosed at ``bits``)."""
    if isinstance(x, (int, Fraction)):
        d = _dist_point(Fraction(x))
        return Mod1Bound(d, d)
    iv = x if isinstance(x, Interval) else x.enclose(bits)
    lower, upper = dist_interval(iv)
    return Mod1Bound(lower, upper, bits=None if isinstance(x, Interval) else bits)


def certify(value_at: Callable[[int], Interval], eps: Rational,
            precision_cap: int = DEFAULT_CAP, start_bits: int = START_BITS) -> Mod1Bound:
    """Refine ``value_at(bits)`` by doubling ``bits`` until ‖value‖ vs ``eps`` is decided."""
    eps = Fraction(eps)
    bits = min(start_bits, precision_cap)
    last_width = None
    while True:
        iv = value_at(bits)
        lower, upper = dist_interval(iv)
        bound = Mod1Bound(lower, upper, eps, bits)
        if bound.verdict != UNKNOWN or iv.radius == 0:
            return bound
        # a finite digit stream stops shrinking; more bits cannot help
        if bits >= precision_cap or (last_width is not None and iv.width >= last_width):
            return bound
        last_width = iv.width
        bits = min(2 * bits, precision_cap)


@dataclass(frozen=True)
class Term:
    degree: int
    coeff: object
    tag: str  # "rational" | "irrational"

    def __post_init__(self):
        if self.degree < 0:
            raise MalformedInput("degrees must be >= 0")
        if self.tag not in ("rational", "irrational"):
            raise MalformedInput(f"unknown tag {self.tag!r}")
        if self.tag == "rational" and not isinstance(self.coeff, ExactRational):
            raise MalformedInput("a rational-tagged coefficient must be an exact rational")


@dataclass(frozen=True)
class PolySpec:
    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        terms = tuple(sorted(self.terms, key=lambda t: -t.degree))
        degrees = [t.degree for t in terms]
        if len(set(degrees)) != len(degrees):
            raise MalformedInput("polynomial degrees must be distinct")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, *pairs) -> "PolySpec":
        """Build from ``(degree, coeff)`` pairs; rationals get the rational tag."""
        terms = []
        for degree, coeff in pairs:
            if isinstance(coeff, (int, Fraction)):
                coeff = ExactRational(Fraction(coeff))
            tag = "rational" if isinstance(coeff, ExactRational) else "irrational"
            terms.append(Term(degree, coeff, tag))
        return cls(tuple(terms))

    @classmethod
    def parse(cls, text: str, directory: str | None = None) -> "PolySpec":
        """Parse e.g. ``"sqrt2*x^3 - 1/2*x + 7"``; coefficients may be rationals,
        constant names, or ``rational*constant``. Constants are tagged irrational."""
        s = text.replace(" ", "").replace("**", "^")
        if not s:
            raise MalformedInput("empty polynomial")
        s = re.sub(r"(?<=[0-9a-zA-Z)])-", "+-", s)
        pairs: dict[int, object] = {}
        for chunk in s.split("+"):
            if not chunk:
                continue
            m = re.fullmatch(r"(.*?)\*?x(?:\^(\d+))?", chunk)
            if m:
                coeff_text, deg = m.group(1), int(m.group(2) or 1)
                if coeff_text in ("", "+"):
                    coeff_text = "1"
                elif coeff_text == "-":
                    coeff_text = "-1"
            else:
                coeff_text, deg = chunk, 0
            if deg in pairs:
                raise MalformedInput(f"degree {deg} appears twice in {text!r}")
            pairs[deg] = parse_real(coeff_text, directory)
        return cls.of(*pairs.items())

    @property
    def degree(self) -> int:
        return self.terms[0].degree if self.terms else -1

    @property
    def leading(self) -> Term | None:
        return self.terms[0] if self.terms else None

    def is_odd(self) -> bool:
        return all(t.degree % 2 == 1 for t in self.terms)

    def is_even(self) -> bool:
        return all(t.degree % 2 == 0 for t in self.terms)

    def is_rational(self) -> bool:
        return all(t.tag == "rational" for t in self.terms)

    def has_irrational(self) -> bool:
        return any(t.tag == "irrational" for t in self.terms)

    def enclose_at(self, n: int, bits: int) -> Interval:
        """Interval for v(n) with radius at most ``2**-bits``."""
        total = Interval(Fraction(0))
        slack = len(self.terms).bit_length()
        for t in self.terms:
            p = n ** t.degree
            total = total + t.coeff.enclose(bits + abs(p).bit_length() + slack) * p
        return total

    def exact_value(self, n: int) -> Fraction:
        return sum((t.coeff.value * n ** t.degree for t in self.terms), Fraction(0))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{t.coeff}*x^{t.degree}" for t in self.terms)

    def to_json(self) -> list:
        return [{"degree": t.degree, "coeff": str(t.coeff), "tag": t.tag} for t in self.terms]


def poly_eval_mod1(v: PolySpec, n: int, eps: Rational, precision_cap: int = DEFAULT_CAP,
                   target: Rational = 0) -> Mod1Bound:
    """Certified verdict on ‖v(n) - target‖ < eps; Unknown only at the precision cap."""
    eps = Fraction(eps)
    if not 0 < eps <= HALF:
        raise MalformedInput("epsilon must lie in (0, 1/2]")
    target = Fraction(target)
    if v.is_rational():
        return Mod1Bound(*dist_interval(Interval(v.exact_value(n) - target)), eps, 0)
    return certify(lambda bits: v.enclose_at(n, bits) - target, eps, precision_cap)


def decompose_polynomial(v: PolySpec) -> tuple[PolySpec, PolySpec, PolySpec]:
    """Split into (even irrational part, odd irrational part, rational part)."""
    ve = tuple(t for t in v.terms if t.tag == "irrational" and t.degree % 2 == 0)
    vo = tuple(t for t in v.terms if t.tag == "irrational" and t.degree % 2 == 1)
    vr = tuple(t for t in v.terms if t.tag == "rational")
    return PolySpec(ve), PolySpec(vo), PolySpec(vr)


def _quadratic_partial_quotients(c: NamedIrrational, depth: int) -> list[int]:
    q = c.quadratic
    # x = (a + sqrt(N)) / b with b | N - a^2
    a, N, b = q.p, q.q * q.q * q.d, q.r
    if q.q < 0:
        a, b = -a, -b
    if (N - a * a) % b:
        a, N, b = a * abs(b), N * b * b, b * abs(b)
    root = math.isqrt(N)
    out = []
    for _ in range(depth):
        if b > 0:
            ak = (a + root) // b
        else:
            ak = -((a + root) // -b) - 1
        out.append(ak)
        a = ak * b - a
        b = (N - a * a) // b
    return out


def _rational_partial_quotients(x: Fraction, depth: int) -> list[int]:
    out = []
    while len(out) < depth:
        a = math.floor(x)
        out.append(a)
        if x == a:
            break
        x = 1 / (x - a)
    return out


def partial_quotients(c, depth: int, precision_cap: int | None = None) -> list[int]:
    """Certified partial quotients of a refinable real."""
    if depth <= 0:
        return []
    if isinstance(c, NamedIrrational) and c.quadratic is not None:
        return _quadratic_partial_quotients(c, depth)
    bits = 64
    cap = precision_cap or 1 << 20
    while True:
        iv = c.enclose(bits)
        a = _rational_partial_quotients(iv.lo, depth + 1)
        b = _rational_partial_quotients(iv.hi, depth + 1)
        common = []
        # both endpoints share a prefix, and so does everything between them;
        # the last quotient of a terminating expansion is not yet certified
        for i, (x, y) in enumerate(zip(a, b)):
            if x != y or i == len(a) - 1 or i == len(b) - 1:
                break
            common.append(x)
        if len(common) >= depth:
            return common[:depth]
        limit = getattr(c, "max_bits", None)
        if bits >= cap or (limit is not None and bits >= limit):
            raise PrecisionExhausted(
                f"only {len(common)} partial quotients of {c} certified at {bits} bits")
        bits *= 2


def cf_convergents(c, depth: int, precision_cap: int | None = None) -> list[Fraction]:
    """First ``depth`` continued-fraction convergents p/q of ``c``."""
    out = []
    p0, p1, q0, q1 = 0, 1, 1, 0
    for a in partial_quotients(c, depth, precision_cap):
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        out.append(Fraction(p1, q1))
    return out


@dataclass(frozen=True)
class Condition:
    """‖n^power * coeff - target‖ < tol."""

    power: int
    coeff: object
    target: object = Fraction(0)
    tol: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if isinstance(self.coeff, (int, Fraction)):
            object.__setattr__(self, "coeff", ExactRational(self.coeff))
        if isinstance(self.target, (int, str)):
            object.__setattr__(self, "target", Fraction(self.target))
        object.__setattr__(self, "tol", Fraction(self.tol))
        if self.tol <= 0:
            raise MalformedInput("tolerance must be positive")

    def value_at(self, n: int, bits: int) -> Interval:
        p = n ** self.power
        val = self.coeff.enclose(bits + abs(p).bit_length() + 1) * p
        if isinstance(self.target, Fraction):
            return val - self.target
        return val - self.target.enclose(bits + 1)

    def check(self, n: int, precision_cap: int = DEFAULT_CAP) -> Mod1Bound:
        tol = min(self.tol, HALF)
        if self.tol > HALF:
            # every distance is below 1/2 < tol
            return Mod1Bound(Fraction(0), HALF, self.tol, 0)
        return certify(lambda bits: self.value_at(n, bits), tol, precision_cap)


class _Prefilter:
    """Cheap certified rejection for one condition.

    With coeff in [L, L + W] / 2^b, n^p coeff lies in [N L, N L + N W] / 2^b
    for N = n^p >= 0. If the left end is at distance >= tol + N W / 2^b from
    the target, the condition certainly fails; otherwise the caller falls
    back to :meth:`Condition.check`.
    """

    def __init__(self, cond: Condition):
        self.cond = cond
        self.ok = isinstance(cond.target, Fraction) and cond.tol <= HALF
        if not self.ok:
            return
        self.p = cond.power
        tau = cond.target - math.floor(cond.target)
        self.a, self.c = tau.numerator, tau.denominator
        self.e, self.f = cond.tol.numerator, cond.tol.denominator
        self._params: dict[int, tuple[int, int]] = {}

    def _at(self, b: int) -> tuple[int, int]:
        if b not in self._params:
            iv = self.cond.coeff.enclose(b)
            lo = math.floor(iv.lo * (1 << b))
            self._params[b] = (lo, math.ceil(iv.hi * (1 << b)) - lo)
        return self._params[b]

    def surely_out(self, n: int) -> bool:
        if not self.ok or n < 0:
            return False
        N = n ** self.p
        b = 64 * (2 + N.bit_length() // 64)
        L, W = self._at(b)
        mod = self.c << b
        y = (self.c * N * L - (self.a << b)) % mod
        d = min(y, mod - y)
        return d * self.f >= ((self.e * self.c) << b) + N * W * self.c * self.f


@dataclass
class SearchHit:
    n: int
    bounds: list[Mod1Bound]
    stats: dict = field(default_factory=dict)


def simultaneous_search(conditions: Sequence[Condition], n_min: int, n_max: int,
                        candidates: Iterable[int] | None = None,
                        precision_cap: int = DEFAULT_CAP) -> SearchHit | NotFound:
    """Least n in [n_min, n_max] meeting every condition, each certified In.

    When ``candidates`` is given they are tried in the given order (restricted
    to the range) instead of scanning the range. Candidates with a condition
    left Unknown at the cap are skipped and counted.
    """
    if n_min > n_max:
        raise MalformedInput("n_min must not exceed n_max")
    stats = {"examined": 0, "unknown": 0, "n_min": n_min, "n_max": n_max}
    filters = [_Prefilter(c) for c in conditions]
    stream = range(n_min, n_max + 1) if candidates is None else candidates
    for n in stream:
        if not n_min <= n <= n_max:
            continue
        stats["examined"] += 1
        if any(f.surely_out(n) for f in filters):
            continue
        bounds = []
        for cond in conditions:
            bound = cond.check(n, precision_cap)
            if bound.verdict != IN:
                if bound.verdict == UNKNOWN:
                    stats["unknown"] += 1
                break
            bounds.append(bound)
        else:
            return SearchHit(n, bounds, stats)
    return NotFound("within_bound", stats)
