"""The Cantor map F(w) = sum_s w(s) / n_s^3 with n_s = 2^(6^s), certified mod-1
limit tables, and character integrals over the uniform product measure."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .dioph import Mod1Bound, dist_interval
from .errors import MalformedInput, MalformedQuery
from .reals import Interval

DEFAULT_BITS = 256


def n_s(s: int) -> int:
    return 1 << 6 ** s


def cube_exponent(s: int) -> int:
    """log2 of n_s^3."""
    return 3 * 6 ** s


def tail_radius(depth: int) -> Fraction:
    """2^(-3 * 6^(d+1)), the first omitted term.

    The omitted terms s > d sum to at least 0 and at most twice this, since
    each later term is smaller than the previous one by far more than 2.
    So [value, value + 2 r] is a sound enclosure of radius r, and r never
    exceeds the tail sum for the all-ones word.
    """
    return Fraction(1, 1 << cube_exponent(depth + 1))


@dataclass(frozen=True)
class DyadicValue:
    value: Fraction
    tail_radius: Fraction
    depth: int

    @property
    def interval(self) -> Interval:
        return Interval(self.value + self.tail_radius, self.tail_radius)


def _check_word(bits: Sequence[int]) -> tuple[int, ...]:
    word = tuple(int(b) for b in bits)
    if not word:
        raise MalformedInput("a bit word needs depth >= 1")
    if any(b not in (0, 1) for b in word):
        raise MalformedInput("bit words contain only 0 and 1")
    return word


def cantor_point(bits: Sequence[int]) -> DyadicValue:
    word = _check_word(bits)
    d = len(word)
    top = cube_exponent(d)
    num = sum(1 << (top - cube_exponent(s)) for s, b in enumerate(word, 1) if b)
    return DyadicValue(Fraction(num, 1 << top), tail_radius(d), d)


@dataclass(frozen=True)
class LimitRow:
    k: int
    cubic: Mod1Bound
    quadratic: Mod1Bound
    linear: Mod1Bound
    unknown: bool
    tail_estimate: Fraction

    @property
    def cubic_within_bound(self) -> bool:
        return self.cubic.upper < self.tail_estimate


def limit_table(bits: Sequence[int], ks: Iterable[int], M: int = 1,
                pad_zeros: bool = False) -> list[LimitRow]:
    """Rows of ‖n_k^3 F‖, ‖M n_k^2 F‖, ‖M n_k F‖ as exact intervals.

    By default the bounds hold for every infinite extension of the word.
    With ``pad_zeros`` the word is read as ending in zeros and every entry is
    an exact point. Rows with k beyond the word depth are flagged Unknown.
    """
    point = cantor_point(bits)
    x = Interval(point.value) if pad_zeros else point.interval
    rows = []
    for k in ks:
        if k < 1:
            raise MalformedQuery("k starts at 1")
        nk = n_s(k)
        bounds = []
        for factor in (nk ** 3, M * nk * nk, M * nk):
            lo, hi = dist_interval(x * factor)
            bounds.append(Mod1Bound(lo, hi))
        unknown = k > point.depth or any(b.upper - b.lower >= Fraction(1, 2) for b in bounds)
        rows.append(LimitRow(k, *bounds, unknown, Fraction(1, 1 << 6 ** k)))
    return rows


@lru_cache(maxsize=64)
def pi_interval(bits: int) -> Interval:
    """Enclosure of pi from 16 atan(1/5) - 4 atan(1/239) in fixed point."""
    B = bits + 16

    def atan_inv(x: int) -> tuple[int, int]:
        # alternating series with decreasing terms; each floor costs < 1 ulp
        total, k, power = 0, 0, x
        while True:
            term = (1 << B) // ((2 * k + 1) * power)
            if term == 0:
                return total, k + 2
            total += term if k % 2 == 0 else -term
            k += 1
            power *= x * x

    a, ea = atan_inv(5)
    b, eb = atan_inv(239)
    center = 16 * a - 4 * b
    err = 16 * ea + 4 * eb
    return Interval(Fraction(center, 1 << B), Fraction(err, 1 << B))


def _series(c_num: int, B: int) -> tuple[int, int, int]:
    """Fixed-point cos and sin of c = c_num / 2^B for |c| <= 4, plus an error bound in ulps.

    Terms t_k ~ c^k / k! are built by t_k = floor(t_{k-1} c / k); the error
    recursion e_k <= e_{k-1} |c| / k + 1 keeps every e_k below e^4 < 55.
    """
    one = 1 << B
    t, k = one, 0
    cos_acc, sin_acc = one, 0
    while True:
        k += 1
        t = (t * c_num) // (k << B)
        if t == 0 or abs(t) <= 1:
            break
        sign = 1 if (k // 2) % 2 == 0 else -1
        if k % 2:
            sin_acc += sign * t
        else:
            cos_acc += sign * t
    # omitted terms: |c|^j / j! for j > k is below 2 ulps past a term of 1 ulp
    err = 55 * (k + 1) + 4
    return cos_acc, sin_acc, err


def cos_sin_2pi(theta: Fraction, bits: int = DEFAULT_BITS) -> tuple[Interval, Interval]:
    """Enclosures of cos(2 pi theta) and sin(2 pi theta) for rational theta."""
    theta = Fraction(theta)
    theta -= math.floor(theta + Fraction(1, 2))  # now in [-1/2, 1/2)
    exact = {Fraction(0): (1, 0), Fraction(-1, 2): (-1, 0),
             Fraction(1, 4): (0, 1), Fraction(-1, 4): (0, -1)}
    if theta in exact:
        c, s = exact[theta]
        return Interval(Fraction(c)), Interval(Fraction(s))
    B = bits + 32
    x = pi_interval(B) * (2 * theta)
    c_num = round(x.center * (1 << B))
    # cos and sin are 1-Lipschitz, so the argument uncertainty carries over
    arg_err = x.radius + abs(x.center - Fraction(c_num, 1 << B))
    cos_acc, sin_acc, err = _series(c_num, B)
    rad = Fraction(err, 1 << B) + arg_err
    unit = Interval(Fraction(0), Fraction(1))
    cos_iv = Interval(Fraction(cos_acc, 1 << B), rad)
    sin_iv = Interval(Fraction(sin_acc, 1 << B), rad)
    return cos_iv.intersect(unit), sin_iv.intersect(unit)


@dataclass(frozen=True)
class ComplexInterval:
    re: Interval
    im: Interval

    def __mul__(self, other: "ComplexInterval") -> "ComplexInterval":
        return ComplexInterval(self.re * other.re - self.im * other.im,
                               self.re * other.im + self.im * other.re)

    def widen(self, r: Fraction) -> "ComplexInterval":
        return ComplexInterval(Interval(self.re.center, self.re.radius + r),
                               Interval(self.im.center, self.im.radius + r))

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return (float(self.re.lo) - slack <= z.real <= float(self.re.hi) + slack
                and float(self.im.lo) - slack <= z.imag <= float(self.im.hi) + slack)

    @property
    def exact_one(self) -> bool:
        return self.re == Interval(Fraction(1)) and self.im == Interval(Fraction(0))

    def max_distance_from(self, z: complex) -> Fraction:
        """Upper bound on |w - z| over the box (using the sum of coordinate gaps)."""
        zr, zi = Fraction(z.real), Fraction(z.imag)
        dr = max(abs(self.re.lo - zr), abs(self.re.hi - zr))
        di = max(abs(self.im.lo - zi), abs(self.im.hi - zi))
        return dr + di


ONE = ComplexInterval(Interval(Fraction(1)), Interval(Fraction(0)))


@dataclass(frozen=True)
class CharIntegral:
    m: int
    depth: int
    product: ComplexInterval
    tail_bound: Fraction
    bits: int
    phases: tuple[Fraction, ...]
    flagged: bool = False

    @property
    def value(self) -> ComplexInterval:
        """Enclosure of the full integral: product plus the tail of factors s > depth."""
        return self.product.widen(self.tail_bound)


def char_factor(theta: Fraction, bits: int) -> ComplexInterval:
    """(1 + e^{2 pi i theta}) / 2."""
    c, s = cos_sin_2pi(theta, bits)
    half = Fraction(1, 2)
    return ComplexInterval((c + 1) * half, s * half)


def _product(m: int, depth: int, bits: int) -> tuple[ComplexInterval, tuple[Fraction, ...]]:
    phases = []
    prod = ONE
    for s in range(1, depth + 1):
        e = cube_exponent(s)
        theta = Fraction(m % (1 << e), 1 << e)  # exact dyadic phase mod 1
        phases.append(theta)
        if theta:
            prod = prod * char_factor(theta, bits)
    return prod, tuple(phases)


def char_integral(m: int, depth: int, bits: int = DEFAULT_BITS,
                  target_width: Fraction | None = None,
                  precision_cap: int = 4096) -> CharIntegral:
    """Average of e^{2 pi i m F(w)} over uniform random bits, factor by factor.

    Coordinates are independent, so the average factors into
    prod_s (1 + e^{2 pi i m / n_s^3}) / 2. The first ``depth`` factors are
    enclosed; each later factor is within pi |m| 2^(-3 6^s) of 1 and their
    product is within ``tail_bound`` of 1, which ``value`` adds on.

    With ``target_width`` the working precision doubles until both product
    coordinates are that narrow; if the cap is hit first the widest
    enclosure reached is returned with ``flagged`` set.
    """
    if depth < 1:
        raise MalformedQuery("depth must be >= 1")
    m = int(m)
    prod, phases = _product(m, depth, bits)
    flagged = False
    if target_width is not None:
        target = Fraction(target_width)
        while max(prod.re.width, prod.im.width) > target:
            if bits >= precision_cap:
                flagged = True
                break
            bits = min(2 * bits, precision_cap)
            prod, phases = _product(m, depth, bits)
    # sum_{s>d} pi |m| 2^(-3 6^s) <= 4 |m| * 2 * 2^(-3 6^(d+1))
    tail = 8 * abs(m) * tail_radius(depth)
    return CharIntegral(m, depth, prod, tail, bits, phases, flagged)
