"""Certified real numbers: exact rationals, refinable named constants, intervals.

Every real exposes ``enclose(bits)`` returning an :class:`Interval` that
contains the true value. For refinable values the radius is at most
``2**-bits``; fixed intervals and finite digit streams may return wider
enclosures once they run out of information, which callers detect through
:meth:`Interval.radius`.
"""

from __future__ import annotations

import math
import os
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Protocol, Union

from .errors import MalformedInput

CONSTANTS_ENV = "ITERDIFF_CONSTANTS"

Rational = Union[int, Fraction]


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[center - radius, center + radius]`` with rational data."""

    center: Fraction
    radius: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "center", Fraction(self.center))
        object.__setattr__(self, "radius", Fraction(self.radius))
        if self.radius < 0:
            raise ValueError("interval radius must be non-negative")

    @classmethod
    def from_bounds(cls, lo: Rational, hi: Rational) -> "Interval":
        lo, hi = Fraction(lo), Fraction(hi)
        if hi < lo:
            raise ValueError("empty interval")
        return cls((lo + hi) / 2, (hi - lo) / 2)

    @property
    def lo(self) -> Fraction:
        return self.center - self.radius

    @property
    def hi(self) -> Fraction:
        return self.center + self.radius

    @property
    def width(self) -> Fraction:
        return 2 * self.radius

    def enclose(self, bits: int) -> "Interval":
        return self

    def contains(self, x: Rational) -> bool:
        return self.lo <= x <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if hi < lo:
            raise ValueError("disjoint enclosures of the same value")
        return Interval.from_bounds(lo, hi)

    def __add__(self, other) -> "Interval":
        if isinstance(other, Interval):
            return Interval(self.center + other.center, self.radius + other.radius)
        return Interval(self.center + Fraction(other), self.radius)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.center, self.radius)

    def __sub__(self, other) -> "Interval":
        return self + (-other)

    def __rsub__(self, other) -> "Interval":
        return (-self) + other

    def __mul__(self, other) -> "Interval":
        if isinstance(other, Interval):
            # |xy - c1c2| <= |c1| r2 + |c2| r1 + r1 r2
            rad = (abs(self.center) * other.radius + abs(other.center) * self.radius
                   + self.radius * other.radius)
            return Interval(self.center * other.center, rad)
        k = Fraction(other)
        return Interval(self.center * k, self.radius * abs(k))

    __rmul__ = __mul__


class RealValue(Protocol):
    def enclose(self, bits: int) -> Interval: ...


@dataclass(frozen=True)
class ExactRational:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def enclose(self, bits: int) -> Interval:
        return Interval(self.value)

    def __str__(self) -> str:
        return str(self.value)


class QuadraticSource:
    """The number ``(p + q*sqrt(d)) / r`` with ``d`` a positive non-square."""

    def __init__(self, p: int, q: int, d: int, r: int):
        if d <= 0 or math.isqrt(d) ** 2 == d:
            raise MalformedInput(f"sqrt({d}) is not a quadratic irrational")
        if q == 0 or r == 0:
            raise MalformedInput("quadratic irrational needs q != 0 and r != 0")
        self.p, self.q, self.d, self.r = p, q, d, r
        self.max_bits = None

    def enclose(self, bits: int) -> Interval:
        b = bits + abs(self.q).bit_length() + 1
        s = math.isqrt(self.d << (2 * b))  # s <= sqrt(d) 2^b < s + 1
        root = Interval.from_bounds(Fraction(s, 1 << b), Fraction(s + 1, 1 << b))
        return (root * self.q + self.p) * Fraction(1, self.r)

    def describe(self) -> str:
        return f"({self.p}+{self.q}*sqrt({self.d}))/{self.r}"


class DigitSource:
    """A constant known through a finite decimal expansion.

    The digits may be truncated or rounded, so the enclosure is
    ``digits +- 10**-k`` for ``k`` fractional digits.
    """

    def __init__(self, digits: str):
        text = "".join(digits.split())
        if not re.fullmatch(r"[+-]?\d+(\.\d+)?", text):
            raise MalformedInput(f"bad digit stream {text[:40]!r}")
        self.text = text
        self.value = Fraction(text)
        self.frac_digits = len(text.split(".")[1]) if "." in text else 0
        err = Fraction(1, 10 ** self.frac_digits)
        self.interval = Interval(self.value, err)
        self.max_bits = max(0, math.floor(self.frac_digits * math.log2(10)) - 1)

    def enclose(self, bits: int) -> Interval:
        return self.interval

    def describe(self) -> str:
        return f"digits[{self.frac_digits}]"


class NamedIrrational:
    """A named constant tagged irrational, refined on demand.

    Enclosures are memoised per precision so that a result depends only on
    the bits requested, never on what other callers refined first. The memo
    is filled under a lock; entries are never replaced.
    """

    def __init__(self, name: str, source):
        self.name = name
        self.source = source
        self._lock = threading.Lock()
        self._memo: dict[int, Interval] = {}

    @property
    def quadratic(self) -> QuadraticSource | None:
        return self.source if isinstance(self.source, QuadraticSource) else None

    @property
    def max_bits(self) -> int | None:
        return self.source.max_bits

    @property
    def refined_bits(self) -> int:
        return max(self._memo, default=-1)

    def enclose(self, bits: int) -> Interval:
        with self._lock:
            hit = self._memo.get(bits)
            if hit is None:
                hit = self._memo[bits] = self.source.enclose(bits)
            return hit

    def __repr__(self) -> str:
        return f"NamedIrrational({self.name!r}, {self.source.describe()})"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Affine:
    """``factor * base + offset`` for a refinable base real."""

    base: object
    factor: Fraction = Fraction(1)
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "factor", Fraction(self.factor))
        object.__setattr__(self, "offset", Fraction(self.offset))

    def enclose(self, bits: int) -> Interval:
        extra = abs(self.factor.numerator).bit_length()
        return self.base.enclose(bits + extra) * self.factor + self.offset

    def __str__(self) -> str:
        return f"{self.factor}*{self.base}+{self.offset}"


def scaled(x, factor: Rational = 1, offset: Rational = 0):
    """Return ``factor * x + offset``, staying exact when ``x`` is exact."""
    if isinstance(x, ExactRational):
        return ExactRational(x.value * Fraction(factor) + Fraction(offset))
    if isinstance(x, Affine):
        return Affine(x.base, x.factor * Fraction(factor),
                      x.offset * Fraction(factor) + Fraction(offset))
    return Affine(x, Fraction(factor), Fraction(offset))


def is_exact(x) -> bool:
    return isinstance(x, ExactRational) or (isinstance(x, Interval) and x.radius == 0)


def base_constant(x) -> NamedIrrational | None:
    if isinstance(x, NamedIrrational):
        return x
    if isinstance(x, Affine):
        return base_constant(x.base)
    return None


# constants are shared so that refinement work is reused across calls
_registry: dict[str, NamedIrrational] = {}
_registry_lock = threading.Lock()

_BUILTIN = {
    "sqrt2": (0, 1, 2, 1),
    "sqrt3": (0, 1, 3, 1),
    "sqrt5": (0, 1, 5, 1),
    "golden": (1, 1, 5, 2),
    "phi": (1, 1, 5, 2),
}


def _parse_quadratic(name: str) -> tuple[int, int, int, int] | None:
    if name in _BUILTIN:
        return _BUILTIN[name]
    m = re.fullmatch(r"sqrt\(?(\d+)\)?", name)
    if m:
        return (0, 1, int(m.group(1)), 1)
    m = re.fullmatch(r"quad\((-?\d+),(-?\d+),(\d+),(-?\d+)\)", name.replace(" ", ""))
    if m:
        return tuple(int(g) for g in m.groups())  # type: ignore[return-value]
    return None


def read_constant_file(path: str | os.PathLike) -> tuple[str, str]:
    """Parse a constant file: identifier on the first line, then decimal digits."""
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 2:
        raise MalformedInput(f"{path}: expected identifier and digits")
    return lines[0], "".join(lines[1:])


def _find_constant_file(name: str, directory: str | None) -> Path | None:
    directory = directory or os.environ.get(CONSTANTS_ENV)
    if not directory:
        return None
    root = Path(directory)
    if not root.is_dir():
        return None
    for path in sorted(root.iterdir()):
        if path.is_file():
            try:
                ident, _ = read_constant_file(path)
            except (MalformedInput, UnicodeDecodeError):
                continue
            if ident == name:
                return path
    return None


def constant(name: str, directory: str | None = None) -> NamedIrrational:
    """Look up a named constant.

    Built-in quadratic irrationals: ``sqrt2``, ``sqrt3``, ``sqrt5``,
    ``golden``, ``sqrt(d)`` and ``quad(p,q,d,r)`` for ``(p + q sqrt d)/r``.
    Other names are resolved against constant files in ``directory`` or the
    directory named by ``ITERDIFF_CONSTANTS``.
    """
    with _registry_lock:
        if name in _registry:
            return _registry[name]
        quad = _parse_quadratic(name)
        if quad is not None:
            c = NamedIrrational(name, QuadraticSource(*quad))
        else:
            path = _find_constant_file(name, directory)
            if path is None:
                raise MalformedInput(f"unknown constant {name!r}")
            c = NamedIrrational(name, DigitSource(read_constant_file(path)[1]))
        _registry[name] = c
        return c


def parse_rational(text: str | int | Fraction) -> Fraction:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"not a rational: {text!r}") from exc


def parse_real(text: str | int | Fraction, directory: str | None = None):
    """Parse ``"1/3"``, ``"0.25"``, ``"sqrt2"``, ``"-3*sqrt2"`` or ``"2/5*golden"``."""
    if isinstance(text, (int, Fraction)):
        return ExactRational(Fraction(text))
    s = str(text).strip().replace(" ", "")
    try:
        return ExactRational(Fraction(s))
    except (ValueError, ZeroDivisionError):
        pass
    factor = Fraction(1)
    if "*" in s:
        head, s = s.rsplit("*", 1)
        factor = parse_rational(head)
    elif s.startswith("-"):
        factor, s = Fraction(-1), s[1:]
    c = constant(s, directory)
    return c if factor == 1 else scaled(c, factor)


def fraction_str(x: Rational) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
