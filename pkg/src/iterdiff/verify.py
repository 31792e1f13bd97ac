"""Independent re-verification of witnesses and certificates.

This path shares no evaluation code with :mod:`iterdiff.dioph`: constants are
rebuilt from their definitions inside mpmath's outward-rounded interval
arithmetic at twice the recorded working precision, and distances to the
nearest integer are computed from the exact binary endpoints.
"""

from __future__ import annotations

import math
from fractions import Fraction

from mpmath.ctx_iv import MPIntervalContext

from .reals import Affine, DigitSource, ExactRational, NamedIrrational, QuadraticSource

MIN_BITS = 128


def _frac(t) -> Fraction:
    sign, man, exp, _ = t
    if not man:
        return Fraction(0)
    value = Fraction(int(man)) * (Fraction(2) ** exp)
    return -value if sign else value


def _from_fraction(ctx, x: Fraction):
    return ctx.mpf(x.numerator) / x.denominator


def _hull(ctx, lo, hi):
    return ctx.mpf([lo.a, hi.b])


def mp_real(ctx, x):
    """Interval for a real built from its definition."""
    if isinstance(x, ExactRational):
        return _from_fraction(ctx, x.value)
    if isinstance(x, Affine):
        return _from_fraction(ctx, x.factor) * mp_real(ctx, x.base) + _from_fraction(ctx, x.offset)
    if isinstance(x, NamedIrrational):
        src = x.source
        if isinstance(src, QuadraticSource):
            return (src.p + src.q * ctx.sqrt(src.d)) / src.r
        if isinstance(src, DigitSource):
            err = Fraction(1, 10 ** src.frac_digits)
            return _hull(ctx, _from_fraction(ctx, src.value - err),
                         _from_fraction(ctx, src.value + err))
    raise TypeError(f"cannot rebuild {x!r}")


def _distance(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    half = Fraction(1, 2)
    has_int = math.ceil(lo) <= hi
    has_half = math.ceil(lo - half) + half <= hi
    d_lo, d_hi = abs(lo - round(lo)), abs(hi - round(hi))
    lower = Fraction(0) if has_int else min(d_lo, d_hi)
    upper = half if has_half else max(d_lo, d_hi)
    return lower, upper


def poly_distance(poly, n: int, bits: int, target: Fraction = Fraction(0)):
    """Enclosure of ‖poly(n) - target‖ evaluated through mpmath intervals."""
    ctx = MPIntervalContext()
    size = max((abs(n ** t.degree).bit_length() for t in poly.terms), default=0)
    ctx.prec = bits + size + 64
    total = ctx.mpf(0)
    for t in poly.terms:
        total = total + mp_real(ctx, t.coeff) * ctx.mpf(n ** t.degree)
    total = total - _from_fraction(ctx, Fraction(target))
    lo, hi = total._mpi_
    return _distance(_frac(lo), _frac(hi))


def real_distance(x, multiplier: int, bits: int, target: Fraction = Fraction(0)):
    """Enclosure of ‖multiplier * x - target‖."""
    ctx = MPIntervalContext()
    ctx.prec = bits + abs(multiplier).bit_length() + 64
    total = mp_real(ctx, x) * ctx.mpf(multiplier) - _from_fraction(ctx, Fraction(target))
    lo, hi = total._mpi_
    return _distance(_frac(lo), _frac(hi))


def plain_diff(values) -> int:
    """Iterated difference by explicit halving, written independently of core_diff."""
    values = list(values)
    while len(values) > 1:
        values = [values[i + 1] - values[i] for i in range(0, len(values), 2)]
    return values[0]


def _bits(bound) -> int:
    return 2 * max(MIN_BITS, (bound.bits or 0) if bound is not None else 0)


def verify_witness(report) -> bool:
    """Recompute the difference and ‖v(d)‖ < eps at doubled precision."""
    if any(b <= a for a, b in zip(report.indices.indices, report.indices.indices[1:])):
        return False
    if plain_diff(report.values) != report.diff_value:
        return False
    lower, upper = poly_distance(report.poly, report.diff_value, _bits(report.bound))
    return upper < report.epsilon


def verify_certificate(cert) -> list[str]:
    """Return the list of disagreements; empty means the certificate re-verifies."""
    problems = []
    seq = cert.sequence.elements
    if not cert.complete:
        problems.append("certificate is partial")
    intervals = cert.params.get("intervals")
    for check in cert.checks:
        values = [seq[i - 1] for i in check.indices]
        # the sign pattern of a level-l difference, applied to the listed values
        d = plain_diff(values)
        if d != check.diff_value:
            problems.append(f"{check.indices}: difference {check.diff_value} != {d}")
            continue
        if intervals is not None:
            inside = any(lo <= d <= hi for lo, hi in intervals)
            if inside != check.ok:
                problems.append(f"{check.indices}: interval membership disagrees")
            continue
        if check.bound is None:
            continue
        lower, upper = poly_distance(cert.poly, d, _bits(check.bound), check.target)
        ok = upper < check.bound.epsilon
        if ok != check.ok:
            problems.append(f"{check.indices}: recheck gives {ok}, certificate says {check.ok}")
    return problems
