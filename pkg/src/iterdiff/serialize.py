"""Deterministic JSON for results and certificates.

Every integer and rational becomes a decimal or ``p/q`` string; keys are
sorted and nothing time-dependent is ever written.
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction

from .errors import NotFound
from .reals import NamedIrrational, fraction_str


def decimal_str(x: Fraction, digits: int = 20) -> str:
    """Rounded decimal rendering of an exact rational, for humans only."""
    x = Fraction(x)
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    # exponent e with 10^e <= x < 10^(e+1)
    e = len(str(x.numerator)) - len(str(x.denominator))
    if Fraction(10) ** e > x:
        e -= 1
    mant = round(x / Fraction(10) ** (e - digits + 1))
    if mant >= 10 ** digits:
        mant //= 10
        e += 1
    text = str(mant)
    body = text[0] + "." + text[1:].rstrip("0") if len(text) > 1 else text
    body = body.rstrip(".")
    if -5 <= e <= 20:
        return sign + _plain(mant, e - digits + 1)
    return f"{sign}{body}e{e}"


def _plain(mant: int, shift: int) -> str:
    if shift >= 0:
        return str(mant * 10 ** shift)
    text = str(mant).rjust(-shift + 1, "0")
    head, tail = text[:shift], text[shift:].rstrip("0")
    return f"{head}.{tail}" if tail else head


def _extras(obj) -> dict:
    # derived properties worth recording next to the raw fields
    out = {}
    for name in ("status", "verified", "verdict", "value", "density", "cubic_within_bound"):
        if hasattr(type(obj), name) and isinstance(getattr(type(obj), name), property):
            out[name] = getattr(obj, name)
    return out


def to_jsonable(obj):
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, NamedIrrational):
        return obj.name
    if isinstance(obj, NotFound):
        return {"found": False, "kind": obj.kind, "stats": to_jsonable(obj.stats)}
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_jsonable(getattr(obj, f.name))
               for f in dataclasses.fields(obj) if not callable(getattr(obj, f.name))}
        out.update({k: to_jsonable(v) for k, v in _extras(obj).items()})
        return out
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): to_jsonable(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if hasattr(obj, "name"):
        return str(obj.name)
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
