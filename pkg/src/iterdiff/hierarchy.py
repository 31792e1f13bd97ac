"""Explicit sets separating the difference-set and finite-sum families, with
bounded exhaustive checks of the finite-scale claims."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .core_diff import FiniteSequence, as_sequence, contains_diff_structure, contains_fs_structure, fs_set
from .errors import MalformedInput, MalformedQuery, NotEnoughElements, NotFound


@dataclass(frozen=True)
class SeparatorSet:
    name: str
    K: int
    elements: tuple[int, ...]
    claimed_in: tuple[str, ...] = ()
    claimed_not_in: tuple[str, ...] = ()
    blocks: tuple[tuple[int, ...], ...] = ()

    def __contains__(self, x: int) -> bool:
        return x in set(self.elements)


def factorial_block(k: int) -> tuple[int, ...]:
    f = math.factorial(2 * k)
    return tuple(f * j for j in range(1, k + 1))


def strict_inclusion_set(K: int) -> SeparatorSet:
    """Union over k <= K of the blocks {(2k)! j : 1 <= j <= k}.

    Block k holds the level-1 differences of the k+1 term progression
    (2k)! (0, 1, ..., k), while the factorial gaps keep any fixed length
    sequence from spreading its differences over several blocks.
    """
    if K < 1:
        raise MalformedQuery("K must be >= 1")
    blocks = tuple(factorial_block(k) for k in range(1, K + 1))
    return SeparatorSet("strict-inclusion", K, tuple(sorted(set().union(*blocks))),
                        ("Delta_{1,r} for every r",), ("Delta_1",), blocks)


def gap_check(sep: SeparatorSet) -> list[dict]:
    """max E_s < min E_{s+1} - (2s)! for every consecutive pair of blocks."""
    out = []
    for s, (a, b) in enumerate(zip(sep.blocks, sep.blocks[1:]), start=1):
        gap = min(b) - math.factorial(2 * s)
        out.append({"s": s, "max": max(a), "next_min_minus": gap, "ok": max(a) < gap})
    return out


def powers_of_ten_set(K: int) -> SeparatorSet:
    """{10^(j+1) - 10^i : 0 <= i <= j <= K}, i.e. numbers 9...90...0.

    These are exactly the pairwise differences of 1, 10, ..., 10^(K+1).
    """
    if K < 1:
        raise MalformedQuery("K must be >= 1")
    elems = sorted(10 ** (j + 1) - 10 ** i for i in range(K + 1) for j in range(i, K + 1))
    return SeparatorSet("powers-of-ten", K, tuple(elems), ("Delta_1",), ("IP_3",))


@dataclass
class LacunaryCheck:
    sequence: FiniteSequence
    target_length: int
    c_bound: int
    result: FiniteSequence | NotFound
    fs_size: int

    @property
    def found(self) -> bool:
        return bool(self.result)


def lacunary_fs_check(s, level: int = 2, c_bound: int = 200,
                      node_budget: int = 50_000_000) -> LacunaryCheck:
    """Search for a 14-term sequence in [-c_bound, c_bound] whose second
    differences all lie in the finite sums of ``s``.

    ``s`` must grow by a factor of at least 3 at every step. A NotFound
    result is finite-scale evidence only.
    """
    s = as_sequence(s)
    if level != 2:
        raise MalformedQuery("only level 2 (a 14-term generator) is supported; the search "
                             "is exponential in the generator length")
    for a, b in zip(s.elements, s.elements[1:]):
        if b < 3 * a:
            raise MalformedInput(f"ratio condition fails: {b} < 3 * {a}")
    if s.elements[0] < 1:
        raise MalformedInput("sequence must be positive")
    fs = fs_set(s).value_set
    result = contains_diff_structure(fs, 2, 14, c_bound, node_budget)
    return LacunaryCheck(s, 14, c_bound, result, len(fs))


def multiples_subsequence(s, m: int, target_len: int) -> FiniteSequence:
    """First ``target_len`` members of a residue class mod m.

    The class is the one whose leading members are lexicographically least,
    which is the class of the earliest element that has enough company.
    Every iterated difference of the result is a multiple of m.
    """
    s = as_sequence(s)
    if m < 1 or target_len < 1:
        raise MalformedQuery("need m >= 1 and target_len >= 1")
    classes: dict[int, list[int]] = {}
    for x in s.elements:
        classes.setdefault(x % m, []).append(x)
    eligible = [c[:target_len] for c in classes.values() if len(c) >= target_len]
    if not eligible:
        raise NotEnoughElements(f"no residue class mod {m} has {target_len} members")
    return FiniteSequence(tuple(min(eligible)), f"residue class mod {m}")


def window_density(E: Iterable[int], start: int, end: int) -> Fraction:
    """|E ∩ [start, end]| / (end - start + 1)."""
    if end < start:
        raise MalformedQuery("window must be nonempty")
    return Fraction(sum(1 for x in set(E) if start <= x <= end), end - start + 1)


def check_powers_of_ten(K: int = 8, r: int = 3) -> FiniteSequence | NotFound:
    return contains_fs_structure(powers_of_ten_set(K).elements, r)


def check_strict_inclusion(K: int = 4, bound: int | None = None) -> dict:
    sep = strict_inclusion_set(K)
    bound = bound if bound is not None else 2 * max(sep.elements)
    witnesses = {}
    for r in range(2, K + 1):
        res = contains_diff_structure(sep.elements, 1, r, bound)
        witnesses[r] = res
    return {"set": sep, "gaps": gap_check(sep), "witnesses": witnesses, "bound": bound}
