"""The iterated difference operator and finite difference / finite-sum structures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (BoundExceeded, MalformedInput, MalformedQuery, MalformedTuple, NotFound,
                     TooShort)


@dataclass(frozen=True)
class FiniteSequence:
    elements: tuple[int, ...]
    source: str = ""

    def __post_init__(self):
        elems = tuple(int(x) for x in self.elements)
        if not elems:
            raise MalformedInput("a finite sequence must be nonempty")
        if any(b <= a for a, b in zip(elems, elems[1:])):
            raise MalformedInput("sequence elements must be strictly increasing")
        object.__setattr__(self, "elements", elems)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


def as_sequence(s: FiniteSequence | Iterable[int], source: str = "") -> FiniteSequence:
    return s if isinstance(s, FiniteSequence) else FiniteSequence(tuple(s), source)


@dataclass(frozen=True)
class IndexTuple:
    """Strictly increasing 1-based positions of length ``2**level``."""

    level: int
    indices: tuple[int, ...]

    def __post_init__(self):
        if self.level < 1 or len(self.indices) != 1 << self.level:
            raise MalformedTuple(f"need {1 << max(self.level, 0)} indices at level {self.level}")
        if self.indices[0] < 1 or any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise MalformedTuple("indices must be positive and strictly increasing")

    def values(self, s: FiniteSequence) -> tuple[int, ...]:
        return tuple(s.elements[i - 1] for i in self.indices)


def level_of(length: int) -> int:
    """Return l with ``length == 2**l`` and l >= 1, else raise MalformedTuple."""
    if length < 2 or length & (length - 1):
        raise MalformedTuple(f"tuple length {length} is not a power of two >= 2")
    return length.bit_length() - 1


def _diff(t: Sequence[int]) -> int:
    if len(t) == 2:
        return t[1] - t[0]
    h = len(t) // 2
    return _diff(t[h:]) - _diff(t[:h])


def iterated_diff(t: Sequence[int]) -> int:
    """Iterated difference of a ``2**l`` tuple: second-half value minus first-half value."""
    level_of(len(t))
    return _diff(tuple(int(x) for x in t))


def diff_signs(level: int) -> tuple[int, ...]:
    """Coefficients c with ``iterated_diff(t) == sum(c_i * t_i)``."""
    signs = (-1, 1)
    for _ in range(level - 1):
        signs = tuple(-x for x in signs) + signs
    return signs


@dataclass(frozen=True)
class DiffStructure:
    generator: FiniteSequence
    level: int
    values: tuple[int, ...]  # one entry per increasing index tuple, in lex order
    positive_only: bool = False

    @property
    def value_set(self) -> frozenset[int]:
        return frozenset(self.values)


@dataclass(frozen=True)
class FSStructure:
    generator: FiniteSequence
    values: tuple[int, ...]  # one entry per nonempty subset, 2**r - 1 in total

    @property
    def value_set(self) -> frozenset[int]:
        return frozenset(self.values)


def iter_tuples(n: int, level: int):
    """Lexicographic 1-based index tuples of length ``2**level`` from ``1..n``."""
    for combo in itertools.combinations(range(1, n + 1), 1 << level):
        yield combo


def diff_set(s: FiniteSequence | Iterable[int], level: int,
             positive_only: bool = False) -> DiffStructure:
    s = as_sequence(s)
    if level < 1:
        raise MalformedQuery("level must be >= 1")
    if len(s) < 1 << level:
        raise TooShort(f"need at least {1 << level} elements, got {len(s)}")
    signs = diff_signs(level)
    elems = s.elements
    values = []
    for combo in itertools.combinations(elems, 1 << level):
        d = sum(c * x for c, x in zip(signs, combo))
        if d > 0 or not positive_only:
            values.append(d)
    return DiffStructure(s, level, tuple(values), positive_only)


def fs_set(s: FiniteSequence | Iterable[int], r: int | None = None) -> FSStructure:
    s = as_sequence(s)
    r = len(s) if r is None else r
    if r < 1:
        raise MalformedQuery("r must be >= 1")
    if r > len(s):
        raise TooShort(f"r={r} exceeds sequence length {len(s)}")
    sums = [0]
    for x in s.elements[:r]:
        sums += [y + x for y in sums]
    return FSStructure(FiniteSequence(s.elements[:r], s.source), tuple(sums[1:]))


def partial_sums(s: FiniteSequence | Iterable[int]) -> FiniteSequence:
    s = as_sequence(s)
    return FiniteSequence(tuple(itertools.accumulate(s.elements)), f"partial sums of {s.source}".strip())


def _search_diff(E: frozenset[int], level: int, r: int, lo: int, hi: int,
                 stats: dict, node_budget: int | None = None) -> tuple[int, ...] | None:
    k = 1 << level
    signs = diff_signs(level)
    seq: list[int] = []
    E_sorted = sorted(E)

    def ok_with(x: int) -> bool:
        # every tuple whose last element is the new value x
        for combo in itertools.combinations(seq, k - 1):
            d = sum(c * y for c, y in zip(signs, combo)) + x
            if d not in E:
                return False
        return True

    def candidates():
        if len(seq) < k - 1:
            return range(seq[-1] + 1, hi + 1)
        # the tuple of the first k-1 elements plus x forces x - offset in E
        offset = sum(c * y for c, y in zip(signs, seq[:k - 1]))
        return (e - offset for e in E_sorted if seq[-1] < e - offset <= hi)

    def extend() -> bool:
        if len(seq) == r:
            return True
        for x in candidates():
            stats["nodes"] += 1
            if node_budget is not None and stats["nodes"] > node_budget:
                # coverage: the second element reached; smaller ones were exhausted
                raise BoundExceeded("difference-structure search exceeded its node budget",
                                    {**stats, "prefix": list(seq[:2])})
            if len(seq) >= k - 1 and not ok_with(x):
                continue
            seq.append(x)
            if extend():
                return True
            seq.pop()
        return False

    # the difference set is translation invariant, so a witness inside
    # [lo, hi] can be shifted to start at lo; the lex-least one does
    seq.append(lo)
    stats["nodes"] += 1
    return tuple(seq) if extend() else None


def contains_diff_structure(E: Iterable[int], level: int, r: int, search_bound: int,
                            node_budget: int | None = None) -> FiniteSequence | NotFound:
    """Lex-least r-term sequence in [-bound, bound] whose level-``level`` differences all lie in E.

    A :class:`NotFound` result only says that no witness exists within the bound.
    """
    if level < 1 or r < 1 << level:
        raise MalformedQuery(f"need r >= 2**level (r={r}, level={level})")
    if search_bound < 0:
        raise MalformedQuery("search_bound must be non-negative")
    E = frozenset(int(e) for e in E if int(e) > 0)
    stats = {"nodes": 0, "bound": search_bound}
    found = _search_diff(E, level, r, -search_bound, search_bound, stats, node_budget)
    if found is None:
        return NotFound("within_bound", stats)
    return FiniteSequence(found, f"diff-structure witness level {level}")


def contains_fs_structure(E: Iterable[int], r: int,
                          search_bound: int | None = None) -> FiniteSequence | NotFound:
    """Lex-least strictly increasing r-term generator in [1, bound] with every subset sum in E."""
    if r < 1:
        raise MalformedQuery("r must be >= 1")
    Es = frozenset(int(e) for e in E)
    # singletons are subset sums, so generator terms are themselves members of E
    cands = sorted(e for e in Es if e >= 1 and (search_bound is None or e <= search_bound))
    stats = {"nodes": 0, "bound": search_bound}
    gen: list[int] = []
    sums: list[int] = []

    def extend(start: int) -> bool:
        if len(gen) == r:
            return True
        for i in range(start, len(cands)):
            x = cands[i]
            stats["nodes"] += 1
            new = [y + x for y in sums]
            if all(y in Es for y in new):
                gen.append(x)
                sums.extend(new + [x])
                if extend(i + 1):
                    return True
                del sums[-len(new) - 1:]
                gen.pop()
        return False

    if extend(0):
        return FiniteSequence(tuple(gen), "fs-structure witness")
    return NotFound("within_bound", stats)


def read_sequence_file(path: str | Path) -> FiniteSequence:
    """Read one integer per line; blank lines and lines starting with '#' are skipped."""
    values = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(int(line))
        except ValueError as exc:
            raise MalformedInput(f"{path}:{lineno}: not an integer: {line!r}") from exc
    return FiniteSequence(tuple(values), str(path))
