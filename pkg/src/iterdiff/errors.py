"""Exception types and the not-found outcome shared by every search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class IterDiffError(Exception):
    """Base class for all library errors."""


class MalformedTuple(IterDiffError):
    pass


class TooShort(IterDiffError):
    pass


class MalformedQuery(IterDiffError):
    pass


class MalformedInput(IterDiffError):
    pass


class PrecisionExhausted(IterDiffError):
    pass


class BoundExceeded(IterDiffError):
    def __init__(self, message: str, coverage: dict[str, Any] | None = None):
        super().__init__(message)
        self.coverage = coverage or {}


class NotEnoughElements(IterDiffError):
    pass


class PipelineIncomplete(IterDiffError):
    def __init__(self, message: str, stats: dict[str, Any] | None = None):
        super().__init__(message)
        self.stats = stats or {}


@dataclass
class NotFound:
    """Negative search outcome; falsy so callers can write ``if result:``.

    ``kind`` is ``"within_bound"`` for bounded searches and ``"within_sequence"``
    when a finite input sequence was exhausted. Neither is a disproof.
    """

    kind: str
    stats: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return False
