"""Pswitch sets: the finite menus of switch probabilities circuits draw from."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .circuits import CircuitError, as_probability


@dataclass(frozen=True)
class PswitchSet:
    """Strictly increasing probabilities in (0, 1).

    ``delta`` is the maximal interval: the largest gap between consecutive
    elements of the list augmented with 0 and 1.  A set is *uniform* when it
    equals {1/q, ..., (q-1)/q} for some q.
    """

    values: tuple[Fraction, ...]

    def __post_init__(self):
        checked = tuple(as_probability(v) for v in self.values)
        if not checked:
            raise CircuitError("pswitch set must be nonempty")
        if any(a >= b for a, b in zip(checked, checked[1:])):
            raise CircuitError("pswitch set values must be strictly increasing")
        object.__setattr__(self, "values", checked)

    @classmethod
    def from_values(cls, values: Iterable) -> "PswitchSet":
        """Build from any iterable; values are sorted, duplicates rejected."""
        return cls(tuple(sorted(Fraction(v) for v in values)))

    @classmethod
    def uniform(cls, q: int) -> "PswitchSet":
        if q < 2:
            raise CircuitError(f"uniform set needs q >= 2, got {q}")
        return cls(tuple(Fraction(i, q) for i in range(1, q)))

    @property
    def uniform_q(self) -> int | None:
        q = len(self.values) + 1
        if self.values == tuple(Fraction(i, q) for i in range(1, q)):
            return q
        return None

    @property
    def delta(self) -> Fraction:
        points = (Fraction(0),) + self.values + (Fraction(1),)
        return max(b - a for a, b in zip(points, points[1:]))

    def nearest(self, p: Fraction) -> Fraction:
        """Set element closest to p; ties resolved toward the smaller value."""
        return min(self.values, key=lambda v: (abs(v - p), v))

    def __contains__(self, item) -> bool:
        return item in self.values

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)
