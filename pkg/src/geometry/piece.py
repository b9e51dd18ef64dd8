"""Exact set algebra on finite unions of half-open subintervals of [0, 1)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Tuple

from src.exceptions import InputError

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction (never floats)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise InputError(f"refusing inexact coordinate {value!r}")
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"not a rational number: {value!r}") from e
    raise InputError(f"not a rational number: {value!r}")


def format_fraction(value: Fraction) -> str:
    """Serialize as "p/q", always with an explicit denominator ("0/1", "1/1")."""
    value = as_fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str) -> Fraction:
    """Parse a "p/q" (or plain integer) string."""
    return as_fraction(str(text).strip())


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open interval [lo, hi) inside [0, 1]; never empty."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        if not (ZERO <= lo < hi <= ONE):
            raise InputError(f"malformed interval [{lo}, {hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def to_pair(self) -> list:
        return [format_fraction(self.lo), format_fraction(self.hi)]


@dataclass(frozen=True)
class Piece:
    """A canonical finite union of intervals: sorted, disjoint, non-adjacent.

    Build pieces with `canonicalize` or `Piece.from_pairs`; the constructor
    trusts its input so that set operations, which produce canonical output
    by construction, do not pay for re-validation.
    """

    intervals: Tuple[Interval, ...] = ()

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def length(self) -> Fraction:
        return sum((iv.length for iv in self.intervals), ZERO)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence]) -> "Piece":
        return canonicalize(Interval(lo, hi) for lo, hi in pairs)

    def to_pairs(self) -> list:
        return [iv.to_pair() for iv in self.intervals]

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        return " ".join(f"[{iv.lo},{iv.hi})" for iv in self.intervals)


EMPTY = Piece()
CAKE = Piece((Interval(ZERO, ONE),))


def canonicalize(intervals: Iterable[Interval]) -> Piece:
    """Sort and merge overlapping or touching intervals into canonical form."""
    ordered = sorted(intervals, key=lambda iv: (iv.lo, iv.hi))
    merged: list[list[Fraction]] = []
    for iv in ordered:
        if not isinstance(iv, Interval):
            raise InputError(f"expected Interval, got {iv!r}")
        if merged and iv.lo <= merged[-1][1]:
            if iv.hi > merged[-1][1]:
                merged[-1][1] = iv.hi
        else:
            merged.append([iv.lo, iv.hi])
    return Piece(tuple(Interval(lo, hi) for lo, hi in merged))


def union(a: Piece, b: Piece) -> Piece:
    if not a:
        return b
    if not b:
        return a
    return canonicalize(a.intervals + b.intervals)


def union_all(pieces: Iterable[Piece]) -> Piece:
    intervals: list[Interval] = []
    for piece in pieces:
        intervals.extend(piece.intervals)
    return canonicalize(intervals)


def difference(a: Piece, b: Piece) -> Piece:
    """Set difference a \\ b by a single sweep over both sorted sequences."""
    if not a or not b:
        return a
    out: list[Interval] = []
    subtrahend = b.intervals
    k = 0
    for iv in a.intervals:
        lo = iv.lo
        while k < len(subtrahend) and subtrahend[k].hi <= lo:
            k += 1
        m = k
        while m < len(subtrahend) and subtrahend[m].lo < iv.hi:
            cut = subtrahend[m]
            if cut.lo > lo:
                out.append(Interval(lo, cut.lo))
            lo = max(lo, cut.hi)
            if lo >= iv.hi:
                break
            m += 1
        if lo < iv.hi:
            out.append(Interval(lo, iv.hi))
    # pieces of a canonical piece minus anything stay sorted and non-adjacent
    return Piece(tuple(out))


def intersection(a: Piece, b: Piece) -> Piece:
    if not a or not b:
        return EMPTY
    out: list[Interval] = []
    i = j = 0
    while i < len(a.intervals) and j < len(b.intervals):
        x, y = a.intervals[i], b.intervals[j]
        lo, hi = max(x.lo, y.lo), min(x.hi, y.hi)
        if lo < hi:
            out.append(Interval(lo, hi))
        if x.hi <= y.hi:
            i += 1
        else:
            j += 1
    return canonicalize(out)


def equals(a: Piece, b: Piece) -> bool:
    return a.intervals == b.intervals


def is_subset(a: Piece, b: Piece) -> bool:
    return difference(a, b).is_empty


def are_disjoint(pieces: Sequence[Piece]) -> bool:
    """True iff no two pieces share a point (total length is additive)."""
    total = sum((p.length for p in pieces), ZERO)
    return union_all(pieces).length == total
