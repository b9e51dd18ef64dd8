"""Player measures as piecewise-constant densities on [0, 1).

These are the query primitives every protocol step reduces to: evaluate a
piece, mark a prefix of given value, cut into equal parts, and rank pieces.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Sequence, Tuple

from src.exceptions import InputError
from src.geometry import (
    EMPTY,
    ONE,
    ZERO,
    Interval,
    Piece,
    as_fraction,
    canonicalize,
    format_fraction,
    parse_fraction,
)


@dataclass(frozen=True)
class StepDensity:
    """Nonnegative step density with rational breakpoints and total mass 1."""

    breakpoints: Tuple[Fraction, ...]
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        breakpoints = tuple(as_fraction(b) for b in self.breakpoints)
        values = tuple(as_fraction(v) for v in self.values)
        if len(breakpoints) < 2 or breakpoints[0] != ZERO or breakpoints[-1] != ONE:
            raise InputError("breakpoints must start at 0 and end at 1")
        if any(a >= b for a, b in zip(breakpoints, breakpoints[1:])):
            raise InputError("breakpoints must be strictly increasing")
        if len(values) != len(breakpoints) - 1:
            raise InputError("need exactly one density value per segment")
        if any(v < 0 for v in values):
            raise InputError("density values must be nonnegative")
        total = sum((v * (b - a) for v, a, b in zip(values, breakpoints, breakpoints[1:])), ZERO)
        if total != ONE:
            raise InputError(f"density must have total measure 1, got {total}")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)

    @classmethod
    def normalized(cls, breakpoints: Sequence, values: Sequence) -> "StepDensity":
        """Build from raw (unnormalized) values, scaling exactly to total 1."""
        breakpoints = [as_fraction(b) for b in breakpoints]
        values = [as_fraction(v) for v in values]
        if len(values) != len(breakpoints) - 1:
            raise InputError("need exactly one density value per segment")
        if any(v < 0 for v in values):
            raise InputError("density values must be nonnegative")
        total = sum((v * (b - a) for v, a, b in zip(values, breakpoints, breakpoints[1:])), ZERO)
        if total <= 0:
            raise InputError("density must be positive somewhere")
        return cls(tuple(breakpoints), tuple(v / total for v in values))

    @classmethod
    def uniform(cls) -> "StepDensity":
        return cls((ZERO, ONE), (ONE,))

    @classmethod
    def from_records(cls, records: Sequence[Sequence]) -> "StepDensity":
        """Parse [(breakpoint, value), ...]; the final breakpoint 1 is implicit."""
        if not records:
            raise InputError("a density needs at least one record")
        breakpoints = [parse_fraction(bp) for bp, _ in records] + [ONE]
        values = [parse_fraction(v) for _, v in records]
        return cls.normalized(breakpoints, values)

    def to_records(self) -> List[Tuple[str, str]]:
        return [
            (format_fraction(bp), format_fraction(v))
            for bp, v in zip(self.breakpoints, self.values)
        ]

    def chunks(self, piece: Piece) -> Iterator[Tuple[Fraction, Fraction, Fraction]]:
        """Yield (lo, hi, density) for each maximal constant-density part of piece."""
        bps = self.breakpoints
        for iv in piece:
            k = bisect_right(bps, iv.lo) - 1
            while k < len(self.values) and bps[k] < iv.hi:
                lo = max(iv.lo, bps[k])
                hi = min(iv.hi, bps[k + 1])
                if lo < hi:
                    yield lo, hi, self.values[k]
                k += 1


LENGTH = StepDensity.uniform()


def evaluate(d: StepDensity, p: Piece) -> Fraction:
    """Exact measure of p: sum of overlap length times density."""
    return sum(((hi - lo) * v for lo, hi, v in d.chunks(p)), ZERO)


def mark(d: StepDensity, p: Piece, target) -> Piece:
    """Leftmost prefix of p whose measure is exactly `target`.

    The prefix ends at the smallest cut coordinate reaching the target, so
    zero-density stretches right after that point stay outside.
    """
    target = as_fraction(target)
    total = evaluate(d, p)
    if target < 0 or target > total:
        raise InputError(f"mark target {target} outside [0, {total}]")
    if target == 0:
        return EMPTY
    need = target
    taken: list[Interval] = []
    for lo, hi, v in d.chunks(p):
        avail = (hi - lo) * v
        if v > 0 and avail >= need:
            taken.append(Interval(lo, lo + need / v))
            return canonicalize(taken)
        taken.append(Interval(lo, hi))
        need -= avail
    return canonicalize(taken)


def cut_equal(d: StepDensity, p: Piece, m: int) -> List[Piece]:
    """Cut p into m disjoint pieces of equal measure by successive leftmost marks.

    A piece the player values at zero is cut into m parts of equal length.
    """
    if m < 1:
        raise InputError(f"cannot cut into {m} pieces")
    if p.is_empty:
        return [EMPTY] * m
    measure = d
    total = evaluate(d, p)
    if total == 0:
        measure, total = LENGTH, p.length
    share = total / m
    pieces: list[Piece] = []
    current: list[Interval] = []
    need = share
    for lo, hi, v in measure.chunks(p):
        start = lo
        while len(pieces) < m - 1 and v > 0 and (hi - start) * v >= need:
            x = start + need / v
            current.append(Interval(start, x))
            pieces.append(canonicalize(current))
            current, need, start = [], share, x
        if start < hi:
            current.append(Interval(start, hi))
            need -= (hi - start) * v
    pieces.append(canonicalize(current))
    return pieces


def select_extreme(d: StepDensity, pieces: Sequence[Piece], count: int, mode: str = "smallest") -> List[int]:
    """Indices of the `count` smallest (or largest) pieces, ties to the lower index."""
    if count < 0 or count > len(pieces):
        raise InputError(f"cannot select {count} of {len(pieces)} pieces")
    values = [evaluate(d, piece) for piece in pieces]
    if mode == "smallest":
        order = sorted(range(len(pieces)), key=lambda t: (values[t], t))
    elif mode == "largest":
        order = sorted(range(len(pieces)), key=lambda t: (-values[t], t))
    else:
        raise InputError(f"unknown selection mode {mode!r}")
    return order[:count]
