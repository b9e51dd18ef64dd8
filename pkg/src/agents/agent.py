"""Honest agents: the parenthesized strategies of the protocol.

The protocol engine decides *when* a player acts (the rules); an Agent decides
*how* (the strategies), answering every question from its own StepDensity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Collection, Iterable, List, Sequence, Tuple

from src.exceptions import ContractViolation, InputError, ProtocolError
from src.geometry import EMPTY, ONE, Piece, as_fraction, difference, union
from src.utils.logger import get_logger
from src.valuation import StepDensity, evaluate, mark, select_extreme

logger = get_logger(__name__)


@dataclass(frozen=True)
class Augmentation:
    """Reserve cake `added` to the piece at `target_index`, owned by `source`."""

    target_index: int
    added: Piece
    source: int


def removal_count(k: int) -> int:
    return k * k + 4 * k + 3


def minimum_r(k: int) -> int:
    return k * k + 5 * k + 5


@dataclass(frozen=True)
class Agent:
    """Player `index` (1-based) answering queries with `density`."""

    index: int
    density: StepDensity

    def value(self, piece: Piece) -> Fraction:
        return evaluate(self.density, piece)

    def values(self, pieces: Iterable[Piece]) -> List[Fraction]:
        return [evaluate(self.density, piece) for piece in pieces]

    def is_envious(self, own: Piece, others: Sequence[Piece]) -> bool:
        """Someone else's piece is strictly smaller than mine."""
        mine = self.value(own)
        return any(mine > self.value(p) for p in others)

    def agrees_all_equal(self, pieces: Sequence[Piece]) -> bool:
        return len(set(self.values(pieces))) <= 1

    def pick_unequal_pair(self, pieces: Sequence[Piece]) -> Tuple[int, int]:
        """(larger, smaller) maximizing the margin, lexicographically least on ties."""
        values = self.values(pieces)
        best = None
        for a, va in enumerate(values):
            for b, vb in enumerate(values):
                if va > vb and (best is None or va - vb > best[0]):
                    best = (va - vb, a, b)
        if best is None:
            raise ContractViolation(f"player {self.index} sees all {len(pieces)} pieces as equal")
        return best[1], best[2]

    def name_r(self, larger: Piece, smaller: Piece, k: int) -> int:
        """Smallest r >= k^2+5k+5 with (k^2+4k+3) * mu(A) / r < mu(A) - mu(B)."""
        a, b = self.value(larger), self.value(smaller)
        if a <= b:
            raise ContractViolation(f"player {self.index} does not see A as larger than B")
        r = floor(removal_count(k) * a / (a - b)) + 1
        return max(r, minimum_r(k))

    def name_s(self, leftover_measure, epsilon, shrink_fraction, formula: str = "aside") -> int:
        """Number of mini-rounds needed to push the leftover below epsilon.

        "aside": smallest s >= 1 with L * (1 - f)^s < epsilon.
        "literal": smallest s >= 1 with (f * L)^s < epsilon.
        """
        leftover = as_fraction(leftover_measure)
        epsilon, f = as_fraction(epsilon), as_fraction(shrink_fraction)
        if epsilon <= 0 or not (0 < f < 1) or leftover < 0:
            raise InputError("name_s needs epsilon > 0, 0 < f < 1 and leftover >= 0")
        if formula == "aside":
            base, factor = leftover * (ONE - f), ONE - f
        elif formula == "literal":
            base, factor = f * leftover, f * leftover
            if base >= 1:
                raise InputError("literal s formula needs f * L < 1")
        else:
            raise InputError(f"unknown s formula {formula!r}")
        s, bound = 1, base
        while bound >= epsilon:
            s += 1
            bound *= factor
        return s

    def augment_to_tie(self, pieces: Sequence[Piece], reserves: Sequence[Piece], ways: int) -> List[Augmentation]:
        """Raise the ways-1 smallest pieces to the ways-th smallest value.

        Each amount is a leftmost mark inside the first reserve lot that covers
        it; only if no single lot does is it drawn across lots in order.
        """
        if ways < 2 or ways > len(pieces):
            raise InputError(f"cannot create a {ways}-way tie among {len(pieces)} pieces")
        order = select_extreme(self.density, pieces, ways, "smallest")
        values = self.values(pieces)
        level = values[order[-1]]
        lots = list(reserves)
        augmentations = []
        for t in order[:-1]:
            gap = level - values[t]
            if gap == 0:
                continue
            added = self._draw(lots, gap)
            augmentations.append(Augmentation(t, added, self.index))
            logger.debug("player %d augments piece %d by %s", self.index, t, gap)
        return augmentations

    def _draw(self, lots: List[Piece], amount: Fraction) -> Piece:
        lot_values = self.values(lots)
        for pos, lot in enumerate(lots):
            if lot_values[pos] >= amount:
                part = mark(self.density, lot, amount)
                lots[pos] = difference(lot, part)
                return part
        if sum(lot_values) < amount:
            raise ProtocolError(
                f"player {self.index} has reserves worth {sum(lot_values)} but needs {amount}"
            )
        drawn, need = EMPTY, amount
        for pos, lot in enumerate(lots):
            if need == 0:
                break
            if lot_values[pos] == 0:
                continue
            take = lot if lot_values[pos] <= need else mark(self.density, lot, need)
            need -= self.value(take)
            drawn = union(drawn, take)
            lots[pos] = difference(lot, take)
        return drawn

    def choose(
        self,
        pieces: Sequence[Piece],
        allowed: Collection[int],
        preferred: Collection[int] = (),
        rule: str = "smallest",
    ) -> int:
        """Take a smallest allowed piece; ties go to `preferred`, then the lowest index.

        Under the "required" rule the choice is first narrowed to the allowed
        pieces in `preferred` (the ones this player augmented), if any remain.
        """
        if not allowed:
            raise ProtocolError(f"player {self.index} has no piece to choose")
        if rule == "required":
            allowed = [t for t in allowed if t in preferred] or allowed
        elif rule != "smallest":
            raise InputError(f"unknown choose rule {rule!r}")
        values = {t: self.value(pieces[t]) for t in allowed}
        low = min(values.values())
        candidates = sorted(t for t, v in values.items() if v == low)
        favored = [t for t in candidates if t in preferred]
        return (favored or candidates)[0]
