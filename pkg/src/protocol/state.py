"""Run state: allocations, the irrevocable-advantage set and the transcript."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Tuple

from src.geometry import CAKE, EMPTY, Piece, are_disjoint, equals, union, union_all


@dataclass(frozen=True)
class Allocation:
    """Accumulated share per player (1-based ids) plus the unallocated leftover."""

    shares: Dict[int, Piece]
    leftover: Piece = EMPTY

    @classmethod
    def empty(cls, n: int) -> "Allocation":
        return cls({i: EMPTY for i in range(1, n + 1)}, CAKE)

    @property
    def n(self) -> int:
        return len(self.shares)

    def share_list(self) -> List[Piece]:
        return [self.shares[i] for i in sorted(self.shares)]

    def grant(self, grants: Dict[int, Piece], leftover: Piece) -> "Allocation":
        shares = dict(self.shares)
        for agent, piece in grants.items():
            shares[agent] = union(shares[agent], piece)
        return Allocation(shares, leftover)

    def is_partition_of(self, cake: Piece = CAKE) -> bool:
        parts = self.share_list() + [self.leftover]
        return are_disjoint(parts) and equals(union_all(parts), cake)


@dataclass(frozen=True)
class Certificate:
    """Values in the holder's measure at insertion: own + rest < other."""

    own: Fraction
    rest: Fraction
    other: Fraction

    @property
    def holds(self) -> bool:
        return self.own + self.rest < self.other


@dataclass
class IASet:
    """Ordered pairs (i, j): i may take any part of the leftover without envying j."""

    certificates: Dict[Tuple[int, int], Certificate] = field(default_factory=dict)

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.certificates

    def __len__(self) -> int:
        return len(self.certificates)

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(sorted(self.certificates))

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        return sorted(self.certificates)

    def insert(self, pair: Tuple[int, int], certificate: Certificate) -> None:
        if tuple(pair) in self.certificates:
            raise ValueError(f"pair {pair} is already in IA")
        if not certificate.holds:
            raise ValueError(f"pair {pair} has no valid certificate")
        self.certificates[tuple(pair)] = certificate

    def covers(self, holders, others) -> bool:
        return all((h, o) in self for h in holders for o in others if h != o)


@dataclass(frozen=True)
class Event:
    """One transcript record; `data` values are ints, strings, Fractions, Pieces or lists of them."""

    seq: int
    step: str
    kind: str
    actor: Optional[int]
    data: Dict[str, Any]


@dataclass
class Transcript:
    events: List[Event] = field(default_factory=list)

    def record(self, step: str, kind: str, actor: Optional[int] = None, **data) -> int:
        seq = len(self.events)
        self.events.append(Event(seq, step, kind, actor, data))
        return seq

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def of_kind(self, kind: str) -> List[Event]:
        return [e for e in self.events if e.kind == kind]

    def cut_count(self) -> int:
        """Knife cuts: a division into m pieces counts m - 1."""
        return sum(e.data["count"] - 1 for e in self.of_kind("cut"))

    def replay_allocation(self, n: int) -> Allocation:
        """Fold every `allocate` event onto the empty allocation."""
        allocation = Allocation.empty(n)
        for event in self.of_kind("allocate"):
            grants = {
                agent: piece
                for agent, piece in enumerate(event.data["grants"], start=1)
                if not piece.is_empty
            }
            allocation = allocation.grant(grants, event.data["leftover"])
        return allocation
