"""Size parameters of the n-person procedure."""

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from src.agents import minimum_r, removal_count
from src.exceptions import InputError


@dataclass(frozen=True)
class Params:
    n: int
    k: int
    removal_count: int
    r_min: int
    yz_count: int
    mini_pieces: int
    shrink_fraction: Fraction
    final_pieces: int

    @property
    def max_passes(self) -> int:
        """Every pass adds a new ordered pair to IA."""
        return self.n * (self.n - 1)


def derive_params(n: int) -> Params:
    """n=4 gives k=1, r >= 11, 8 removed, 3 Y/Z, 8 mini pieces, 12 final pieces."""
    if n < 4:
        raise InputError(f"the procedure needs at least 4 players, got {n}")
    k = (n - 3) * (n - 2) // 2
    mini = n * n - 3 * n + 4
    return Params(
        n=n,
        k=k,
        removal_count=removal_count(k),
        r_min=minimum_r(k),
        yz_count=k + 2,
        mini_pieces=mini,
        shrink_fraction=Fraction(n, mini),
        final_pieces=lcm(*range(1, n + 1)),
    )
