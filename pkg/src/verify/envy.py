"""Outcome checks on a final allocation: partition, exact envy, float oracle."""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config.settings import CROSSCHECK_TOLERANCE
from src.geometry import CAKE, Piece, are_disjoint, equals, union_all
from src.protocol.state import Allocation
from src.utils.logger import get_logger
from src.valuation import StepDensity, evaluate

logger = get_logger(__name__)


@dataclass(frozen=True)
class EnvyReport:
    """matrix[i][j] = player i+1's value of player j+1's share."""

    matrix: Tuple[Tuple[Fraction, ...], ...]
    violations: Tuple[Tuple[int, int], ...]

    @property
    def envy_free(self) -> bool:
        return not self.violations

    def frame(self) -> pd.DataFrame:
        """The matrix as floats, rows = evaluating player, columns = share owner."""
        labels = list(range(1, len(self.matrix) + 1))
        df = pd.DataFrame(
            [[float(v) for v in row] for row in self.matrix], index=labels, columns=labels
        )
        df.index.name = "player"
        df.columns.name = "share"
        return df


def value_matrix(allocation: Allocation, densities: Sequence[StepDensity]) -> List[List[Fraction]]:
    shares = allocation.share_list()
    return [[evaluate(d, share) for share in shares] for d in densities]


def check_envy_free(allocation: Allocation, densities: Sequence[StepDensity]) -> EnvyReport:
    """Chores: player i envies j when eval_i(X_i) > eval_i(X_j). Zero tolerance."""
    matrix = value_matrix(allocation, densities)
    violations = tuple(
        (i + 1, j + 1)
        for i, row in enumerate(matrix)
        for j, v in enumerate(row)
        if row[i] > v
    )
    if violations:
        logger.info("Envy violations: %s", violations)
    return EnvyReport(tuple(tuple(row) for row in matrix), violations)


def check_partition(allocation: Allocation, cake: Piece = CAKE) -> bool:
    parts = allocation.share_list() + [allocation.leftover]
    return are_disjoint(parts) and equals(union_all(parts), cake)


def matches_replay(allocation: Allocation, replayed: Allocation) -> bool:
    """Same shares and leftover as the allocation the transcript's grants add up to."""
    if allocation.n != replayed.n or not equals(allocation.leftover, replayed.leftover):
        return False
    return all(equals(a, b) for a, b in zip(allocation.share_list(), replayed.share_list()))


def _float_values(density: StepDensity, pieces: Sequence[Piece]) -> np.ndarray:
    """Direct overlap summation: sum over intervals and segments of overlap * density."""
    bps = np.array([float(b) for b in density.breakpoints])
    heights = np.array([float(v) for v in density.values])
    seg_lo, seg_hi = bps[:-1], bps[1:]
    out = np.zeros(len(pieces))
    for k, piece in enumerate(pieces):
        if piece.is_empty:
            continue
        lo = np.array([float(iv.lo) for iv in piece])[:, None]
        hi = np.array([float(iv.hi) for iv in piece])[:, None]
        overlap = np.clip(np.minimum(hi, seg_hi) - np.maximum(lo, seg_lo), 0.0, None)
        out[k] = float((overlap * heights).sum())
    return out


def numeric_crosscheck(
    allocation: Allocation,
    densities: Sequence[StepDensity],
    tolerance: float = CROSSCHECK_TOLERANCE,
    exact: Optional[EnvyReport] = None,
) -> bool:
    """Compare the exact value matrix against a float recomputation."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if exact is None:
        exact = check_envy_free(allocation, densities)
    shares = allocation.share_list()
    approx = np.vstack([_float_values(d, shares) for d in densities])
    reference = np.array([[float(v) for v in row] for row in exact.matrix])
    if approx.shape != reference.shape:
        return False
    worst = float(np.abs(approx - reference).max()) if approx.size else 0.0
    logger.debug("Crosscheck max deviation %.3g", worst)
    return worst <= tolerance
