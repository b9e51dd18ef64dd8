"""Seeded random instances."""

from fractions import Fraction
from typing import List

import numpy as np

from src.config.settings import GENERATOR
from src.exceptions import InputError
from src.valuation import StepDensity


def random_density(rng: np.random.Generator, budget: int) -> StepDensity:
    """Between 1 and `budget` segments on a k/64 grid, integer heights, normalized."""
    denominator = GENERATOR["breakpoint_denominator"]
    segments = int(rng.integers(1, budget + 1))
    inner = sorted(int(x) for x in rng.choice(np.arange(1, denominator), size=segments - 1, replace=False))
    breakpoints = [Fraction(0)] + [Fraction(x, denominator) for x in inner] + [Fraction(1)]
    values = [Fraction(int(v)) for v in rng.integers(1, GENERATOR["max_value"] + 1, size=segments)]
    return StepDensity.normalized(breakpoints, values)


def generate_densities(n: int, seed: int, budget: int = GENERATOR["budget"]) -> List[StepDensity]:
    if n < 4:
        raise InputError(f"instances need n >= 4, got {n}")
    if not 1 <= budget < GENERATOR["breakpoint_denominator"]:
        raise InputError(f"budget must be between 1 and {GENERATOR['breakpoint_denominator'] - 1}")
    rng = np.random.default_rng(seed)
    return [random_density(rng, budget) for _ in range(n)]
