"""Shared fixtures: instances and completed runs."""

from fractions import Fraction

import pytest

from src.cli.generate import generate_densities
from src.protocol import run
from src.valuation import StepDensity


@pytest.fixture
def uniform4():
    return [StepDensity.uniform() for _ in range(4)]


@pytest.fixture
def opposed4():
    """Two players who dislike opposite halves; two uniform players."""
    left = StepDensity.normalized([0, Fraction(1, 2), 1], [3, 1])
    right = StepDensity.normalized([0, Fraction(1, 2), 1], [1, 3])
    return [left, right, StepDensity.uniform(), StepDensity.uniform()]


@pytest.fixture(scope="session")
def generic4():
    return generate_densities(4, seed=11, budget=4)


@pytest.fixture(scope="session")
def generic4_run(generic4):
    """(allocation, transcript) of one honest run, shared by the verifier tests."""
    return run(generic4)
