"""Shared fixtures and small helpers for the test suite."""

import numpy as np
import pytest

from expsplit.discretization import Grid, build_line_operator, assemble_full_operator
from expsplit.harness import OperatorCache
from expsplit.problems import COEFF_ONE


@pytest.fixture(scope="session")
def op_cache():
    """One operator cache for the whole session; studies on the same
    coefficients and resolution share grids and eigendecompositions."""
    return OperatorCache()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def laplacian_families(n: int, m: int | None = None):
    """Constant-coefficient split operators (A and B commute)."""
    grid = Grid(n, m if m is not None else n)
    a_family = build_line_operator(COEFF_ONE, grid, "x")
    b_family = build_line_operator(COEFF_ONE, grid, "y")
    return grid, a_family, b_family


def laplacian_operator(n: int, m: int | None = None):
    grid, a_family, b_family = laplacian_families(n, m)
    return grid, a_family, b_family, assemble_full_operator(a_family, b_family)
