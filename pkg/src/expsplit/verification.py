"""Quick self-checks on tiny grids, behind ``expsplit verify``.

Each check compares a fast production path against an independent route
(dense matrix exponentials, closed-form eigenvalues, spectral solves).
"""

from __future__ import annotations

import math
from types import SimpleNamespace

import numpy as np
import scipy.linalg

from .discretization import Grid, GridFunction, assemble_full_operator
from .integrators import (
    build_operator_families,
    lie_step,
    strang_b_step,
    strang_step,
)
from .linalg import (
    DiscreteOperator,
    cg_solve,
    exp_action,
    phi_action,
)
from .problems import COEFF_ONE, problem_by_label


def _check_dense_oracle() -> tuple:
    problem = problem_by_label("example1")
    grid = Grid(4, 4)
    a_family, b_family = build_operator_families(problem, grid)
    Ea = a_family.dense_matrix()
    Eb = b_family.dense_matrix()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        h = float(rng.uniform(0.05, 1.0))
        u = GridFunction(grid, rng.standard_normal(grid.size))
        g = GridFunction(grid, rng.standard_normal(grid.size))
        g2 = GridFunction(grid, rng.standard_normal(grid.size))
        expA = scipy.linalg.expm(h * Ea)
        expB = scipy.linalg.expm(h * Eb)
        expA2 = scipy.linalg.expm(0.5 * h * Ea)
        expB2 = scipy.linalg.expm(0.5 * h * Eb)

        lie = expA @ (expB @ (u.values + h * g.values))
        strang = expA2 @ (expB2 @ (expB2 @ (expA2 @ u.values) + h * g.values))
        strangb = (expA2 @ (expB2 @ expB2 @ (expA2 @ (u.values + 0.5 * h * g.values)))
                   + 0.5 * h * g2.values)

        worst = max(
            worst,
            np.abs(lie_step(a_family, b_family, h, u, g).values - lie).max(),
            np.abs(strang_step(a_family, b_family, h, u, g).values - strang).max(),
            np.abs(
                strang_b_step(a_family, b_family, h, u, g, g2).values - strangb
            ).max(),
        )
    return worst <= 1e-10, f"max deviation {worst:.2e} (tol 1e-10)"


def _check_phi_recurrence() -> tuple:
    rng = np.random.default_rng(11)
    n = 24
    M = rng.standard_normal((n, n))
    M = -(M @ M.T) - 0.1 * np.eye(n)
    decomp = DiscreteOperator(M).decomposition()
    v = rng.standard_normal(n)
    t = 0.37
    worst = 0.0
    for j in range(3):
        lhs = phi_action(decomp, j, t, v)
        rhs = v / math.factorial(j) + t * (M @ phi_action(decomp, j + 1, t, v))
        worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(v))
    return worst <= 1e-11, f"max residual {worst:.2e} (tol 1e-11)"


def _check_commuting_exactness() -> tuple:
    grid = Grid(5, 5)
    laplace = SimpleNamespace(a=COEFF_ONE, b=COEFF_ONE)
    a_family, b_family = build_operator_families(laplace, grid)
    op = assemble_full_operator(a_family, b_family)
    decomp = op.decomposition()
    rng = np.random.default_rng(3)
    u = GridFunction(grid, rng.standard_normal(grid.size))
    zero = GridFunction(grid, np.zeros(grid.size))
    h = 0.2
    exact = exp_action(decomp, h, u.values)
    worst = max(
        np.abs(lie_step(a_family, b_family, h, u, zero).values - exact).max(),
        np.abs(strang_step(a_family, b_family, h, u, zero).values - exact).max(),
        np.abs(strang_b_step(a_family, b_family, h, u, zero, zero).values - exact).max(),
    )
    scale = np.abs(u.values).max()
    return worst <= 1e-10 * scale, f"max deviation {worst:.2e}"


def _check_cg_vs_spectral() -> tuple:
    grid = Grid(8, 8)
    laplace = SimpleNamespace(a=COEFF_ONE, b=COEFF_ONE)
    a_family, b_family = build_operator_families(laplace, grid)
    op = assemble_full_operator(a_family, b_family)
    decomp = op.decomposition()
    rhs = GridFunction.from_callable(
        grid, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
    ).values
    x_cg = cg_solve(op, rhs, tol=1e-12)
    x_sp = decomp.from_spectral(decomp.to_spectral(rhs) / decomp.eigenvalues)
    err = np.linalg.norm(x_cg - x_sp) / np.linalg.norm(x_sp)
    return err <= 1e-11, f"relative gap {err:.2e}"


def _check_negative_definite() -> tuple:
    problem = problem_by_label("example1")
    grid = Grid(6, 6)
    a_family, b_family = build_operator_families(problem, grid)
    op = assemble_full_operator(a_family, b_family)
    lam_max = op.decomposition().eigenvalues.max()
    return lam_max < 0.0, f"largest eigenvalue {lam_max:.3e}"


CHECKS = [
    ("splitting steps match dense matrix-exponential oracle", _check_dense_oracle),
    ("phi-function recurrence", _check_phi_recurrence),
    ("commuting constant-coefficient split is exact", _check_commuting_exactness),
    ("CG solve agrees with spectral solve", _check_cg_vs_spectral),
    ("assembled operator is negative definite", _check_negative_definite),
]


def run_verification() -> list:
    """Run all checks; returns (name, passed, detail) triples."""
    results = []
    for name, check in CHECKS:
        try:
            passed, detail = check()
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, passed, detail))
    return results
