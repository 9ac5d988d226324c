"""The splitting time steppers and the unsplit reference solver.

The three one-step schemes advance u_n -> u_{n+1}:

    lie:      exp(hA) exp(hB) (u + h*g(t_n))
    strang:   exp(h/2 A) exp(h/2 B) ( exp(h/2 B) exp(h/2 A) u + h*g(t_n+h/2) )
    strang_b: exp(h/2 A) exp(hB) exp(h/2 A) (u + h/2*g(t_n)) + h/2*g(t_n+h)

The compositions are applied literally; in particular the two inner
exp(h/2 B) factors of the strang scheme are never fused, since the
placement of the inhomogeneity is the point of that scheme.

The reference solver is exponential quadrature on the unsplit operator L
(exact in space relative to the semidiscrete system, third order in
time), not substepped splitting: a substepped low-order splitting would
be useless as a reference for the quarter-order experiment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import (
    Grid,
    GridFunction,
    LineOperatorFamily,
    build_line_operator,
)
from .exceptions import GridMismatch, MissingDerivative
from .linalg import DiscreteOperator, phi_values
from .problems import ProblemSpec, SampledSource

SCHEME_VARIANTS = ("lie", "strang", "strang_b")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid on [0, T]."""

    t_final: float
    n_steps: int

    def __post_init__(self):
        if self.t_final <= 0.0:
            raise ValueError("final time must be positive")
        if self.n_steps < 0:
            raise ValueError("step count must be non-negative")

    @property
    def h(self) -> float:
        return self.t_final / self.n_steps


def _check_step_args(a_family, b_family, h, *functions):
    if a_family.grid != b_family.grid:
        raise GridMismatch("operator families live on different grids")
    for u in functions:
        if u.grid != a_family.grid:
            raise GridMismatch("grid function lives on a different grid")
    if h <= 0.0:
        raise ValueError("step size must be positive")


def lie_step(a_family: LineOperatorFamily, b_family: LineOperatorFamily,
             h: float, u: GridFunction, g_tn: GridFunction) -> GridFunction:
    _check_step_args(a_family, b_family, h, u, g_tn)
    v = u.values + h * g_tn.values
    v = b_family._exp_values(h, v)
    v = a_family._exp_values(h, v)
    return GridFunction(u.grid, v)


def strang_step(a_family: LineOperatorFamily, b_family: LineOperatorFamily,
                h: float, u: GridFunction, g_mid: GridFunction) -> GridFunction:
    _check_step_args(a_family, b_family, h, u, g_mid)
    v = a_family._exp_values(0.5 * h, u.values)
    v = b_family._exp_values(0.5 * h, v)
    v = v + h * g_mid.values
    v = b_family._exp_values(0.5 * h, v)
    v = a_family._exp_values(0.5 * h, v)
    return GridFunction(u.grid, v)


def strang_b_step(a_family: LineOperatorFamily, b_family: LineOperatorFamily,
                  h: float, u: GridFunction, g_tn: GridFunction,
                  g_tn1: GridFunction) -> GridFunction:
    _check_step_args(a_family, b_family, h, u, g_tn, g_tn1)
    v = u.values + 0.5 * h * g_tn.values
    v = a_family._exp_values(0.5 * h, v)
    v = b_family._exp_values(h, v)
    v = a_family._exp_values(0.5 * h, v)
    v = v + 0.5 * h * g_tn1.values
    return GridFunction(u.grid, v)


def build_operator_families(problem: ProblemSpec, grid: Grid):
    a_family = build_line_operator(problem.a, grid, "x")
    b_family = build_line_operator(problem.b, grid, "y")
    return a_family, b_family


def integrate(variant: str, problem: ProblemSpec, grid: Grid, time: TimeGrid,
              a_family: LineOperatorFamily | None = None,
              b_family: LineOperatorFamily | None = None,
              source: SampledSource | None = None,
              u0: GridFunction | None = None) -> GridFunction:
    """Run n_steps of the chosen scheme from the problem's initial value."""
    if variant not in SCHEME_VARIANTS:
        raise ValueError(f"unknown scheme variant {variant!r}")
    if a_family is None or b_family is None:
        a_family, b_family = build_operator_families(problem, grid)
    if source is None:
        source = problem.sampled_source(grid, a_family, b_family)
    u = problem.initial_values(grid) if u0 is None else u0
    if u.grid != grid:
        raise GridMismatch("initial value lives on a different grid")
    if time.n_steps == 0:
        return u.copy()

    h = time.h
    gf = lambda t: GridFunction(grid, source.value(t))
    for n in range(time.n_steps):
        tn = n * h
        if variant == "lie":
            u = lie_step(a_family, b_family, h, u, gf(tn))
        elif variant == "strang":
            u = strang_step(a_family, b_family, h, u, gf(tn + 0.5 * h))
        else:
            u = strang_b_step(a_family, b_family, h, u, gf(tn), gf(tn + h))
    return u


def reference_solve(op: DiscreteOperator, u0: GridFunction,
                    source: SampledSource, time: TimeGrid) -> GridFunction:
    """Exponential quadrature on the unsplit operator.

    One step advances with exp(hL), h*phi_1(hL)g, h^2*phi_2(hL)g' and
    h^3*phi_3(hL)g''; exact whenever g is at most quadratic in t.
    """
    if time.n_steps < 1:
        raise ValueError("reference solve needs at least one step")
    if source.max_order() < 2:
        raise MissingDerivative("reference solver needs g' and g''")

    decomp = op.decomposition()
    lam = decomp.eigenvalues
    h = time.h
    E = np.exp(h * lam)
    P1 = h * phi_values(1, h * lam)
    P2 = h**2 * phi_values(2, h * lam)
    P3 = h**3 * phi_values(3, h * lam)

    uh = decomp.to_spectral(u0.values)
    spectral_terms = [
        (tf, decomp.to_spectral(vec)) for tf, vec in source.terms
    ]

    from .problems import _eval_factor  # factor evaluation helper

    for n in range(time.n_steps):
        t = n * h
        uh = E * uh
        for tf, vh in spectral_terms:
            uh = uh + (
                _eval_factor(tf[0], t) * P1
                + _eval_factor(tf[1], t) * P2
                + _eval_factor(tf[2], t) * P3
            ) * vh
    return GridFunction(u0.grid, decomp.from_spectral(uh))
