"""Test problems: the inhomogeneous model equations, Dirichlet-map
homogenization, and the boundary-driven extrapolation formulation.

Inhomogeneities are stored in separable form, sum of c_k(t) * G_k(x,y),
with analytic time derivatives.  That keeps the reference solver exact in
time for polynomial time dependence and avoids differencing noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .discretization import (
    CoefficientField,
    Grid,
    GridFunction,
    LineOperatorFamily,
    apply_split_operator,
    boundary_coupling_vector,
)
from .exceptions import MissingDerivative, MissingLiftDerivative
from .linalg import DiscreteOperator, cg_solve


def _eval_factor(f, t: float) -> float:
    return float(f(t)) if callable(f) else float(f)


def _neg_factor(f):
    if callable(f):
        return lambda t: -f(t)
    return -f


@dataclass(frozen=True)
class SourceTerm:
    """One separable term c(t) * G(x,y) with time derivatives of c.

    time_factors holds (c, c', c'', ...); entries may be plain floats for
    constant factors.
    """

    time_factors: tuple
    spatial: Callable


class SampledSource:
    """Inhomogeneity sampled on a grid: sum of c_k(t) * vec_k."""

    def __init__(self, terms, n: int):
        self.terms = [(tuple(tf), np.asarray(vec, float)) for tf, vec in terms]
        self.n = n

    def max_order(self) -> int:
        if not self.terms:
            return 10  # identically zero: all derivatives available
        return min(len(tf) for tf in (t[0] for t in self.terms)) - 1

    def value(self, t: float, order: int = 0) -> np.ndarray:
        out = np.zeros(self.n)
        for tf, vec in self.terms:
            if order >= len(tf):
                raise MissingDerivative(
                    f"time derivative of order {order} not available"
                )
            out += _eval_factor(tf[order], t) * vec
        return out


@dataclass(frozen=True)
class ProblemSpec:
    """A parabolic model problem in one of three formulations.

    "standard" / "homogenized": u' = Lu + g with homogeneous Dirichlet
    data and g given pointwise in separable form.  "extrapolation":
    boundary-driven problem y' = Ly + c with c the boundary stencil
    vector of the trace (the discrete realization of L * Dirichlet-map).
    """

    label: str
    a: CoefficientField
    b: CoefficientField
    u0: Callable
    formulation: str = "standard"
    source_terms: tuple = ()
    boundary_trace: Optional[Callable] = None
    trace_time_factors: tuple = (1.0, 0.0, 0.0)
    g_vanishes_on_boundary: bool = False
    recover: Optional[Callable] = None
    exact: Optional[Callable] = None

    def __post_init__(self):
        if self.formulation not in ("standard", "homogenized", "extrapolation"):
            raise ValueError(f"unknown formulation {self.formulation!r}")
        if self.formulation == "extrapolation" and self.boundary_trace is None:
            raise ValueError("extrapolation formulation needs a boundary trace")

    # -- pointwise inhomogeneity (standard / homogenized only) --

    def g(self, t, x, y, order: int = 0):
        if self.formulation == "extrapolation":
            raise ValueError(
                "the extrapolation-space inhomogeneity is grid-dependent; "
                "use sampled_source"
            )
        out = 0.0
        for term in self.source_terms:
            if order >= len(term.time_factors):
                raise MissingDerivative(
                    f"time derivative of order {order} not available"
                )
            out = out + _eval_factor(term.time_factors[order], t) * term.spatial(x, y)
        return out

    def g_t(self, t, x, y):
        return self.g(t, x, y, order=1)

    def g_tt(self, t, x, y):
        return self.g(t, x, y, order=2)

    # -- grid realizations --

    def initial_values(self, grid: Grid) -> GridFunction:
        return GridFunction.from_callable(grid, self.u0)

    def sampled_source(self, grid: Grid, a_family: LineOperatorFamily,
                       b_family: LineOperatorFamily) -> SampledSource:
        if self.formulation == "extrapolation":
            coupling = boundary_coupling_vector(
                a_family, b_family, self.boundary_trace
            )
            return SampledSource(
                [(self.trace_time_factors, coupling.values)], grid.size
            )
        terms = []
        for term in self.source_terms:
            vec = GridFunction.from_callable(grid, term.spatial).values
            terms.append((term.time_factors, vec))
        return SampledSource(terms, grid.size)


# ---------------------------------------------------------------------------
# The experiment problems
# ---------------------------------------------------------------------------

COEFF_A = CoefficientField(lambda x, y: 2.0 * x * y + 3.0, "2xy+3")
COEFF_B = CoefficientField(lambda x, y: 2.0 * x * y**4 + 1.0, "2xy^4+1")
COEFF_ONE = CoefficientField(lambda x, y: np.ones(np.broadcast(x, y).shape), "1")


def initial_bump(x, y):
    """Smooth bump vanishing to all orders on the boundary, max value 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xs, ys = np.broadcast_arrays(x, y)
    out = np.zeros(xs.shape)
    inside = (xs > 0.0) & (xs < 1.0) & (ys > 0.0) & (ys < 1.0)
    xi, yi = xs[inside], ys[inside]
    out[inside] = np.exp(8.0 - 1.0 / (xi * (1.0 - xi)) - 1.0 / (yi * (1.0 - yi)))
    return out


def _poly_bubble(x, y):
    return x * (1.0 - x) * y * (1.0 - y)


def example_order_reduction() -> ProblemSpec:
    """Inhomogeneity that does not vanish on the boundary for t > 0.

    g(t,x,y) = x(1-x)y(1-y) + t*exp(x^3 y); full order for Lie, order
    reduction towards 1.25 for Strang in the L2 norm.
    """
    return ProblemSpec(
        label="example1",
        a=COEFF_A,
        b=COEFF_B,
        u0=initial_bump,
        source_terms=(
            SourceTerm((1.0, 0.0, 0.0), _poly_bubble),
            SourceTerm((lambda t: t, 1.0, 0.0), lambda x, y: np.exp(x**3 * y)),
        ),
        g_vanishes_on_boundary=False,
    )


def example_full_order() -> ProblemSpec:
    """Inhomogeneity vanishing on the boundary for all t: full order.

    g(t,x,y) = x(1-x)y(1-y)*exp(t); Lie converges at order one and Strang
    at order two in the L2 norm.
    """
    return ProblemSpec(
        label="example2",
        a=COEFF_A,
        b=COEFF_B,
        u0=initial_bump,
        source_terms=(
            SourceTerm((np.exp, np.exp, np.exp, np.exp), _poly_bubble),
        ),
        g_vanishes_on_boundary=True,
    )


def example_inhomogeneous_bc() -> ProblemSpec:
    """Boundary-driven problem with constant trace 1, severe order reduction.

    Semidiscrete form y' = L y + c with c the boundary stencil vector of
    the constant trace; errors in the L2 norm drop to order one quarter.
    """
    return ProblemSpec(
        label="example3",
        a=COEFF_A,
        b=COEFF_B,
        u0=initial_bump,
        formulation="extrapolation",
        boundary_trace=lambda x, y: np.ones(np.broadcast(x, y).shape),
        trace_time_factors=(1.0, 0.0, 0.0),
        g_vanishes_on_boundary=False,
    )


def _manufactured_decaying_sine() -> ProblemSpec:
    two_pi_sq = 2.0 * np.pi**2

    def sine(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    c = two_pi_sq - 1.0
    return ProblemSpec(
        label="manufactured:decaying-sine",
        a=COEFF_ONE,
        b=COEFF_ONE,
        u0=sine,
        source_terms=(
            SourceTerm(
                (
                    lambda t: c * np.exp(-t),
                    lambda t: -c * np.exp(-t),
                    lambda t: c * np.exp(-t),
                    lambda t: -c * np.exp(-t),
                ),
                sine,
            ),
        ),
        g_vanishes_on_boundary=True,
        exact=lambda t, x, y: np.exp(-t) * sine(x, y),
    )


_MANUFACTURED = {
    "decaying-sine": _manufactured_decaying_sine,
}

_EXAMPLES = {
    "example1": example_order_reduction,
    "example2": example_full_order,
    "example3": example_inhomogeneous_bc,
}


def problem_by_label(label: str) -> ProblemSpec:
    """Look up a problem: example1/2/3 or manufactured:<name>."""
    if label in _EXAMPLES:
        return _EXAMPLES[label]()
    if label.startswith("manufactured:"):
        name = label.split(":", 1)[1]
        if name in _MANUFACTURED:
            return _MANUFACTURED[name]()
    raise ValueError(f"unknown problem label {label!r}")


def problem_labels() -> list:
    return sorted(_EXAMPLES) + [f"manufactured:{n}" for n in sorted(_MANUFACTURED)]


# ---------------------------------------------------------------------------
# Dirichlet lift and homogenization
# ---------------------------------------------------------------------------


def dirichlet_lift(op: DiscreteOperator, a_family: LineOperatorFamily,
                   b_family: LineOperatorFamily, boundary_trace: Callable,
                   tol: float = 1e-12) -> GridFunction:
    """Discrete harmonic lift: L_h v = -coupling(f), the interior solution
    of the homogeneous equation with trace f on the boundary."""
    coupling = boundary_coupling_vector(a_family, b_family, boundary_trace)
    return GridFunction(a_family.grid, cg_solve(op, -coupling.values, tol=tol))


@dataclass(frozen=True)
class LiftTerm:
    """Separable lift term c(t) * F(x,y) with the analytic image L*F."""

    time_factors: tuple
    spatial: Callable
    l_spatial: Callable


@dataclass(frozen=True)
class BoundaryLift:
    terms: tuple


def homogenize(a: CoefficientField, b: CoefficientField, w0: Callable,
               lift: BoundaryLift, label: str = "homogenized") -> ProblemSpec:
    """Subtract a known smooth lift F: U = w - F solves the homogeneous-BC
    problem with inhomogeneity L F - dF/dt; attaches the recovery map."""
    for term in lift.terms:
        if len(term.time_factors) < 2:
            raise MissingLiftDerivative(
                "each lift term needs at least c and c' time factors"
            )

    source = []
    for term in lift.terms:
        source.append(SourceTerm(term.time_factors, term.l_spatial))
        shifted = tuple(_neg_factor(f) for f in term.time_factors[1:])
        source.append(SourceTerm(shifted, term.spatial))

    def u0(x, y):
        out = np.asarray(w0(x, y), float).copy()
        for term in lift.terms:
            out = out - _eval_factor(term.time_factors[0], 0.0) * term.spatial(x, y)
        return out

    def recover(values: np.ndarray, t: float, grid: Grid) -> np.ndarray:
        out = np.asarray(values, float).copy()
        X, Y = grid.mesh()
        for term in lift.terms:
            out = out + (
                _eval_factor(term.time_factors[0], t)
                * np.broadcast_to(term.spatial(X, Y), (grid.ny, grid.nx)).ravel()
            )
        return out

    return ProblemSpec(
        label=label,
        a=a,
        b=b,
        u0=u0,
        formulation="homogenized",
        source_terms=tuple(source),
        recover=recover,
    )
