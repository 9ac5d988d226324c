"""Error norms and the numerical probe of the splitting smoothing bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discretization import GridFunction, LineOperatorFamily
from .exceptions import DecompositionMissing
from .linalg import DiscreteOperator, cg_solve


@dataclass(frozen=True)
class NormKind:
    """Selector for the error norm: plain L2, dual, or fractional-power."""

    kind: str
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("l2", "dual", "frac"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "frac" and not 0.0 <= self.gamma <= 2.0:
            raise ValueError("fractional exponent must lie in [0, 2]")

    @classmethod
    def parse(cls, spec: str) -> "NormKind":
        if spec == "l2":
            return cls("l2")
        if spec == "dual":
            return cls("dual")
        if spec.startswith("frac:"):
            return cls("frac", float(spec.split(":", 1)[1]))
        raise ValueError(f"cannot parse norm spec {spec!r}")

    @property
    def name(self) -> str:
        return f"frac:{self.gamma:g}" if self.kind == "frac" else self.kind


def discrete_l2(u: GridFunction) -> float:
    """Quadrature-weighted Euclidean norm sqrt(dx*dy*sum(v^2))."""
    return math.sqrt(u.grid.dx * u.grid.dy) * float(np.linalg.norm(u.values))


def dual_norm(op: DiscreteOperator, u: GridFunction, tol: float = 1e-12) -> float:
    """discrete_l2 of L^{-1} u; spectral when a decomposition is cached."""
    if op.has_decomposition:
        decomp = op.decomposition()
        inv = decomp.from_spectral(decomp.to_spectral(u.values) / decomp.eigenvalues)
    else:
        inv = cg_solve(op, u.values, tol=tol)
    return discrete_l2(GridFunction(u.grid, inv))


def fractional_apply(op: DiscreteOperator, gamma: float, u: GridFunction) -> GridFunction:
    """(-L)^gamma u, defined spectrally on the discrete operator."""
    if not op.has_decomposition:
        raise DecompositionMissing("fractional powers need a cached decomposition")
    decomp = op.decomposition()
    powers = (-decomp.eigenvalues) ** gamma
    out = decomp.from_spectral(powers * decomp.to_spectral(u.values))
    return GridFunction(u.grid, out)


def error_norm(kind: NormKind, op: DiscreteOperator | None, u: GridFunction) -> float:
    if kind.kind == "l2":
        return discrete_l2(u)
    if op is None:
        raise ValueError(f"norm {kind.name!r} needs the full operator")
    if kind.kind == "dual":
        return dual_norm(op, u)
    return discrete_l2(fractional_apply(op, kind.gamma, u))


def smoothing_probe(a_family: LineOperatorFamily, b_family: LineOperatorFamily,
                    op: DiscreteOperator, alpha: float, scheme: str, h: float,
                    n_max: int, power_iterations: int = 30,
                    seed: int = 0) -> list:
    """Estimates of the 2-norm of (-L)^alpha S^n for n = 1..n_max.

    S is the homogeneous Lie or Strang splitting product.  The norm is
    estimated by power iteration on the symmetrized product with a fixed
    seed, so results are deterministic.  Power iteration approaches the
    norm from below, which keeps the alpha = 0 contraction check honest.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    if scheme not in ("lie", "strang"):
        raise ValueError("smoothing probe supports 'lie' and 'strang'")
    if h <= 0.0 or n_max < 1:
        raise ValueError("need h > 0 and n_max >= 1")

    if scheme == "lie":
        S = a_family.dense_exponential(h) @ b_family.dense_exponential(h)
    else:
        Ea = a_family.dense_exponential(0.5 * h)
        S = Ea @ b_family.dense_exponential(h) @ Ea

    N = op.n
    if alpha == 0.0:
        G = np.eye(N)
    else:
        decomp = op.decomposition()
        G = (decomp.eigenvectors * (-decomp.eigenvalues) ** (2.0 * alpha)) \
            @ decomp.eigenvectors.T

    rng = np.random.default_rng(seed)
    results = []
    P = np.eye(N)
    for n in range(1, n_max + 1):
        P = S @ P
        v = rng.standard_normal(N)
        v /= np.linalg.norm(v)
        for _ in range(power_iterations):
            w = P.T @ (G @ (P @ v))
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
        est = math.sqrt(max(0.0, float(v @ (P.T @ (G @ (P @ v))))))
        results.append((n * h, est))
    return results
