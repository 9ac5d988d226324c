"""Symmetric eigendecompositions, exponential / phi-function actions, CG.

Everything the integrators and norms need sits here.  phi-functions are
evaluated spectrally, so the reference solver is exact in space relative
to the semidiscrete system and order measurements are not contaminated
by reference-solver error.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import (
    DecompositionMissing,
    DimensionCapExceeded,
    DimensionMismatch,
    InvalidOrder,
    NoConvergence,
)

DENSE_EIGEN_CAP = 10000

# Below this magnitude the closed-form phi recurrence cancels catastrophically
# (worst for phi_3), so a truncated Taylor series is used instead.
_PHI_SERIES_RADIUS = 0.25
_PHI_SERIES_TERMS = 20


@dataclass(frozen=True)
class SymTridiag:
    """Symmetric tridiagonal matrix: main diagonal and first off-diagonal."""

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        if self.diag.ndim != 1 or self.off.shape != (self.diag.size - 1,):
            raise DimensionMismatch("inconsistent tridiagonal storage")

    @property
    def n(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        M = np.diag(self.diag)
        if self.n > 1:
            M += np.diag(self.off, 1) + np.diag(self.off, -1)
        return M


@dataclass(frozen=True)
class EigenDecomposition:
    """Full symmetric eigendecomposition, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def to_spectral(self, v: np.ndarray) -> np.ndarray:
        return self.eigenvectors.T @ v

    def from_spectral(self, c: np.ndarray) -> np.ndarray:
        return self.eigenvectors @ c


class DiscreteOperator:
    """Dense symmetric operator with a lazily cached eigendecomposition."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch("operator matrix must be square")
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(matrix).max())):
            raise ValueError("operator matrix must be symmetric")
        self.matrix = matrix
        self._decomp = None
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, float)
        if v.shape != (self.n,):
            raise DimensionMismatch("vector length does not match operator")
        return self.matrix @ v

    @property
    def has_decomposition(self) -> bool:
        return self._decomp is not None

    def decomposition(self, cap: int = DENSE_EIGEN_CAP) -> EigenDecomposition:
        if self._decomp is None:
            with self._lock:
                if self._decomp is None:
                    self._decomp = dense_sym_eigen(self, cap=cap)
        return self._decomp


def sym_tridiag_eigen(m: SymTridiag) -> EigenDecomposition:
    """Eigendecomposition of a symmetric tridiagonal matrix (LAPACK stemr)."""
    try:
        lam, q = scipy.linalg.eigh_tridiagonal(m.diag, m.off)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NoConvergence(f"tridiagonal eigensolve failed: {exc}") from exc
    return EigenDecomposition(lam, q)


def dense_sym_eigen(op: DiscreteOperator, cap: int = DENSE_EIGEN_CAP) -> EigenDecomposition:
    """Full eigendecomposition of a dense symmetric operator."""
    if op.n > cap:
        raise DimensionCapExceeded(f"dimension {op.n} exceeds cap {cap}")
    try:
        lam, q = scipy.linalg.eigh(op.matrix)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NoConvergence(f"dense eigensolve failed: {exc}") from exc
    return EigenDecomposition(lam, q)


def exp_action(decomp: EigenDecomposition, t: float, v: np.ndarray) -> np.ndarray:
    """exp(t*M) @ v via the spectral decomposition of M."""
    if t < 0:
        raise ValueError("exp_action requires t >= 0")
    v = np.asarray(v, float)
    if v.shape != (decomp.n,):
        raise DimensionMismatch("vector length does not match decomposition")
    c = decomp.to_spectral(v)
    return decomp.from_spectral(np.exp(t * decomp.eigenvalues) * c)


def phi_values(j: int, z: np.ndarray) -> np.ndarray:
    """phi_j evaluated elementwise, series fallback near the origin.

    phi_0(z) = exp(z), phi_{j+1}(z) = (phi_j(z) - 1/j!) / z.
    """
    if j not in (0, 1, 2, 3):
        raise InvalidOrder(f"phi order {j} not in {{0,1,2,3}}")
    z = np.asarray(z, dtype=float)
    if j == 0:
        return np.exp(z)

    small = np.abs(z) < _PHI_SERIES_RADIUS
    out = np.empty_like(z)

    zs = z[small]
    # Horner evaluation of sum_k zs^k / (k+j)!
    acc = np.full_like(zs, 1.0 / math.factorial(_PHI_SERIES_TERMS - 1 + j))
    for k in range(_PHI_SERIES_TERMS - 2, -1, -1):
        acc = acc * zs + 1.0 / math.factorial(k + j)
    out[small] = acc

    zl = z[~small]
    val = np.exp(zl)
    for i in range(1, j + 1):
        val = (val - 1.0 / math.factorial(i - 1)) / zl
    out[~small] = val
    return out


def phi_action(decomp: EigenDecomposition, j: int, t: float, v: np.ndarray) -> np.ndarray:
    """phi_j(t*M) @ v via the spectral decomposition of M."""
    if j not in (0, 1, 2, 3):
        raise InvalidOrder(f"phi order {j} not in {{0,1,2,3}}")
    if j >= 1 and t <= 0:
        raise ValueError("phi_action requires t > 0 for j >= 1")
    v = np.asarray(v, float)
    if v.shape != (decomp.n,):
        raise DimensionMismatch("vector length does not match decomposition")
    c = decomp.to_spectral(v)
    return decomp.from_spectral(phi_values(j, t * decomp.eigenvalues) * c)


def cg_solve(op: DiscreteOperator, rhs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Solve op @ x = rhs for a negative definite op by CG on -op.

    Deterministic plain conjugate gradients, zero initial guess.
    """
    if not 0.0 < tol <= 1e-2:
        raise ValueError("tol must lie in (0, 1e-2]")
    rhs = np.asarray(rhs, float)
    if rhs.shape != (op.n,):
        raise DimensionMismatch("rhs length does not match operator")

    b = -rhs  # (-op) x = -rhs is SPD
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros(op.n)

    x = np.zeros(op.n)
    r = b.copy()
    p = r.copy()
    rr = r @ r
    for _ in range(10 * op.n):
        Ap = -op.matvec(p)
        curvature = p @ Ap
        if curvature <= 0.0:
            raise NoConvergence(
                "CG breakdown: operator is not negative definite"
            )
        alpha = rr / curvature
        x += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        if math.sqrt(rr_new) <= tol * nb:
            # confirm with the true residual before accepting
            if np.linalg.norm(op.matvec(x) - rhs) <= tol * nb:
                return x
        beta = rr_new / rr
        p = r + beta * p
        rr = rr_new
    raise NoConvergence(f"CG did not reach tol={tol} in {10 * op.n} iterations")
