"""Estimator-style facade over the splitting integrators.

``SplittingSolver`` follows the fit/transform convention: ``fit`` takes a
problem (label or ProblemSpec) and assembles the grid operators, and
``transform`` propagates initial states to the final time with the
configured scheme.  ``get_params``/``set_params``/``clone`` work as usual,
so step-size or scheme sweeps compose with standard tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .discretization import Grid, GridFunction
from .integrators import SCHEME_VARIANTS, TimeGrid, build_operator_families, integrate
from .problems import ProblemSpec, problem_by_label


class SplittingSolver(BaseEstimator, TransformerMixin):
    """Propagate states of a 2-D parabolic problem with a splitting scheme.

    Parameters
    ----------
    scheme : {"lie", "strang", "strang_b"}
        Splitting variant.
    grid_size : int
        Interior nodes per direction of the uniform spatial grid.
    t_final : float
        Final time of the propagation.
    n_steps : int
        Number of uniform time steps.
    """

    def __init__(self, scheme: str = "strang", grid_size: int = 31,
                 t_final: float = 1.0, n_steps: int = 64):
        self.scheme = scheme
        self.grid_size = grid_size
        self.t_final = t_final
        self.n_steps = n_steps

    def _validate_params(self):
        if self.scheme not in SCHEME_VARIANTS:
            raise ValueError(
                f"scheme must be one of {SCHEME_VARIANTS}, got {self.scheme!r}"
            )
        if int(self.grid_size) < 1:
            raise ValueError("grid_size must be a positive integer")
        if self.t_final <= 0.0:
            raise ValueError("t_final must be positive")
        if int(self.n_steps) < 1:
            raise ValueError("n_steps must be a positive integer")

    def fit(self, problem, y=None) -> "SplittingSolver":
        """Assemble grid, split operators and inhomogeneity for a problem."""
        self._validate_params()
        if isinstance(problem, str):
            problem = problem_by_label(problem)
        if not isinstance(problem, ProblemSpec):
            raise TypeError("fit expects a problem label or a ProblemSpec")
        grid = Grid(int(self.grid_size), int(self.grid_size))
        a_family, b_family = build_operator_families(problem, grid)
        self.problem_ = problem
        self.grid_ = grid
        self.a_family_ = a_family
        self.b_family_ = b_family
        self.source_ = problem.sampled_source(grid, a_family, b_family)
        self.n_features_in_ = grid.size
        return self

    def _propagate(self, values: np.ndarray) -> np.ndarray:
        u = integrate(
            self.scheme, self.problem_, self.grid_,
            TimeGrid(self.t_final, int(self.n_steps)),
            a_family=self.a_family_, b_family=self.b_family_,
            source=self.source_, u0=GridFunction(self.grid_, values),
        )
        return u.values

    def transform(self, X) -> np.ndarray:
        """Propagate each row of X (an initial state) to t_final."""
        check_is_fitted(self, "grid_")
        X = check_array(X, ensure_2d=False, dtype=float)
        single = X.ndim == 1
        rows = np.atleast_2d(X)
        if rows.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {rows.shape[1]}"
            )
        out = np.vstack([self._propagate(row) for row in rows])
        return out[0] if single else out

    def solve(self) -> GridFunction:
        """Propagate the fitted problem's own initial value."""
        check_is_fitted(self, "grid_")
        u0 = self.problem_.initial_values(self.grid_)
        return GridFunction(self.grid_, self._propagate(u0.values))
