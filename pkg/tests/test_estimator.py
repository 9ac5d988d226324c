"""The fit/transform facade over the splitting integrators."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from expsplit.discretization import Grid, GridFunction
from expsplit.estimator import SplittingSolver
from expsplit.integrators import TimeGrid, build_operator_families, integrate
from expsplit.problems import problem_by_label


def test_get_set_params_and_clone():
    est = SplittingSolver(scheme="lie", grid_size=9, t_final=0.5, n_steps=8)
    params = est.get_params()
    assert params == {"scheme": "lie", "grid_size": 9,
                      "t_final": 0.5, "n_steps": 8}
    est.set_params(scheme="strang")
    assert est.scheme == "strang"
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()


def test_fit_accepts_label_and_spec():
    est = SplittingSolver(grid_size=7, n_steps=4).fit("example2")
    assert est.n_features_in_ == 49
    spec = problem_by_label("example2")
    est2 = SplittingSolver(grid_size=7, n_steps=4).fit(spec)
    assert est2.problem_ is spec


def test_fit_validates_inputs():
    with pytest.raises(ValueError):
        SplittingSolver(scheme="rk4").fit("example2")
    with pytest.raises(ValueError):
        SplittingSolver(n_steps=0).fit("example2")
    with pytest.raises(TypeError):
        SplittingSolver().fit(42)


def test_transform_requires_fit():
    with pytest.raises(NotFittedError):
        SplittingSolver().transform(np.zeros(9))


def test_transform_checks_feature_count():
    est = SplittingSolver(grid_size=5, n_steps=2).fit("example2")
    with pytest.raises(ValueError):
        est.transform(np.zeros(10))


def test_transform_matches_integrate(rng):
    est = SplittingSolver(scheme="strang", grid_size=9,
                          t_final=0.5, n_steps=4).fit("example1")
    x = rng.standard_normal(81)
    got = est.transform(x)
    grid = Grid(9, 9)
    problem = problem_by_label("example1")
    a_family, b_family = build_operator_families(problem, grid)
    want = integrate("strang", problem, grid, TimeGrid(0.5, 4),
                     a_family=a_family, b_family=b_family,
                     u0=GridFunction(grid, x)).values
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-14)


def test_transform_batches_rows(rng):
    est = SplittingSolver(grid_size=5, n_steps=2).fit("example2")
    X = rng.standard_normal((3, 25))
    out = est.transform(X)
    assert out.shape == (3, 25)
    np.testing.assert_array_equal(out[1], est.transform(X[1]))


def test_solve_propagates_problem_initial_value():
    est = SplittingSolver(scheme="lie", grid_size=9,
                          t_final=1.0, n_steps=8).fit("example2")
    got = est.solve()
    problem = problem_by_label("example2")
    grid = Grid(9, 9)
    want = integrate("lie", problem, grid, TimeGrid(1.0, 8))
    np.testing.assert_allclose(got.values, want.values, rtol=0, atol=1e-14)
