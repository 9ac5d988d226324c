"""Discrete norms, fractional powers and the smoothing probe."""

import math

import numpy as np
import pytest

from expsplit.discretization import Grid, GridFunction, assemble_full_operator
from expsplit.exceptions import DecompositionMissing
from expsplit.linalg import DiscreteOperator
from expsplit.norms import (
    NormKind,
    discrete_l2,
    dual_norm,
    error_norm,
    fractional_apply,
    smoothing_probe,
)

from conftest import laplacian_families, laplacian_operator


# ---------------------------------------------------------------------------
# Norm selection
# ---------------------------------------------------------------------------


def test_norm_kind_parsing():
    assert NormKind.parse("l2") == NormKind("l2")
    assert NormKind.parse("dual") == NormKind("dual")
    frac = NormKind.parse("frac:0.5")
    assert frac.kind == "frac" and frac.gamma == 0.5
    assert frac.name == "frac:0.5"
    with pytest.raises(ValueError):
        NormKind.parse("h1")
    with pytest.raises(ValueError):
        NormKind("frac", gamma=3.0)


def test_error_norm_dispatch(rng):
    grid, _, _, op = laplacian_operator(5)
    u = GridFunction(grid, rng.standard_normal(grid.size))
    assert error_norm(NormKind("l2"), None, u) == discrete_l2(u)
    with pytest.raises(ValueError):
        error_norm(NormKind("dual"), None, u)
    assert error_norm(NormKind("dual"), op, u) == pytest.approx(dual_norm(op, u))


# ---------------------------------------------------------------------------
# discrete L2
# ---------------------------------------------------------------------------


def test_l2_zero_and_constant():
    grid = Grid(7, 7)
    assert discrete_l2(GridFunction.zeros(grid)) == 0.0
    one = GridFunction(grid, np.ones(grid.size))
    assert discrete_l2(one) == pytest.approx(7.0 / 8.0)


def test_l2_approaches_continuum_norm():
    grid = Grid(63, 63)
    u = GridFunction.from_callable(
        grid, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
    )
    assert abs(discrete_l2(u) - 0.5) <= 2e-2


# ---------------------------------------------------------------------------
# dual norm
# ---------------------------------------------------------------------------


def test_dual_norm_inverse_consistency(rng):
    grid, _, _, op = laplacian_operator(6)
    v = GridFunction(grid, rng.standard_normal(grid.size))
    u = GridFunction(grid, op.matvec(v.values))
    # CG route (no cached decomposition)
    assert not op.has_decomposition
    got_cg = dual_norm(op, u)
    # spectral route
    op.decomposition()
    got_sp = dual_norm(op, u)
    want = discrete_l2(v)
    assert got_cg == pytest.approx(want, rel=1e-9)
    assert got_sp == pytest.approx(want, rel=1e-9)


def test_dual_norm_zero():
    grid, _, _, op = laplacian_operator(4)
    assert dual_norm(op, GridFunction.zeros(grid)) == 0.0


def test_dual_norm_eigenvector_identity():
    grid, _, _, op = laplacian_operator(5)
    d = op.decomposition()
    for k in (0, 7, d.n - 1):
        e = GridFunction(grid, d.eigenvectors[:, k])
        want = discrete_l2(e) / abs(d.eigenvalues[k])
        assert dual_norm(op, e) == pytest.approx(want, rel=1e-10)


def test_dual_norm_operator_bound(rng):
    grid, _, _, op = laplacian_operator(6)
    d = op.decomposition()
    inv_norm = 1.0 / np.abs(d.eigenvalues).min()
    for _ in range(50):
        u = GridFunction(grid, rng.standard_normal(grid.size))
        assert dual_norm(op, u) <= inv_norm * discrete_l2(u) * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# fractional powers
# ---------------------------------------------------------------------------


def test_fractional_integer_powers(rng):
    grid, _, _, op = laplacian_operator(5)
    op.decomposition()
    u = GridFunction(grid, rng.standard_normal(grid.size))
    np.testing.assert_allclose(
        fractional_apply(op, 0.0, u).values, u.values, rtol=1e-12, atol=1e-12
    )
    minus_lu = -op.matvec(u.values)
    got = fractional_apply(op, 1.0, u).values
    assert np.abs(got - minus_lu).max() <= 1e-10 * np.abs(minus_lu).max()


def test_fractional_half_power_semigroup(rng):
    grid, _, _, op = laplacian_operator(5)
    op.decomposition()
    u = GridFunction(grid, rng.standard_normal(grid.size))
    twice = fractional_apply(op, 0.5, fractional_apply(op, 0.5, u))
    minus_lu = -op.matvec(u.values)
    assert np.abs(twice.values - minus_lu).max() <= 1e-9 * np.abs(minus_lu).max()


def test_fractional_requires_decomposition():
    op = DiscreteOperator(-np.eye(4))
    grid = Grid(2, 2)
    with pytest.raises(DecompositionMissing):
        fractional_apply(op, 0.5, GridFunction.zeros(grid))


def test_fractional_moment_inequality(rng):
    grid, _, _, op = laplacian_operator(16)
    op.decomposition()
    for _ in range(10):
        u = GridFunction(grid, rng.standard_normal(grid.size))
        nu = discrete_l2(u)
        nlu = discrete_l2(GridFunction(grid, -op.matvec(u.values)))
        for gamma in (0.25, 0.5, 0.75):
            ng = discrete_l2(fractional_apply(op, gamma, u))
            assert ng <= nu ** (1.0 - gamma) * nlu**gamma * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# smoothing probe
# ---------------------------------------------------------------------------


def test_smoothing_probe_contraction_at_alpha_zero():
    grid, a_family, b_family = laplacian_families(15)
    op = assemble_full_operator(a_family, b_family)
    for scheme in ("lie", "strang"):
        for h in (0.05, 0.2):
            for _, est in smoothing_probe(a_family, b_family, op, 0.0,
                                          scheme, h, 8):
                assert est <= 1.0 + 1e-8


def test_smoothing_probe_scalar_envelope_bound():
    # one step: |(-L)^0.5 S| is bounded by the scalar envelope
    # sup_{z<=0} |z|^0.5 e^{zh} = (0.5/(e h))^0.5, slack 1.5 for the
    # non-commuting product
    grid, a_family, b_family = laplacian_families(15)
    op = assemble_full_operator(a_family, b_family)
    op.decomposition()
    for scheme in ("lie", "strang"):
        for h in (0.5, 0.1):
            (_, est), = smoothing_probe(a_family, b_family, op, 0.5,
                                        scheme, h, 1)
            assert est <= (0.5 / (math.e * h)) ** 0.5 * 1.5


def test_smoothing_probe_is_deterministic():
    grid, a_family, b_family = laplacian_families(7)
    op = assemble_full_operator(a_family, b_family)
    op.decomposition()
    a = smoothing_probe(a_family, b_family, op, 0.5, "strang", 0.125, 4)
    b = smoothing_probe(a_family, b_family, op, 0.5, "strang", 0.125, 4)
    assert a == b


def test_smoothing_probe_validation():
    grid, a_family, b_family = laplacian_families(4)
    op = assemble_full_operator(a_family, b_family)
    with pytest.raises(ValueError):
        smoothing_probe(a_family, b_family, op, 1.0, "lie", 0.1, 2)
    with pytest.raises(ValueError):
        smoothing_probe(a_family, b_family, op, 0.5, "strang_b", 0.1, 2)
    with pytest.raises(ValueError):
        smoothing_probe(a_family, b_family, op, 0.5, "lie", -0.1, 2)
