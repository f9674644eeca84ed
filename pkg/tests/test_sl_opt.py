"""Minimization over determinant-one transforms and its certificates."""

import math

import numpy as np
import pytest
import scipy.linalg

from affsob import (AnalyticField, NumericalFailureError, OptimizerOptions,
                    OptimizerTrace, SmoothnessParams, UnimodularTransform,
                    critical_residuals, descent_step,
                    directional_lower_bound_check, exact_gradient_s1,
                    matrix_exp, minimize, numeric_gradient, objective,
                    polar_align, random_unimodular, seminorm, sl_basis)
from affsob.constants import c1_first_approach
from affsob.family import strong_shear_members

P12 = SmoothnessParams(1.0, 2.0)


def test_matrix_exp_matches_scipy(rng):
    for n in (2, 3):
        a = rng.standard_normal((n, n))
        a -= np.trace(a) / n * np.eye(n)
        np.testing.assert_allclose(matrix_exp(a), scipy.linalg.expm(a),
                                   atol=1e-12)


def test_sl_basis_is_an_orthonormal_traceless_frame():
    for n in (2, 3):
        basis = sl_basis(n)
        assert len(basis) == n * n - 1
        for i, b in enumerate(basis):
            assert abs(np.trace(b)) < 1e-14
            for j, c in enumerate(basis):
                want = 1.0 if i == j else 0.0
                assert np.sum(b * c) == pytest.approx(want, abs=1e-12)


def test_unimodular_transform_normalizes_and_rejects():
    t = UnimodularTransform(2.0 * np.eye(2))
    assert np.linalg.det(t.matrix) == pytest.approx(1.0, rel=1e-12)
    assert UnimodularTransform.identity(3).dimension == 3
    with pytest.raises(ValueError):
        UnimodularTransform(np.array([[1.0, 0.0], [0.0, -1.0]]))
    with pytest.raises(ValueError):
        UnimodularTransform(np.ones((2, 3)))
    with pytest.raises(ValueError):
        UnimodularTransform(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_random_unimodular_distribution(rng):
    for _ in range(10):
        m = random_unimodular(rng, 2, condition_range=(1.0, 6.0))
        assert np.linalg.det(m) == pytest.approx(1.0, rel=1e-10)
        assert np.linalg.cond(m) <= 6.0 + 1e-9


def test_polar_align_strips_the_rotation(rng):
    m = random_unimodular(rng, 2)
    aligned = polar_align(m)
    np.testing.assert_allclose(aligned, aligned.T, atol=1e-12)
    assert np.linalg.det(aligned) == pytest.approx(1.0, rel=1e-10)
    # same symmetric factor: P^2 = M M^T
    np.testing.assert_allclose(aligned @ aligned, m @ m.T, atol=1e-10)


def test_objective_at_identity_is_the_seminorm(aniso, bundle2):
    assert objective(aniso, np.eye(2), P12, bundle2) == \
        pytest.approx(seminorm(aniso, P12, bundle2), rel=1e-12)


def test_exact_gradient_agrees_with_central_differences(aniso, bundle2, rng):
    t = random_unimodular(rng, 2)
    exact = exact_gradient_s1(aniso, t, 2.0, bundle2)
    numeric = numeric_gradient(aniso, t, P12, bundle2)
    np.testing.assert_allclose(exact, numeric, atol=1e-8)


def test_minimize_anisotropic_gaussian(aniso, bundle2):
    t, value, trace = minimize(aniso, P12, OptimizerOptions(), bundle2)
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-6)
    want = np.diag([2.0 ** -0.5, 2.0 ** 0.5])
    np.testing.assert_allclose(t.matrix, want, atol=1e-4)
    assert trace.objectives[0] >= value
    assert trace.terminal_reason


def test_minimize_radial_exits_at_identity(radial, bundle2):
    t, value, trace = minimize(radial, P12, OptimizerOptions(), bundle2)
    assert len(trace) <= 3
    np.testing.assert_allclose(t.matrix, np.eye(2), atol=1e-8)
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-9)


def test_minimize_undoes_a_shear(family, bundle2):
    shear2 = family["shear2"]
    t, value, trace = minimize(shear2, P12, OptimizerOptions(), bundle2)
    assert trace.objectives[0] == pytest.approx(3.06998, rel=1e-3)
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-6)
    assert value < trace.objectives[0]


def test_minimize_rejects_energyless_fields(bundle2):
    zero = AnalyticField.gaussian(2, coefficient=0.0)
    with pytest.raises(ValueError):
        minimize(zero, P12, OptimizerOptions(), bundle2)


def test_optimizer_trace_guards_monotonicity():
    trace = OptimizerTrace()
    trace.record(2.0, 1.0, 0.5, np.eye(2))
    trace.record(1.5, 0.5, 0.5, np.eye(2))
    assert len(trace) == 2
    assert len(trace.transform_hashes[0]) == 12
    with pytest.raises(NumericalFailureError):
        trace.record(1.6, 0.4, 0.5, np.eye(2))


def test_optimizer_options_validation():
    with pytest.raises(ValueError):
        OptimizerOptions(max_iters=0)
    with pytest.raises(ValueError):
        OptimizerOptions(backtrack=1.0)
    with pytest.raises(ValueError):
        OptimizerOptions(armijo_c=0.0)
    with pytest.raises(ValueError):
        OptimizerOptions(restarts=-1)


def test_critical_residuals_vanish_at_the_minimizer(aniso, bundle2):
    t, _, _ = minimize(aniso, P12, OptimizerOptions(), bundle2)
    r_general, r_diag = critical_residuals(aniso, t, 2.0, bundle2)
    assert r_general < 1e-5
    assert r_diag < 1e-5
    # at the identity the first axis hoards the energy
    rg0, rd0 = critical_residuals(aniso, np.eye(2), 2.0, bundle2)
    assert rd0 == pytest.approx(0.3, abs=1e-3)
    with pytest.raises(ValueError):
        critical_residuals(AnalyticField.gaussian(2, coefficient=0.0),
                           np.eye(2), 2.0, bundle2)


def test_descent_step_validates_and_descends(bundle2):
    sigma, member = strong_shear_members()[-1]
    with pytest.raises(ValueError):
        descent_step(member, P12, np.array([1.0, 0.0]), 1.0, bundle2)
    report = directional_lower_bound_check(member, np.eye(2), P12, bundle2,
                                           threshold=c1_first_approach(2)[0])
    assert not report.passed
    lam = c1_first_approach(2)[1]
    t, old, new = descent_step(member, P12, report.weak_direction, lam,
                               bundle2)
    assert np.linalg.det(t.matrix) == pytest.approx(1.0, rel=1e-10)
    assert new < old


def test_directional_bound_on_radial_profiles(radial, bundle2):
    report = directional_lower_bound_check(radial, np.eye(2), P12, bundle2)
    assert report.min_ratio == pytest.approx(2.0 ** -0.5, rel=1e-9)
    assert report.max_ratio == pytest.approx(2.0 ** -0.5, rel=1e-9)
    assert report.passed
    assert report.threshold == pytest.approx(0.5 * c1_first_approach(2)[0],
                                             rel=1e-12)
    assert report.weak_direction.shape == (2,)
