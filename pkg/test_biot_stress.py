#!/usr/bin/env python3
"""
Tests for principal Biot stresses, their Jacobian and the matrix forms.
"""

import numpy as np
import pytest
import sympy as sp

from core.biot import (
    DeformationGradient,
    biot_matrix,
    cofactor,
    det_jacobian_radial,
    first_piola,
    jacobian_DT,
    minors_radial,
    minors_two_equal,
    polar_stretch,
    principal_biot,
)
from core.errors import DomainError
from core.material import MaterialParams, PrincipalStretches, energy_principal
from core.tensor import Rotation3, SymMatrix3, conjugate, leading_minors
from core.utils import central_gradient, central_jacobian

LAMBDA_STAR = 1.7031065366


@pytest.fixture(scope="module")
def symbolic_energy():
    """Gradient and Hessian of the normalised energy as numeric callables."""
    l1, l2, l3, M = sp.symbols("l1 l2 l3 M", positive=True)
    J = l1 * l2 * l3
    W = (l1 ** 2 + l2 ** 2 + l3 ** 2) / 2 - sp.log(J) + (M / 4 - sp.Rational(1, 6)) * (J ** 2 - 2 * sp.log(J) - 1)
    variables = [l1, l2, l3]
    gradient = sp.lambdify((M, l1, l2, l3), [sp.diff(W, v) for v in variables])
    hessian = sp.lambdify((M, l1, l2, l3), sp.hessian(W, variables))
    return gradient, hessian


POINTS = [
    (1.0, (1.0, 1.0, 1.0)),
    (1.0, (1.2, 0.8, 1.5)),
    (0.7, (0.5, 2.0, 1.1)),
    (2.0, (1.7, 1.7, 0.9)),
    (10.0, (0.9, 1.05, 1.3)),
]


@pytest.mark.parametrize("M, point", POINTS)
def test_stresses_are_the_energy_gradient(symbolic_energy, M, point):
    gradient, _ = symbolic_energy
    stresses = principal_biot(M, PrincipalStretches.of(point)).as_array()
    assert stresses == pytest.approx(np.array(gradient(M, *point), dtype=float), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("M, point", POINTS)
def test_jacobian_is_the_energy_hessian(symbolic_energy, M, point):
    _, hessian = symbolic_energy
    expected = np.array(hessian(M, *point), dtype=float)
    actual = jacobian_DT(M, PrincipalStretches.of(point)).as_array()
    assert np.allclose(actual, expected, rtol=1e-12, atol=1e-12)
    assert np.allclose(actual, actual.T)


def test_finite_difference_consistency(rng):
    M = 1.0
    params = MaterialParams.from_m(M)
    for _ in range(20):
        x = rng.uniform(0.5, 2.0, size=3)
        s = PrincipalStretches.of(x)
        gradient = central_gradient(lambda y: energy_principal(params, PrincipalStretches.of(y)), x)
        hessian = central_jacobian(lambda y: principal_biot(M, PrincipalStretches.of(y)).as_array(), x)
        assert np.allclose(principal_biot(M, s).as_array(), gradient, atol=1e-6)
        assert np.allclose(jacobian_DT(M, s).as_array(), hessian, atol=1e-5)


def test_reference_state_is_stress_free():
    assert tuple(principal_biot(1.0, PrincipalStretches.radial(1.0))) == (0.0, 0.0, 0.0)


def test_permutation_equivariance():
    s = PrincipalStretches(0.7, 1.4, 2.2)
    stresses = principal_biot(1.5, s).as_array()
    for order in [(1, 0, 2), (2, 1, 0), (1, 2, 0)]:
        permuted = principal_biot(1.5, s.permuted(order)).as_array()
        assert permuted == pytest.approx(stresses[list(order)], rel=1e-14)


def test_biot_matrix_on_diagonal_stretch():
    U = SymMatrix3.diag(1.3, 0.8, 1.1)
    T = biot_matrix(1.0, U).as_array()
    expected = principal_biot(1.0, PrincipalStretches(1.3, 0.8, 1.1)).as_array()
    assert np.allclose(np.diag(T), expected, atol=1e-13)
    assert np.allclose(T - np.diag(np.diag(T)), 0.0, atol=1e-15)


def test_biot_matrix_is_isotropic(rng):
    for _ in range(10):
        U = conjugate(Rotation3.random(rng), SymMatrix3.diag(*rng.uniform(0.5, 2.0, size=3)))
        Q = Rotation3.random(rng)
        lhs = biot_matrix(2.0, conjugate(Q, U))
        rhs = conjugate(Q, biot_matrix(2.0, U))
        assert lhs.frobenius_distance(rhs) < 1e-10


def test_biot_matrix_requires_positive_definite_stretch():
    with pytest.raises(DomainError):
        biot_matrix(1.0, SymMatrix3.diag(1.0, -0.5, 1.0))


def test_deformation_gradient_orientation():
    with pytest.raises(DomainError):
        DeformationGradient.from_array(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(DomainError):
        DeformationGradient.from_array(np.zeros((3, 3)))


def test_cofactor_matches_inverse(rng):
    for _ in range(10):
        F = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
        assert np.allclose(cofactor(F), np.linalg.det(F) * np.linalg.inv(F).T, atol=1e-12)


def test_polar_stretch_recovers_factors(rng):
    R = Rotation3.random(rng)
    U = conjugate(Rotation3.random(rng), SymMatrix3.diag(1.5, 0.9, 0.6))
    rotation, stretch = polar_stretch(DeformationGradient.from_array(R.as_array() @ U.as_array()))
    assert np.allclose(rotation.as_array(), R.as_array(), atol=1e-12)
    assert stretch.frobenius_distance(U) < 1e-12


def test_first_piola_pulls_back_to_biot(rng):
    for _ in range(10):
        R = Rotation3.random(rng).as_array()
        U = conjugate(Rotation3.random(rng), SymMatrix3.diag(*rng.uniform(0.5, 2.0, size=3)))
        pulled_back = R.T @ first_piola(1.0, R @ U.as_array())
        assert np.allclose(pulled_back, biot_matrix(1.0, U).as_array(), atol=1e-10)


@pytest.mark.parametrize(
    "l, expected",
    [
        (1.5, (2.362269, 2.732656, 2.612250)),
        (2.0, (3.958333, -12.776042, 27.650391)),
    ],
)
def test_radial_minors_values(l, expected):
    assert minors_radial(1.0, l) == pytest.approx(expected, abs=1e-6)
    assert jacobian_DT(1.0, PrincipalStretches.radial(l)).minors() == pytest.approx(expected, abs=1e-6)


def test_radial_determinant_vanishes_at_invertibility_loss():
    assert det_jacobian_radial(1.0, LAMBDA_STAR) == pytest.approx(0.0, abs=1e-8)
    assert det_jacobian_radial(1.0, 1.5) > 0
    # the shear eigenvalue is double, so the determinant touches zero without changing sign
    assert det_jacobian_radial(1.0, 2.0) > 0


@pytest.mark.parametrize("M", [0.7, 1.0, 2.0, 10.0, 100.0])
def test_reference_jacobian_determinant(M):
    """det DT(1, 1, 1) = 12 M."""
    reference = PrincipalStretches.radial(1.0)
    assert jacobian_DT(M, reference).det() == pytest.approx(12.0 * M, rel=1e-12)
    assert det_jacobian_radial(M, 1.0) == pytest.approx(12.0 * M, rel=1e-12)


@pytest.mark.parametrize("M", [0.7, 1.0, 3.0])
def test_two_equal_minors_match_numeric(rng, M):
    for _ in range(10):
        l1, l2 = rng.uniform(0.5, 2.0, size=2)
        numeric = leading_minors(jacobian_DT(M, PrincipalStretches.two_equal(l1, l2)).matrix)
        assert minors_two_equal(M, l1, l2) == pytest.approx(numeric[:2], rel=1e-10, abs=1e-10)
