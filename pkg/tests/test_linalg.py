import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from zenoheom.errors import ContractViolation
from zenoheom.linalg import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    anticommutator_action,
    anticommutator_superop,
    as_density_matrix,
    basis_state,
    commutator_action,
    commutator_superop,
    expectation,
    hermiticity_residual,
    hermitize,
    left_superop,
    matrix_exponential_unitary,
    orthogonal_complement_state,
    projector,
    right_superop,
)

E = basis_state(2, 0)
G = basis_state(2, 1)
PLUS = (E + G) / np.sqrt(2)

finite = st.floats(-5, 5, allow_nan=False)


def complex_matrices(n):
    return st.builds(
        lambda a, b: a + 1j * b,
        arrays(float, (n, n), elements=finite),
        arrays(float, (n, n), elements=finite),
    )


def test_commutator_identity_is_zero():
    X = np.arange(4.0).reshape(2, 2) + 1j
    assert np.allclose(commutator_action(np.eye(2), X), 0)


def test_commutator_pauli():
    assert np.allclose(commutator_action(SIGMA_Z, SIGMA_X), 2j * SIGMA_Y)


def test_commutator_raising():
    eg = np.outer(E, G.conj())
    assert np.allclose(commutator_action(SIGMA_Z, eg), 2 * eg)


def test_anticommutator_cases():
    X = np.array([[1, 2j], [3, 4]], dtype=complex)
    assert np.allclose(anticommutator_action(np.eye(2), X), 2 * X)
    assert np.allclose(anticommutator_action(SIGMA_Z, SIGMA_Z), 2 * np.eye(2))
    assert np.allclose(anticommutator_action(SIGMA_Z, SIGMA_X), 0)


def test_expectation_cases():
    assert expectation(projector(E), SIGMA_Z) == pytest.approx(1)
    assert expectation(np.eye(2) / 2, SIGMA_Z) == pytest.approx(0)
    assert expectation(projector(PLUS), SIGMA_X) == pytest.approx(1)


def test_unitary_identity_and_full_turn():
    H = np.diag([0.3, -1.1]).astype(complex)
    assert np.allclose(matrix_exponential_unitary(H, 0.0), np.eye(2))
    eps = 1.7
    U = matrix_exponential_unitary(eps / 2 * SIGMA_Z, 2 * np.pi / eps)
    assert np.allclose(U, -np.eye(2), atol=1e-12)


def test_dimension_mismatch_rejected():
    with pytest.raises(ContractViolation):
        commutator_action(np.eye(2), np.eye(3))


@settings(max_examples=50, deadline=None)
@given(complex_matrices(3), complex_matrices(3))
def test_superoperators_match_actions(A, X):
    vec = X.reshape(-1)
    assert np.allclose((left_superop(A) @ vec).reshape(3, 3), A @ X)
    assert np.allclose((right_superop(A) @ vec).reshape(3, 3), X @ A)
    assert np.allclose((commutator_superop(A) @ vec).reshape(3, 3), commutator_action(A, X))
    assert np.allclose((anticommutator_superop(A) @ vec).reshape(3, 3), anticommutator_action(A, X))


@settings(max_examples=50, deadline=None)
@given(complex_matrices(3), complex_matrices(3))
def test_jacobi_like_identity(A, X):
    # [A, X] + [X, A] = 0 and {A, X} - {X, A} = 0
    assert np.allclose(commutator_action(A, X), -commutator_action(X, A))
    assert np.allclose(anticommutator_action(A, X), anticommutator_action(X, A))


@settings(max_examples=50, deadline=None)
@given(complex_matrices(3), st.floats(-3, 3))
def test_unitary_is_unitary(A, t):
    H = hermitize(A)
    U = matrix_exponential_unitary(H, t)
    assert np.allclose(U @ U.conj().T, np.eye(3), atol=1e-9)
    assert hermiticity_residual(H) < 1e-12


@settings(max_examples=50, deadline=None)
@given(arrays(float, 3, elements=finite), arrays(float, 3, elements=finite))
def test_orthogonal_complement(re, im):
    psi = re + 1j * im
    if np.linalg.norm(psi) < 1e-3:
        return
    psi = psi / np.linalg.norm(psi)
    chi = orthogonal_complement_state(psi)
    assert abs(np.vdot(psi, chi)) < 1e-10
    assert np.linalg.norm(chi) == pytest.approx(1.0)


def test_density_matrix_validation():
    assert np.allclose(as_density_matrix(np.eye(2) / 2), np.eye(2) / 2)
    with pytest.raises(ContractViolation):
        as_density_matrix(np.eye(2))
    with pytest.raises(ContractViolation):
        as_density_matrix(np.array([[1, 1], [0, 0]], dtype=complex))
