"""Small dense complex linear algebra for system operators and states.

Matrices are plain ``numpy`` arrays of shape ``(d, d)``; superoperators act
on the row-major vectorisation ``X.ravel()`` and are ``(d*d, d*d)`` arrays.
"""

import numpy as np

from .errors import ContractViolation
from .policy import DEFAULT_POLICY

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _square(A, name="matrix"):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ContractViolation(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    return A


def _same_dim(A, X):
    A = _square(A, "A")
    X = _square(X, "X")
    if A.shape != X.shape:
        raise ContractViolation(f"dimension mismatch: {A.shape} vs {X.shape}")
    return A, X


def is_hermitian(A, atol=DEFAULT_POLICY.hermitian_atol):
    A = np.asarray(A)
    return A.ndim == 2 and A.shape[0] == A.shape[1] and np.allclose(A, A.conj().T, rtol=0, atol=atol)


def hermiticity_residual(A):
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def commutator_action(A, X):
    """Return ``A X - X A``."""
    A, X = _same_dim(A, X)
    return A @ X - X @ A


def anticommutator_action(A, X):
    """Return ``A X + X A``."""
    A, X = _same_dim(A, X)
    return A @ X + X @ A


def expectation(rho, A):
    """``Tr(rho A)`` as a complex number."""
    rho, A = _same_dim(rho, A)
    return complex(np.einsum("ij,ji->", rho, A))


def matrix_exponential_unitary(H, t):
    """``exp(i H t)`` for Hermitian ``H`` via its eigendecomposition."""
    H = _square(H, "H")
    if not is_hermitian(H):
        raise ContractViolation("matrix_exponential_unitary requires a Hermitian generator")
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * w * t)) @ V.conj().T


def hermitize(A):
    A = np.asarray(A, dtype=complex)
    return 0.5 * (A + A.conj().T)


# -- superoperators in row-major vec convention -------------------------------

def left_superop(A):
    """Matrix of ``X -> A X``."""
    A = _square(A)
    return np.kron(A, np.eye(A.shape[0]))


def right_superop(B):
    """Matrix of ``X -> X B``."""
    B = _square(B)
    return np.kron(np.eye(B.shape[0]), B.T)


def commutator_superop(A):
    return left_superop(A) - right_superop(A)


def anticommutator_superop(A):
    return left_superop(A) + right_superop(A)


# -- states --------------------------------------------------------------------

def as_state_vector(psi, policy=DEFAULT_POLICY):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size == 0:
        raise ContractViolation("state vector must be non-empty")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > policy.state_norm_atol:
        raise ContractViolation(f"state vector norm {norm!r} differs from 1")
    return psi


def as_density_matrix(rho, policy=DEFAULT_POLICY):
    """Validate trace, Hermiticity and positivity of ``rho``; return it as an array."""
    rho = _square(rho, "rho")
    tr = np.trace(rho)
    if abs(tr - 1.0) > policy.density_trace_atol:
        raise ContractViolation(f"density matrix trace {tr!r} differs from 1")
    if hermiticity_residual(rho) > policy.density_hermitian_atol:
        raise ContractViolation("density matrix is not Hermitian")
    lo = np.linalg.eigvalsh(hermitize(rho)).min()
    if lo < -policy.positivity_slack:
        raise ContractViolation(f"density matrix has eigenvalue {lo:.3e} below the positivity slack")
    return rho


def projector(psi):
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def basis_state(dim, k):
    v = np.zeros(dim, dtype=complex)
    v[k] = 1.0
    return v


def orthogonal_complement_state(psi):
    """A pure state orthogonal to ``psi``.

    For a qubit this is the unique ``(-psi_1*, psi_0*)``; in higher dimension
    the first basis vector not parallel to ``psi`` is Gram-Schmidt projected.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size == 2:
        return np.array([-np.conj(psi[1]), np.conj(psi[0])])
    for k in range(psi.size):
        e = basis_state(psi.size, k)
        v = e - np.vdot(psi, e) * psi
        n = np.linalg.norm(v)
        if n > 1e-6:
            return v / n
    raise ContractViolation("cannot build an orthogonal state in dimension 1")
