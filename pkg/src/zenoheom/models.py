"""System Hamiltonians, coupling operators and initial states.

Basis ordering is descending in the magnetic quantum number: for a qubit
index 0 is the excited state ``|e>`` (``sigma_z = +1``), for spin ``J`` index
``k`` carries ``m = J - k``.
"""

import ast
import math
import operator
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DomainError
from .linalg import SIGMA_X, SIGMA_Z, as_state_vector, commutator_action, is_hermitian
from .policy import DEFAULT_POLICY


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Subsystem Hamiltonian ``H_s`` and the operator ``f`` it couples to the bath through."""

    H_s: np.ndarray
    coupling_f: np.ndarray
    label: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        H = np.array(self.H_s, dtype=complex)
        f = np.array(self.coupling_f, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape != f.shape:
            raise ContractViolation(f"H_s {H.shape} and f {f.shape} must be square and of equal size")
        if not is_hermitian(H):
            raise ContractViolation("H_s must be Hermitian")
        if not is_hermitian(f):
            raise ContractViolation("coupling operator must be Hermitian")
        H.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "H_s", H)
        object.__setattr__(self, "coupling_f", f)

    @property
    def dim(self):
        return self.H_s.shape[0]

    @property
    def pure_dephasing(self):
        return bool(np.max(np.abs(commutator_action(self.H_s, self.coupling_f))) <= DEFAULT_POLICY.hermitian_atol)

    @property
    def level_spacing(self):
        w = np.linalg.eigvalsh(self.H_s)
        return float(w[-1] - w[0])


def spin_matrices(J):
    """``(J_z, J_x)`` for spin ``J`` in the descending-``m`` basis."""
    twoJ = _two_j(J)
    J = twoJ / 2
    m = J - np.arange(twoJ + 1)
    Jz = np.diag(m).astype(complex)
    # <m+1|J_+|m> = sqrt(J(J+1) - m(m+1)); J_+ raises m, i.e. lowers the index
    jp = np.zeros((twoJ + 1, twoJ + 1), dtype=complex)
    for k in range(1, twoJ + 1):
        mk = m[k]
        jp[k - 1, k] = math.sqrt(J * (J + 1) - mk * (mk + 1))
    Jx = 0.5 * (jp + jp.conj().T)
    return Jz, Jx


def biased_qubit(epsilon, delta):
    """``H_s = (eps/2) sigma_z - (delta/2) sigma_x`` with ``f = sigma_z``."""
    H = 0.5 * epsilon * SIGMA_Z - 0.5 * delta * SIGMA_X
    return ModelSpec(H, SIGMA_Z.copy(), label="qubit", params={"epsilon": epsilon, "delta": delta})


def biased_qutrit(epsilon, delta):
    """``H_s = eps J_z + delta J_x`` with ``f = 2 J_z`` for spin 1."""
    Jz, Jx = spin_matrices(1)
    H = epsilon * Jz + delta * Jx
    return ModelSpec(H, 2 * Jz, label="qutrit", params={"epsilon": epsilon, "delta": delta})


def _two_j(J):
    twoJ = 2 * J
    if abs(twoJ - round(twoJ)) > 1e-12 or round(twoJ) < 1:
        raise DomainError(f"spin must be a positive half-integer, got {J!r}")
    return int(round(twoJ))


def coherent_parameter(theta, phi0):
    """``varsigma = exp(i phi0) tan(theta/2)``."""
    if not 0.0 <= theta < math.pi:
        raise DomainError(
            "theta must lie in [0, pi); at theta = pi the state is |J, +J>, use the basis state directly"
        )
    return complex(math.cos(phi0), math.sin(phi0)) * math.tan(0.5 * theta)


def su2_coherent_state(J, theta, phi0, policy=DEFAULT_POLICY):
    """Spin coherent state on the ``m = J..-J`` basis.

    Amplitude of ``|J, m>`` is ``(1+|s|^2)^(-J) sqrt(C(2J, J+m)) s^(J+m)``.
    Computed in log space so large ``J`` or ``|s|`` do not overflow.
    """
    twoJ = _two_j(J)
    s = coherent_parameter(theta, phi0)
    m = twoJ / 2 - np.arange(twoJ + 1)
    k = np.rint(m + twoJ / 2).astype(int)  # J + m
    if s == 0:
        psi = np.zeros(twoJ + 1, dtype=complex)
        psi[-1] = 1.0
        return psi
    r, ang = abs(s), np.angle(s)
    logbin = np.array([math.lgamma(twoJ + 1) - math.lgamma(kk + 1) - math.lgamma(twoJ - kk + 1) for kk in k])
    logamp = -0.5 * twoJ * math.log1p(r * r) + 0.5 * logbin + k * math.log(r)
    psi = np.exp(logamp) * np.exp(1j * k * ang)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        warnings.warn(f"coherent state renormalised (norm {norm!r})", RuntimeWarning, stacklevel=2)
    psi = psi / norm
    return as_state_vector(psi, policy)


_COHERENT = re.compile(r"^coherent\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)$")


_ARITH = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _number(tok):
    """Evaluate a real number written with ``pi`` and ``+ - * /``, e.g. ``pi/2``."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _ARITH:
            return _ARITH[type(node.op)](ev(node.left), ev(node.right))
        raise ContractViolation(f"cannot read angle {tok!r}")

    try:
        tree = ast.parse(tok.strip(), mode="eval")
    except SyntaxError as exc:
        raise ContractViolation(f"cannot read angle {tok!r}") from exc
    return ev(tree.body)


def parse_initial_state(text, dim):
    """Initial state from a keyword or explicit amplitudes.

    Accepted forms: ``excited`` (top basis state), ``ground`` (bottom basis
    state), ``plus`` (coherent state at theta = pi/2, phi0 = 0; for a qubit the
    equal superposition of both levels), ``coherent(theta, phi0)``
    with angles as numbers or multiples of ``pi``, or comma-separated complex
    amplitudes such as ``0.6, 0.8j``.
    """
    t = text.strip().lower()
    J = (dim - 1) / 2
    if t == "excited":
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1
        return psi
    if t == "ground":
        psi = np.zeros(dim, dtype=complex)
        psi[-1] = 1
        return psi
    if t == "plus":
        return su2_coherent_state(J, math.pi / 2, 0.0)
    m = _COHERENT.match(t)
    if m:
        return su2_coherent_state(J, _number(m.group(1)), _number(m.group(2)))
    try:
        amps = np.array([complex(tok.strip().replace(" ", "")) for tok in t.split(",")], dtype=complex)
    except ValueError as exc:
        raise ContractViolation(f"unrecognised initial state {text!r}") from exc
    if amps.size != dim:
        raise ContractViolation(f"initial state has {amps.size} amplitudes, model dimension is {dim}")
    return as_state_vector(amps)
