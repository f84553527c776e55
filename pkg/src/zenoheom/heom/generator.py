"""Assembly of the hierarchy generator from a model and a bath expansion.

For a bath correlation ``C(t) = sum_p zeta_p exp(-nu_p t)`` each ADO obeys

    dX_l/dt = (L_s + T - l.nu) X_l + Phi sum_p X_{l+e_p} + sum_p l_p Psi_p X_{l-e_p}

with ``L_s = -i[H_s, .]``, ``Phi = -i[f, .]``, ``T`` an optional time-local
correction for dropped exponentials, and ADOs deeper than ``L`` set to zero.
All superoperators act on the row-major vectorisation of ``X``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..bath import (
    Lorentzian,
    OhmicDrude,
    auto_matsubara_cutoff,
    lorentz_zero_T_decomposition,
    matsubara_decomposition,
    terminator_coefficient,
)
from ..errors import ContractViolation, DomainError
from ..linalg import anticommutator_superop, commutator_superop, left_superop, right_superop
from ..policy import DEFAULT_POLICY
from .layout import HierarchyLayout

LINK_PAIRINGS = ("standard", "reversed")


@dataclass(frozen=True, eq=False)
class HeomGenerator:
    layout: HierarchyLayout
    model: object
    nu: np.ndarray
    phi: np.ndarray
    links: np.ndarray
    system: np.ndarray
    terminator: np.ndarray = None
    decomposition: object = None
    kind: str = "generic"
    diag: np.ndarray = field(init=False)
    decay: np.ndarray = field(init=False)

    def __post_init__(self):
        D = self.system.shape[0]
        diag = np.array(self.system, dtype=complex)
        if self.terminator is not None:
            diag = diag + self.terminator
        nu = np.ascontiguousarray(self.nu, dtype=complex)
        if nu.shape != (self.layout.K,) or self.links.shape != (self.layout.K, D, D):
            raise ContractViolation("rates, links and layout disagree on the number of exponentials")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "diag", np.ascontiguousarray(diag))
        object.__setattr__(self, "phi", np.ascontiguousarray(self.phi, dtype=complex))
        object.__setattr__(self, "links", np.ascontiguousarray(self.links, dtype=complex))
        object.__setattr__(self, "decay", np.ascontiguousarray(self.layout.level @ nu))
        for a in (self.nu, self.diag, self.phi, self.links, self.decay):
            a.setflags(write=False)

    @property
    def dim(self):
        return self.model.dim

    @property
    def L(self):
        return self.layout.L

    @property
    def max_decay(self):
        return float(np.max(np.abs(self.decay)))

    def row_bound(self):
        """Upper bound on the infinity norm of the full hierarchy generator."""
        nd = np.abs(self.diag).sum(axis=1).max()
        np_ = np.abs(self.phi).sum(axis=1).max()
        nl = np.abs(self.links).sum(axis=2).max(axis=1)
        n_up = (self.layout.up >= 0).sum(axis=1)
        per_ado = nd + np.abs(self.decay) + n_up * np_ + self.layout.level @ nl
        return float(per_ado.max())

    def kernel_args(self):
        lay = self.layout
        return (self.diag, self.decay, lay.up, lay.down, np.ascontiguousarray(lay.level), self.phi, self.links)


def build_generator(model, nu, links, L, terminator=None, decomposition=None, kind="generic", policy=DEFAULT_POLICY):
    """Generator for arbitrary exponential rates ``nu`` with down-link superoperators ``links``."""
    nu = np.asarray(nu, dtype=complex).reshape(-1)
    if np.any(nu.real <= 0):
        raise ContractViolation("every rate needs a positive real part")
    f = model.coupling_f
    layout = HierarchyLayout(len(nu), L, dim=model.dim, policy=policy)
    return HeomGenerator(
        layout=layout,
        model=model,
        nu=nu,
        phi=-1j * commutator_superop(f),
        links=np.asarray(links, dtype=complex),
        system=-1j * commutator_superop(model.H_s),
        terminator=terminator,
        decomposition=decomposition,
        kind=kind,
    )


def _check_depth(L):
    if int(L) != L or L < 0:
        raise DomainError(f"hierarchy depth must be a non-negative integer, got {L!r}")
    return int(L)


def build_zero_T_generator(model, J, L, link_pairing="standard", policy=DEFAULT_POLICY):
    """Lorentzian bath at zero temperature: two exponentials ``lam -/+ i omega0``.

    The rate ``lam + i omega0`` belongs to ``C(t)`` and drives ``-i a f X``;
    its conjugate belongs to ``C(t)*`` and drives ``+i a X f``, with
    ``a = gamma0 lam / 2``. ``link_pairing="reversed"`` swaps the two links and
    exists only to show that the dephasing oracle detects the swap.
    """
    if not isinstance(J, Lorentzian):
        raise ContractViolation("zero-temperature hierarchy requires a Lorentzian spectrum")
    if link_pairing not in LINK_PAIRINGS:
        raise DomainError(f"link_pairing must be one of {LINK_PAIRINGS}")
    L = _check_depth(L)
    decomp = lorentz_zero_T_decomposition(J)
    a = 0.5 * J.gamma0 * J.lam
    f = model.coupling_f
    nu = (complex(J.lam, -J.omega0), complex(J.lam, J.omega0))
    links = [1j * a * right_superop(f), -1j * a * left_superop(f)]
    if link_pairing == "reversed":
        links.reverse()
    return build_generator(model, nu, np.array(links), L, decomposition=decomp, kind="zero_T", policy=policy)


def build_finite_T_generator(model, J, beta, epsilon, L, terminator=True, policy=DEFAULT_POLICY):
    """Drude bath at inverse temperature ``beta`` with ``epsilon`` Matsubara terms.

    ``epsilon="auto"`` picks the cutoff from the Markovianised tail bound.
    Dropped terms enter through ``-c [f, [f, .]]`` with ``c`` their integrated weight.
    """
    if not isinstance(J, OhmicDrude):
        raise ContractViolation("finite-temperature hierarchy requires an Ohmic-Drude spectrum")
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError("beta must be finite and > 0")
    L = _check_depth(L)
    if epsilon == "auto":
        epsilon = auto_matsubara_cutoff(J, beta, policy=policy)
    decomp = matsubara_decomposition(J, beta, epsilon)
    f = model.coupling_f
    comm = commutator_superop(f)
    anti = anticommutator_superop(f)
    links = np.array([-1j * z.real * comm + z.imag * anti for z in decomp.zeta_array])
    term = None
    if terminator:
        c = terminator_coefficient(decomp)
        term = -c * (comm @ comm)
    return build_generator(
        model, decomp.upsilon_array, links, L, terminator=term, decomposition=decomp, kind="finite_T", policy=policy
    )
