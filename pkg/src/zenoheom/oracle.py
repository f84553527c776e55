"""Exact results for pure-dephasing models, used as ground truth for the hierarchy.

When ``[H_s, f] = 0`` every coherence ``rho_mm'`` evolves independently:

    rho_mm'(t) = rho_mm'(0) exp(-i (E_m - E_m') t)
                 * exp(-(f_m - f_m')**2 kappa(t) / 4 - i (f_m**2 - f_m'**2) phi(t) / 4)

with the two kernels

    kappa(t) = 4 int dw J(w) n(w) (1 - cos w t) / w**2,
    phi(t)   = 4 int dw J(w) (sin w t - w t) / w**2,

where ``n(w)`` is the thermal factor (1 at zero temperature). For a qubit with
``f = sigma_z`` this gives ``exp(-kappa)`` on the coherence; for spin ``J``
with ``f = 2 J_z`` it gives ``exp(-kappa (m-m')**2 - i phi (m**2 - m'**2))``.

The survival probability in the frame co-rotating with ``H_s`` is
``sum_mm' |c_m|^2 |c_m'|^2 F_mm'(t)`` for an initial state ``sum_m c_m |m>``.
Writing ``|c_m|^2`` for a spin coherent state with parameter ``s`` as
``C(2J, J+m) |s|^(2(J+m)) / (1+|s|^2)^(2J)`` shows that the prefactor
``(|s| / (1+|s|^2))^(4J)`` together with ``|s|^(2(m+m'))`` is exactly the
product of the two normalised weights.
"""

import math
import threading

import numpy as np

from . import bath as _bath
from .bath import Lorentzian
from .errors import DomainError, IntegrityError
from .policy import DEFAULT_POLICY


class DephasingKernel:
    """Memoised ``kappa`` and ``phi`` for one spectral density and temperature.

    Values are deterministic, so concurrent inserts of the same key are
    harmless; the lock only keeps the table consistent.
    """

    def __init__(self, J, beta=math.inf, atol=None, policy=DEFAULT_POLICY):
        self.J = J
        self.beta = beta
        self.atol = policy.kernel_quad_atol if atol is None else atol
        self._kappa = {}
        self._phi = {}
        self._lock = threading.Lock()

    def _cached(self, table, fn, t):
        t = float(t)
        if t < 0:
            raise DomainError("kernel argument must be >= 0")
        with self._lock:
            if t in table:
                return table[t]
        val = fn(self.J, self.beta, t, atol=self.atol)
        with self._lock:
            table[t] = val
        return val

    def kappa(self, t):
        return self._cached(self._kappa, _bath.dephasing_exponent, t)

    def phi(self, t):
        return self._cached(self._phi, _bath.phase_shift, t)


_KERNELS = {}
_KERNELS_LOCK = threading.Lock()


def kernel_for(J, beta=math.inf):
    key = (J, float(beta))
    with _KERNELS_LOCK:
        k = _KERNELS.get(key)
        if k is None:
            k = _KERNELS[key] = DephasingKernel(J, beta)
    return k


def kappa(J, tau, beta=math.inf):
    """Dephasing exponent ``kappa(tau)``; ``beta`` selects the thermal factor."""
    return kernel_for(J, beta).kappa(tau)


def phi(J, t, beta=math.inf):
    """Phase kernel ``phi(t)``; independent of temperature."""
    return kernel_for(J, beta).phi(t)


def _rate(P, tau):
    return -math.log(P) / tau


def dephasing_qubit_gamma(J, tau, beta=math.inf):
    """``-ln(1/2 + exp(-kappa)/2) / tau`` for a qubit prepared in ``|+>``."""
    tau = float(tau)
    if not tau > 0:
        raise DomainError("tau must be > 0")
    k = kappa(J, tau, beta)
    return -(math.log(0.5) + math.log1p(math.exp(-k))) / tau


def dephasing_qutrit_rho_element(J, eps, t, m, m_prime, beta=math.inf):
    """Propagator factor multiplying ``rho_mm'(0)`` for ``f = 2 J_z``, ``H_s = eps J_z``."""
    for v in (m, m_prime):
        if abs(2 * v - round(2 * v)) > 1e-12:
            raise DomainError(f"magnetic quantum number {v!r} is not a half-integer")
    if abs((m - m_prime) - round(m - m_prime)) > 1e-12:
        raise DomainError("m and m' must differ by an integer")
    if m == m_prime:
        return 1.0 + 0.0j
    k = kappa(J, t, beta)
    p = phi(J, t, beta)
    dm = m - m_prime
    return complex(np.exp(-1j * eps * dm * t - 1j * p * (m * m - m_prime * m_prime) - k * dm * dm))


def dephasing_qutrit_gamma(J_spec, varsigma, J, tau, beta=math.inf, policy=DEFAULT_POLICY):
    """Decay rate of a spin-``J`` coherent state under ``f = 2 J_z`` pure dephasing.

    The double sum is evaluated with its weights in log space so large ``J``
    does not overflow the binomials.
    """
    tau = float(tau)
    if not tau > 0:
        raise DomainError("tau must be > 0")
    r = abs(complex(varsigma))
    if r == 0:
        raise DomainError("varsigma = 0 is the frozen |J,-J> state; its rate is identically 0")
    twoJ = 2 * J
    if abs(twoJ - round(twoJ)) > 1e-12 or round(twoJ) < 1:
        raise DomainError(f"spin must be a positive half-integer, got {J!r}")
    twoJ = int(round(twoJ))
    k = kappa(J_spec, tau, beta)
    p = phi(J_spec, tau, beta)
    m = np.arange(twoJ + 1) - twoJ / 2
    jm = np.arange(twoJ + 1)
    logw = (
        np.array([math.lgamma(twoJ + 1) - math.lgamma(a + 1) - math.lgamma(twoJ - a + 1) for a in jm])
        + 2 * jm * math.log(r)
        - twoJ * math.log1p(r * r)
    )
    dm = m[:, None] - m[None, :]
    expo = logw[:, None] + logw[None, :] - k * dm * dm
    ang = -p * (m[:, None] ** 2 - m[None, :] ** 2)
    shift = expo.max()
    w = np.exp(expo - shift)
    re = float(np.sum(w * np.cos(ang)))
    im = float(np.sum(w * np.sin(ang)))
    scale = math.exp(shift)
    if abs(im) * scale > policy.qutrit_bracket_imag_atol or not re > 0:
        raise IntegrityError(f"survival bracket is not real-positive: {re * scale!r} + {im * scale!r}i")
    return -(shift + math.log(re)) / tau


def dephasing_survival(J_spec, psi0, f_diag, tau, beta=math.inf):
    """Rotating-frame survival probability for any diagonal coupling ``f``.

    Direct evaluation of ``sum |c_m|^2 |c_m'|^2 F_mm'``; serves as an
    independent check on the log-space routine above.
    """
    c2 = np.abs(np.asarray(psi0, dtype=complex)) ** 2
    f = np.asarray(f_diag, dtype=float)
    k = kappa(J_spec, tau, beta)
    p = phi(J_spec, tau, beta)
    df = f[:, None] - f[None, :]
    f2 = f[:, None] ** 2 - f[None, :] ** 2
    F = np.exp(-df * df * k / 4 - 1j * f2 * p / 4)
    return float(np.real(c2 @ F @ c2))


def dephasing_density_matrix(J_spec, rho0, H_diag, f_diag, t, beta=math.inf):
    """Lab-frame ``rho(t)`` when ``H_s`` and ``f`` are both diagonal.

    Unlike the survival probability, the coherences carry the sign of the
    phase shift, so this separates ``C(t)`` from its conjugate.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    E = np.asarray(H_diag, dtype=float)
    f = np.asarray(f_diag, dtype=float)
    k = kappa(J_spec, t, beta)
    p = phi(J_spec, t, beta)
    df = f[:, None] - f[None, :]
    f2 = f[:, None] ** 2 - f[None, :] ** 2
    dE = E[:, None] - E[None, :]
    return rho0 * np.exp(-1j * dE * t - df * df * k / 4 - 1j * f2 * p / 4)


def short_time_zeno_time(J):
    """``sqrt(2 / (gamma0 lambda))`` from ``Gamma(tau) ~ gamma0 lambda tau / 2`` at small ``tau``.

    Proportional to ``(gamma0 lambda)**-1/2``; the factor ``sqrt 2`` follows
    from the short-time slope of the qubit rate.
    """
    if not isinstance(J, Lorentzian):
        raise DomainError("short-time Zeno time is defined here for Lorentzian spectra")
    if J.omega0 != 0:
        raise DomainError("short-time Zeno time formula requires omega0 = 0")
    if J.gamma0 == 0:
        raise DomainError("gamma0 = 0 has no Zeno regime")
    return math.sqrt(2.0 / (J.gamma0 * J.lam))
