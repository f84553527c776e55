"""Spectral densities, bath correlation functions and their exponential expansions.

Two spectra are supported, each paired with the temperature regime in which
it admits a finite exponential expansion:

* :class:`Lorentzian` at zero temperature, integrated over the whole real
  frequency axis, whose correlation function is a single exponential;
* :class:`OhmicDrude` at finite temperature, integrated over positive
  frequencies with the thermal factor ``coth(beta*omega/2)``, expanded in
  Matsubara terms.

:func:`correlation_quadrature` evaluates the defining frequency integral
directly and serves as the independent check on every expansion.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import AccuracyError, ContractViolation, DomainError, SingularParameterError
from .policy import DEFAULT_POLICY

ZERO_TEMPERATURE = math.inf


class LowTemperatureWarning(UserWarning):
    """The Matsubara expansion is used where many terms are needed."""


@dataclass(frozen=True)
class Lorentzian:
    """``J(w) = gamma0 * lam**2 / (2 pi ((w - omega0)**2 + lam**2))``."""

    gamma0: float
    lam: float
    omega0: float = 0.0

    def __post_init__(self):
        # gamma0 == 0 is accepted: it describes a decoupled bath
        if not (self.gamma0 >= 0 and math.isfinite(self.gamma0)):
            raise DomainError(f"gamma0 must be >= 0, got {self.gamma0!r}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be > 0, got {self.lam!r}")
        if not math.isfinite(self.omega0):
            raise DomainError("omega0 must be finite")

    @property
    def center(self):
        return abs(self.omega0)

    @property
    def width(self):
        return self.lam

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        val = self.gamma0 * self.lam**2 / (2 * np.pi * ((omega - self.omega0) ** 2 + self.lam**2))
        return val if val.ndim else float(val)


@dataclass(frozen=True)
class OhmicDrude:
    """``J(w) = 2 chi omega_c w / (pi (w**2 + omega_c**2))``."""

    chi: float
    omega_c: float

    def __post_init__(self):
        if not (self.chi >= 0 and math.isfinite(self.chi)):
            raise DomainError(f"chi must be >= 0, got {self.chi!r}")
        if not (self.omega_c > 0 and math.isfinite(self.omega_c)):
            raise DomainError(f"omega_c must be > 0, got {self.omega_c!r}")

    @property
    def center(self):
        return 0.0

    @property
    def width(self):
        return self.omega_c

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        val = 2 * self.chi * self.omega_c * omega / (np.pi * (omega**2 + self.omega_c**2))
        return val if val.ndim else float(val)


def spectral_density_value(J, omega):
    return J(omega)


@dataclass(frozen=True)
class BathDecomposition:
    """``C(t) = sum_j zeta_j exp(-upsilon_j t)`` for ``t >= 0``."""

    zeta: tuple
    upsilon: tuple
    beta: float
    source: object = field(default=None, compare=True)

    def __post_init__(self):
        if len(self.zeta) != len(self.upsilon):
            raise ContractViolation("zeta and upsilon must have the same length")
        for u in self.upsilon:
            if not complex(u).real > 0:
                raise ContractViolation(f"decay rate {u!r} must have positive real part")

    def __len__(self):
        return len(self.zeta)

    @property
    def zeta_array(self):
        return np.array(self.zeta, dtype=complex)

    @property
    def upsilon_array(self):
        return np.array(self.upsilon, dtype=complex)

    @property
    def max_rate(self):
        return max(complex(u).real for u in self.upsilon) if self.upsilon else 0.0


def lorentz_zero_T_decomposition(J):
    if not isinstance(J, Lorentzian):
        raise ContractViolation("zero-temperature expansion requires a Lorentzian spectrum")
    zeta = 0.5 * J.gamma0 * J.lam
    return BathDecomposition(
        zeta=(complex(zeta),),
        upsilon=(complex(J.lam, J.omega0),),
        beta=ZERO_TEMPERATURE,
        source=J,
    )


def _check_thermal(J, beta):
    if not isinstance(J, OhmicDrude):
        raise ContractViolation("Matsubara expansion requires an Ohmic-Drude spectrum")
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be finite and > 0, got {beta!r}")
    x = 0.5 * beta * J.omega_c
    if abs(math.sin(x)) < 1e-12 * max(1.0, x):
        raise SingularParameterError(
            f"beta*omega_c/2 = {x!r} sits on a pole of cot (a Matsubara frequency equals omega_c)"
        )


def _matsubara_rates(J, beta, j):
    """Real Matsubara coefficients ``zeta_j`` for integer array ``j >= 1``."""
    ups = 2 * np.pi * np.asarray(j, dtype=float) / beta
    denom = ups**2 - J.omega_c**2
    if np.any(np.abs(ups - J.omega_c) <= 1e-12 * J.omega_c):
        raise SingularParameterError("a Matsubara frequency coincides with omega_c")
    return 4 * J.chi * J.omega_c / beta * ups / denom, ups


def matsubara_decomposition(J, beta, epsilon):
    """Drude correlation function truncated after ``epsilon`` Matsubara terms."""
    _check_thermal(J, beta)
    epsilon = int(epsilon)
    if epsilon < 0:
        raise DomainError("Matsubara cutoff must be >= 0")
    if beta * J.omega_c > 2 * np.pi:
        warnings.warn(
            f"beta*omega_c = {beta * J.omega_c:.3g} exceeds 2*pi: the Matsubara series converges "
            "slowly and the truncated hierarchy becomes less reliable",
            LowTemperatureWarning,
            stacklevel=2,
        )
    wc, chi = J.omega_c, J.chi
    zeta = [complex(chi * wc / math.tan(0.5 * beta * wc), -chi * wc)]
    ups = [complex(wc)]
    if epsilon:
        z, u = _matsubara_rates(J, beta, np.arange(1, epsilon + 1))
        zeta += [complex(v) for v in z]
        ups += [complex(v) for v in u]
    return BathDecomposition(zeta=tuple(zeta), upsilon=tuple(ups), beta=float(beta), source=J)


def matsubara_tail_bound(J, beta, epsilon, jmax=200_000):
    """``4 * sum_{j > epsilon} |zeta_j| / upsilon_j**2``.

    Bounds the error in ``-ln P`` (the dephasing exponent) incurred by replacing
    the terms beyond ``epsilon`` with their time-local (delta-correlated) limit.
    """
    _check_thermal(J, beta)
    j = np.arange(int(epsilon) + 1, jmax + 1)
    z, u = _matsubara_rates(J, beta, j)
    head = 4 * np.sum(np.abs(z) / u**2)
    # large-j asymptote |zeta_j| / u_j**2 ~ (4 chi wc / beta) / u_j**3
    rest = 4 * (4 * J.chi * J.omega_c / beta) * (beta / (2 * np.pi)) ** 3 / (2.0 * jmax**2)
    return float(head + rest)


def auto_matsubara_cutoff(J, beta, tol=None, cap=None, policy=DEFAULT_POLICY):
    """Smallest cutoff whose Markovianised tail bound is below ``tol``."""
    tol = policy.matsubara_tail_atol if tol is None else tol
    cap = policy.matsubara_cap if cap is None else cap
    _check_thermal(J, beta)
    jmax = 200_000
    j = np.arange(1, jmax + 1)
    z, u = _matsubara_rates(J, beta, j)
    terms = 4 * np.abs(z) / u**2
    rest = 4 * (4 * J.chi * J.omega_c / beta) * (beta / (2 * np.pi)) ** 3 / (2.0 * jmax**2)
    # tails[e] = sum over j > e
    tails = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]]) + rest
    for eps in range(cap + 1):
        if tails[eps] < tol:
            return eps
    return cap


def integrated_correlation(J, beta):
    """``int_0^inf C(t) dt`` in closed form."""
    if isinstance(J, OhmicDrude):
        _check_thermal(J, beta)
        return complex(2 * J.chi / (beta * J.omega_c), -J.chi)
    if isinstance(J, Lorentzian) and math.isinf(beta):
        return 0.5 * J.gamma0 * J.lam / complex(J.lam, J.omega0)
    raise ContractViolation("unsupported spectrum/temperature pairing")


def terminator_coefficient(decomp):
    """Weight of the Matsubara terms dropped from ``decomp``, treated as delta-correlated."""
    J = decomp.source
    total = integrated_correlation(J, decomp.beta)
    kept = complex(np.sum(decomp.zeta_array / decomp.upsilon_array))
    return total - kept


def correlation_eval(decomp, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("correlation_eval is defined for t >= 0")
    if len(decomp) == 0:
        out = np.zeros(t_arr.shape, dtype=complex)
    else:
        out = np.exp(-np.multiply.outer(t_arr, decomp.upsilon_array)) @ decomp.zeta_array
    return complex(out) if out.ndim == 0 else out


# -- quadrature ------------------------------------------------------------------

def _spectral_weights(J, beta):
    """Fold the frequency integral onto ``w >= 0``.

    Returns ``(g_cos, g_sin)`` such that for every kernel used here
    ``int dw J(w) n(w) k_even(w) = int_0^inf g_cos k_even`` and
    ``int dw J(w) k_odd(w) = int_0^inf g_sin k_odd``.
    """
    if isinstance(J, Lorentzian):
        if not math.isinf(beta):
            raise ContractViolation("Lorentzian spectra are only used at zero temperature")
        g0, lam, w0 = J.gamma0, J.lam, J.omega0
        c = g0 * lam * lam / (2 * math.pi)
        l2 = lam * lam

        def g_cos(w):
            return c / ((w - w0) ** 2 + l2) + c / ((w + w0) ** 2 + l2)

        def g_sin(w):
            # factored difference of the two Lorentzians; avoids cancellation far from w0
            return 4 * c * w * w0 / (((w - w0) ** 2 + l2) * ((w + w0) ** 2 + l2))

        return g_cos, g_sin

    if isinstance(J, OhmicDrude):
        a = 2 * J.chi * J.omega_c / math.pi
        wc2 = J.omega_c**2

        def g_sin(w):
            return a * w / (w * w + wc2)

        if math.isinf(beta):
            return g_sin, g_sin
        if not beta > 0:
            raise DomainError("beta must be > 0")
        low = a / wc2 * 2 / beta

        def g_cos(w):
            x = 0.5 * beta * w
            if x < 1e-8:
                return low
            return a * w / (w * w + wc2) / math.tanh(x)

        return g_cos, g_sin

    raise ContractViolation(f"unknown spectral density {J!r}")


def _cutoff(J):
    return J.center + 50.0 * J.width


class _Quad:
    """Accumulates quadrature pieces and their error estimates."""

    def __init__(self, atol):
        self.atol = atol
        self.total = 0.0
        self.err = 0.0
        self.bad = False

    def add(self, f, a, b, sign=1.0, **kw):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(f, a, b, epsabs=self.atol * 1e-2, epsrel=1e-12, limit=2000, **kw)
            except integrate.IntegrationWarning:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", integrate.IntegrationWarning)
                    val, err = integrate.quad(f, a, b, epsabs=self.atol * 1e-2, epsrel=1e-12, limit=2000, **kw)
                self.bad = True
        self.total += sign * val
        self.err += abs(err)

    def result(self, what):
        # large results are held to a relative floor of 1e-12
        if self.bad or self.err > max(self.atol, 1e-12 * abs(self.total)) or not math.isfinite(self.total):
            raise AccuracyError(
                f"{what}: quadrature error estimate {self.err:.3e} exceeds {self.atol:.1e}",
                estimate=self.err,
            )
        return self.total


def _oscillatory(q, g, t, kind, W, sign=1.0):
    """``sign * int_0^inf g(w) cos|sin(w t) dw`` split at ``W``."""
    q.add(g, 0.0, W, sign, weight=kind, wvar=t)
    q.add(g, W, np.inf, sign, weight=kind, wvar=t)


def correlation_quadrature(J, beta, t, atol=None, policy=DEFAULT_POLICY, return_error=False):
    """``C(t) = int dw J(w) [coth(beta w/2) cos(w t) - i sin(w t)]`` by adaptive quadrature."""
    atol = policy.correlation_quad_atol if atol is None else atol
    t = float(t)
    if t < 0:
        raise DomainError("correlation_quadrature is defined for t >= 0")
    g_cos, g_sin = _spectral_weights(J, beta)
    W = _cutoff(J)
    re, im = _Quad(atol / 2), _Quad(atol / 2)
    if t == 0.0:
        if isinstance(J, OhmicDrude) and J.chi > 0:
            # the folded weight falls off as 1/w, so the integral diverges logarithmically
            raise DomainError("C(0) diverges for a Drude spectrum; Re C(t) grows like -log t as t -> 0")
        re.add(g_cos, 0.0, W, points=[J.center] if 0 < J.center < W else None)
        re.add(g_cos, W, np.inf)
    else:
        _oscillatory(re, g_cos, t, "cos", W)
        _oscillatory(im, g_sin, t, "sin", W, sign=-1.0)
    value = complex(re.result("Re C(t)"), im.result("Im C(t)"))
    if return_error:
        return value, re.err + im.err
    return value


def _add_decades(q, f, a, b):
    """``int_a^b f`` in segments at most a decade wide (``a > 0``)."""
    edges = np.geomspace(a, b, max(2, int(math.ceil(math.log10(b / a))) + 1))
    for lo, hi in zip(edges[:-1], edges[1:]):
        q.add(f, lo, hi)


def _add_inverted(q, h, a, sign=1.0):
    """``int_a^inf h`` as ``int_0^(1/a) h(1/u) / u**2 du`` (non-oscillatory tails)."""
    q.add(lambda u: h(1.0 / u) / (u * u), 0.0, 1.0 / a, sign)


def _bands(J, t):
    """``(b_near, b_far)``: direct integration below ``b_far``, split weights above.

    Above ``40 pi / t`` the oscillatory and non-oscillatory pieces of the
    integrand are both small, so splitting them loses nothing; below it they
    nearly cancel for small ``t``.
    """
    W = _cutoff(J)
    b = 40 * math.pi / t
    return (W, b) if b > W else (b, b)


def dephasing_exponent(J, beta, t, atol=None, policy=DEFAULT_POLICY):
    """``4 int dw J(w) n(w) (1 - cos w t) / w**2`` (``n`` = thermal factor)."""
    atol = policy.kernel_quad_atol if atol is None else atol
    t = float(t)
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0.0:
        return 0.0
    g_cos, _ = _spectral_weights(J, beta)
    b, bf = _bands(J, t)

    def near(w):
        if w == 0.0:
            return g_cos(0.0) * 0.5 * t * t
        s = math.sin(0.5 * w * t)
        return g_cos(w) * 2.0 * s * s / (w * w)

    def tail(w):
        return g_cos(w) / (w * w)

    q = _Quad(atol / 6)
    pts = [J.center] if 0 < J.center < b else None
    q.add(near, 0.0, b, points=pts)
    if bf > b:
        _add_decades(q, near, b, bf)
    _add_inverted(q, tail, bf)
    q.add(tail, bf, np.inf, sign=-1.0, weight="cos", wvar=t)
    return 4.0 * q.result("dephasing exponent")


def phase_shift(J, beta, t, atol=None, policy=DEFAULT_POLICY):
    """``4 int dw J(w) (sin w t - w t) / w**2``; temperature independent."""
    atol = policy.kernel_quad_atol if atol is None else atol
    t = float(t)
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0.0:
        return 0.0
    _, g_sin = _spectral_weights(J, beta)
    if isinstance(J, Lorentzian) and J.omega0 == 0.0:
        return 0.0
    b, bf = _bands(J, t)

    def near(w):
        x = w * t
        if x < 1e-3:
            x2 = x * x
            s = -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
        else:
            s = math.sin(x) - x
        return 0.0 if w == 0.0 else g_sin(w) * s / (w * w)

    q = _Quad(atol / 6)
    pts = [J.center] if 0 < J.center < b else None
    q.add(near, 0.0, b, points=pts)
    if bf > b:
        _add_decades(q, near, b, bf)
    q.add(lambda w: g_sin(w) / (w * w), bf, np.inf, weight="sin", wvar=t)
    _add_inverted(q, lambda w: g_sin(w) / w, bf, sign=-t)
    return 4.0 * q.result("phase shift")
