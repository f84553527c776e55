import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenoheom.bath import (
    BathDecomposition,
    LowTemperatureWarning,
    Lorentzian,
    OhmicDrude,
    auto_matsubara_cutoff,
    correlation_eval,
    correlation_quadrature,
    integrated_correlation,
    lorentz_zero_T_decomposition,
    matsubara_decomposition,
    matsubara_tail_bound,
    spectral_density_value,
    terminator_coefficient,
)
from zenoheom.errors import ContractViolation, DomainError, SingularParameterError

DRUDE = OhmicDrude(0.05, 10.0)


def test_lorentzian_peak_and_half_width():
    J = Lorentzian(0.5, 0.3, 1.2)
    peak = spectral_density_value(J, 1.2)
    assert peak == pytest.approx(0.5 / (2 * math.pi))
    assert spectral_density_value(J, 1.5) == pytest.approx(peak / 2)
    assert spectral_density_value(J, 0.9) == pytest.approx(peak / 2)


def test_drude_at_cutoff():
    assert spectral_density_value(DRUDE, 10.0) == pytest.approx(0.05 / math.pi)


@pytest.mark.parametrize("bad", [dict(gamma0=-1, lam=1), dict(gamma0=1, lam=0), dict(gamma0=1, lam=1, omega0=math.inf)])
def test_lorentzian_rejects(bad):
    with pytest.raises(DomainError):
        Lorentzian(**bad)


def test_zero_T_single_term():
    d = lorentz_zero_T_decomposition(Lorentzian(0.5, 0.05))
    assert len(d) == 1
    assert d.zeta[0] == pytest.approx(0.0125)
    assert d.upsilon[0] == pytest.approx(0.05)
    assert correlation_eval(d, 0.0) == pytest.approx(0.0125)
    assert correlation_eval(d, 1 / 0.05) == pytest.approx(0.0125 * math.exp(-1))


def test_zero_T_detuned_modulus():
    d = lorentz_zero_T_decomposition(Lorentzian(1.0, 1.0, 2.0))
    assert d.zeta[0] == pytest.approx(0.5)
    assert d.upsilon[0] == pytest.approx(1 + 2j)
    t = np.linspace(0, 5, 11)
    assert np.allclose(np.abs(correlation_eval(d, t)), 0.5 * np.exp(-t))


def test_empty_decomposition_is_zero():
    d = BathDecomposition((), (), math.inf)
    assert correlation_eval(d, 1.3) == 0


def test_correlation_eval_rejects_negative_time():
    with pytest.raises(DomainError):
        correlation_eval(lorentz_zero_T_decomposition(Lorentzian(1, 1)), -0.1)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 2), st.floats(0.01, 5), st.floats(-3, 3), st.floats(0, 20))
def test_single_lorentzian_modulus_non_increasing(g0, lam, w0, t):
    d = lorentz_zero_T_decomposition(Lorentzian(g0, lam, w0))
    assert abs(correlation_eval(d, t + 0.1)) <= abs(correlation_eval(d, t)) + 1e-15


def test_matsubara_hot_leading_term():
    d = matsubara_decomposition(DRUDE, 0.01, 0)
    assert len(d) == 1
    # exact cot value; the high-temperature estimate 2 chi / beta is within 0.2 %
    exact = 0.05 * 10 / math.tan(0.05)
    assert d.zeta[0].real == pytest.approx(exact, rel=1e-14)
    assert d.zeta[0].real == pytest.approx(10.0, rel=2e-3)
    assert d.zeta[0].imag == pytest.approx(-0.5)


@pytest.mark.parametrize("beta", [0.01, 0.1, 0.5])
def test_first_matsubara_frequency(beta):
    d = matsubara_decomposition(DRUDE, beta, 3)
    assert d.upsilon[1] == 2 * math.pi / beta
    assert len(d) == 4


def test_matsubara_pole_rejected():
    # beta * omega_c / 2 = pi puts the first Matsubara frequency on omega_c
    with pytest.raises(SingularParameterError):
        matsubara_decomposition(OhmicDrude(0.05, 10.0), 2 * math.pi / 10.0, 2)


def test_low_temperature_warning():
    with pytest.warns(LowTemperatureWarning):
        matsubara_decomposition(DRUDE, 1.0, 3)


def test_matsubara_requires_drude():
    with pytest.raises(ContractViolation):
        matsubara_decomposition(Lorentzian(1, 1), 1.0, 1)
    with pytest.raises(DomainError):
        matsubara_decomposition(DRUDE, math.inf, 1)


@pytest.mark.parametrize("t", [0.0, 0.3, 2.0, 20.0])
@pytest.mark.parametrize("J", [Lorentzian(0.5, 0.05), Lorentzian(0.2, 0.02, 1.2), Lorentzian(1.0, 5.0, -0.7)])
def test_zero_T_quadrature_matches_closed_form(J, t):
    d = lorentz_zero_T_decomposition(J)
    assert abs(correlation_quadrature(J, math.inf, t) - correlation_eval(d, t)) < 1e-7


@pytest.mark.parametrize("t", [0.01, 0.05, 0.1, 0.5])
def test_hot_drude_quadrature_matches_expansion(t):
    d = matsubara_decomposition(DRUDE, 0.01, 10)
    assert abs(correlation_quadrature(DRUDE, 0.01, t) - correlation_eval(d, t)) < 1e-4


def test_drude_correlation_at_zero_diverges():
    with pytest.raises(DomainError):
        correlation_quadrature(DRUDE, 0.5, 0.0)


def test_conjugate_correlation_from_conjugated_terms():
    # C(-t) = C(t)*: the reversed-time function is the expansion with conjugated terms
    J = Lorentzian(0.3, 0.4, 0.9)
    d = lorentz_zero_T_decomposition(J)
    t = 1.7
    c = correlation_quadrature(J, math.inf, t)
    mirrored = complex(np.sum(d.zeta_array.conj() * np.exp(-d.upsilon_array.conj() * t)))
    assert c.conjugate() == pytest.approx(mirrored, abs=1e-9)


@pytest.mark.parametrize("beta,expected", [(1.0, 13), (0.5, 6), (0.15, 2), (0.1, 1), (0.01, 0)])
def test_auto_cutoff_regression(beta, expected):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowTemperatureWarning)
        assert auto_matsubara_cutoff(DRUDE, beta) == expected


def test_tail_bound_monotone_and_below_tolerance():
    bounds = [matsubara_tail_bound(DRUDE, 0.5, e) for e in range(10)]
    assert all(b > a for a, b in zip(bounds[1:], bounds))
    assert matsubara_tail_bound(DRUDE, 0.5, auto_matsubara_cutoff(DRUDE, 0.5)) < 1e-4


def test_terminator_vanishes_for_full_sum_limit():
    # the coefficient is the integral of the dropped terms; it shrinks as terms are kept
    c = [abs(terminator_coefficient(matsubara_decomposition(DRUDE, 0.5, e))) for e in (0, 4, 16, 64)]
    assert all(b < a for a, b in zip(c, c[1:]))


def test_terminator_high_temperature_limit():
    beta = 0.01
    d = matsubara_decomposition(DRUDE, beta, 0)
    total = integrated_correlation(DRUDE, beta)
    assert total == pytest.approx(2 * 0.05 / (beta * 10) - 0.05j)
    assert abs(terminator_coefficient(d)) < 1e-3 * abs(total)


def test_integrated_correlation_lorentzian():
    J = Lorentzian(0.4, 0.2, 0.5)
    d = lorentz_zero_T_decomposition(J)
    assert integrated_correlation(J, math.inf) == pytest.approx(d.zeta[0] / d.upsilon[0])
