import math

import numpy as np
import pytest

from zenoheom import oracle
from zenoheom.bath import Lorentzian, OhmicDrude
from zenoheom.errors import DomainError
from zenoheom.models import su2_coherent_state

FIG_QUBIT = Lorentzian(0.5, 0.05)
DETUNED = Lorentzian(0.2, 0.02, 1.2)


def kappa_closed(g0, lam, t):
    return 2 * g0 * (t - (1 - math.exp(-lam * t)) / lam)


def test_kappa_at_zero():
    assert oracle.kappa(FIG_QUBIT, 0.0) == 0.0


@pytest.mark.parametrize("x", [0.5, 2.0, 10.0])
@pytest.mark.parametrize("lam", [0.05, 0.5, 5.0])
def test_kappa_closed_form(lam, x):
    J = Lorentzian(0.5, lam)
    t = x / lam
    assert oracle.kappa(J, t) == pytest.approx(kappa_closed(0.5, lam, t), abs=1e-7)


def test_kappa_frozen_values():
    # independent double integral of the correlation function (mpmath)
    assert oracle.kappa(FIG_QUBIT, 10.0) == pytest.approx(2.1306131942526685, abs=1e-10)
    assert oracle.kappa(FIG_QUBIT, 200.0) == pytest.approx(180.00090799859524, abs=1e-8)


def test_kappa_small_time():
    t = 1e-2
    assert oracle.kappa(FIG_QUBIT, t) == pytest.approx(0.5 * 0.05 * t * t, rel=1e-3)


def test_phi_vanishes_without_detuning():
    for t in (1.0, 5.0):
        assert oracle.phi(FIG_QUBIT, t) == 0.0


def test_phi_detuned_frozen_and_negative():
    # full-line mpmath quadrature
    assert oracle.phi(DETUNED, 1.0) == pytest.approx(-0.0014742348510183212, abs=1e-9)
    assert oracle.phi(DETUNED, 5.0) == pytest.approx(-0.034703210510549656, abs=1e-9)
    assert all(oracle.phi(DETUNED, t) < 0 for t in (0.1, 0.5, 1.0))


def test_qubit_gamma_limits():
    assert oracle.dephasing_qubit_gamma(Lorentzian(0.0, 1.0), 2.0) == 0.0
    # kappa >> 1 saturates at ln 2 / tau
    tau = 50.0
    assert oracle.dephasing_qubit_gamma(Lorentzian(5.0, 5.0), tau) == pytest.approx(math.log(2) / tau, rel=1e-9)


def test_qutrit_element_cases():
    t = 3.0
    k = oracle.kappa(DETUNED, t)
    p = oracle.phi(DETUNED, t)
    assert oracle.dephasing_qutrit_rho_element(DETUNED, 1.0, t, 1, 1) == 1
    e = oracle.dephasing_qutrit_rho_element(DETUNED, 1.0, t, 1, -1)
    assert abs(e) == pytest.approx(math.exp(-4 * k))
    assert e / abs(e) == pytest.approx(np.exp(-2j * t))
    e = oracle.dephasing_qutrit_rho_element(DETUNED, 1.0, t, 1, 0)
    assert e == pytest.approx(np.exp(-1j * t - 1j * p - k))


def test_qutrit_gamma_reduces_to_qubit():
    for tau in (1.0, 5.0):
        assert oracle.dephasing_qutrit_gamma(FIG_QUBIT, 1.0, 0.5, tau) == pytest.approx(
            oracle.dephasing_qubit_gamma(FIG_QUBIT, tau), rel=1e-12
        )


def test_qutrit_gamma_vanishes_at_short_times():
    assert oracle.dephasing_qutrit_gamma(FIG_QUBIT, 1.0, 1, 1e-6) < 1e-6


@pytest.mark.parametrize("J", [FIG_QUBIT, DETUNED])
@pytest.mark.parametrize("tau", [0.5, 4.0, 30.0])
def test_log_space_matches_direct_sum(J, tau):
    psi = su2_coherent_state(1, math.pi / 2, 0.0)
    P = oracle.dephasing_survival(J, psi, [2, 0, -2], tau)
    assert oracle.dephasing_qutrit_gamma(J, 1.0, 1, tau) == pytest.approx(-math.log(P) / tau, rel=1e-12)


def test_large_spin_does_not_overflow():
    g = oracle.dephasing_qutrit_gamma(FIG_QUBIT, 1.0, 200, 3.0)
    assert math.isfinite(g) and g > 0


def test_qutrit_gamma_rejects_frozen_state():
    with pytest.raises(DomainError):
        oracle.dephasing_qutrit_gamma(FIG_QUBIT, 0.0, 1, 1.0)


def test_qutrit_single_peak():
    J = Lorentzian(0.2, 0.02)
    taus = np.linspace(0.05, 40, 200)
    g = np.array([oracle.dephasing_qutrit_gamma(J, 1.0, 1, t) for t in taus])
    inner = (g[1:-1] > g[:-2]) & (g[1:-1] >= g[2:])
    assert inner.sum() == 1


def test_density_matrix_matches_elements():
    rho0 = np.full((3, 3), 1 / 3, dtype=complex)
    t = 2.5
    r = oracle.dephasing_density_matrix(DETUNED, rho0, [1, 0, -1], [2, 0, -2], t)
    m = [1, 0, -1]
    for i in range(3):
        for j in range(3):
            assert r[i, j] == pytest.approx(rho0[i, j] * oracle.dephasing_qutrit_rho_element(DETUNED, 1.0, t, m[i], m[j]))


def test_short_time_zeno_time():
    assert oracle.short_time_zeno_time(Lorentzian(1.0, 2.0)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        oracle.short_time_zeno_time(DETUNED)
    with pytest.raises(DomainError):
        oracle.short_time_zeno_time(OhmicDrude(0.1, 1.0))


def test_thermal_kappa_grows_with_temperature():
    J = OhmicDrude(0.05, 10.0)
    k = [oracle.kappa(J, 0.5, beta) for beta in (1.0, 0.1, 0.01)]
    assert k[0] < k[1] < k[2]
