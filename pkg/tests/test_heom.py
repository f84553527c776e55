import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from zenoheom import _heom_kernel_py, oracle
from zenoheom.bath import Lorentzian, OhmicDrude
from zenoheom.errors import CapacityError, ContractViolation, ConvergenceError, DomainError, StepSizeError
from zenoheom.heom import (
    HierarchyLayout,
    HierarchyState,
    build_finite_T_generator,
    build_zero_T_generator,
    converge_in_depth,
    evolve,
    layout_size,
    reduced_state,
    trajectory,
)
from zenoheom.heom.propagate import auto_dt, check_step
from zenoheom.linalg import basis_state, projector
from zenoheom.models import biased_qubit, biased_qutrit, su2_coherent_state
from zenoheom.policy import NumericPolicy

try:
    from zenoheom import _heom_kernel
except ImportError:  # extension not built
    _heom_kernel = None

BACKENDS = [_heom_kernel_py] + ([_heom_kernel] if _heom_kernel is not None else [])
PLUS = su2_coherent_state(0.5, math.pi / 2, 0.0)


def dense_generator(gen):
    """Block matrix of the hierarchy, assembled directly from the neighbour tables."""
    lay = gen.layout
    N, D = len(lay), gen.diag.shape[0]
    M = np.zeros((N * D, N * D), dtype=complex)
    for n, idx in enumerate(lay.indices):
        blk = slice(n * D, (n + 1) * D)
        M[blk, blk] = gen.diag - np.dot(idx, gen.nu) * np.eye(D)
        for p in range(lay.K):
            up = lay.up[n, p]
            if up >= 0:
                M[blk, up * D:(up + 1) * D] += gen.phi
            dn = lay.down[n, p]
            if dn >= 0:
                M[blk, dn * D:(dn + 1) * D] += idx[p] * gen.links[p]
    return M


# -- layout ------------------------------------------------------------------


def test_layout_depth_one_two_exponentials():
    lay = HierarchyLayout(2, 1)
    assert lay.indices == [(0, 0), (1, 0), (0, 1)]


@pytest.mark.parametrize("K,L,n", [(3, 3, 20), (2, 0, 1), (1, 5, 6), (4, 2, 15)])
def test_layout_size(K, L, n):
    assert layout_size(K, L) == n
    assert len(HierarchyLayout(K, L)) == n


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 5))
def test_layout_neighbours_consistent(K, L):
    lay = HierarchyLayout(K, L)
    for n, idx in enumerate(lay.indices):
        assert sum(idx) <= L
        for p in range(K):
            u, d = lay.up[n, p], lay.down[n, p]
            if u >= 0:
                assert lay.down[u, p] == n
            else:
                assert sum(idx) == L
            if d >= 0:
                assert lay.up[d, p] == n
            else:
                assert idx[p] == 0
    assert np.all(np.diff(lay.depth) >= 0)


def test_layout_rejects_bad_input():
    with pytest.raises(DomainError):
        HierarchyLayout(0, 2)
    with pytest.raises(DomainError):
        HierarchyLayout(2, -1)


def test_layout_capacity_guard():
    policy = NumericPolicy(max_hierarchy_bytes=1024)
    with pytest.raises(CapacityError):
        HierarchyLayout(2, 10, dim=3, policy=policy)


# -- generator ---------------------------------------------------------------


def test_zero_detuning_rates_real():
    gen = build_zero_T_generator(biased_qubit(1, 0), Lorentzian(0.5, 0.05), 3)
    assert np.allclose(gen.nu, [0.05, 0.05])


def test_decoupled_bath_has_no_links():
    gen = build_zero_T_generator(biased_qubit(1, 0.3), Lorentzian(0.0, 0.5), 2)
    assert np.allclose(gen.links, 0)


def test_finite_T_layout_size():
    gen = build_finite_T_generator(biased_qubit(1, -0.1), OhmicDrude(0.05, 10), 0.5, 2, 3)
    assert len(gen.layout) == 20


def test_depth_zero_is_time_local():
    gen = build_finite_T_generator(biased_qubit(1, -0.1), OhmicDrude(0.05, 10), 0.5, 1, 0)
    assert len(gen.layout) == 1
    assert np.all(gen.layout.up == -1) and np.all(gen.layout.down == -1)


def test_terminator_hot_limit():
    J = OhmicDrude(0.05, 10.0)
    m = biased_qubit(1, 0)
    with_t = build_finite_T_generator(m, J, 0.01, 0, 1, terminator=True)
    without = build_finite_T_generator(m, J, 0.01, 0, 1, terminator=False)
    # the leading term carries nearly all the weight at high temperature
    rel = np.abs(with_t.diag - without.diag).max() / np.abs(with_t.links).max()
    assert rel < 1e-2


def test_generator_rejects_wrong_spectrum():
    with pytest.raises(ContractViolation):
        build_zero_T_generator(biased_qubit(1, 0), OhmicDrude(0.1, 1), 2)
    with pytest.raises(ContractViolation):
        build_finite_T_generator(biased_qubit(1, 0), Lorentzian(0.1, 1), 1.0, 1, 2)
    with pytest.raises(DomainError):
        build_zero_T_generator(biased_qubit(1, 0), Lorentzian(0.1, 1), 2, link_pairing="sideways")


# -- kernels -----------------------------------------------------------------


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize(
    "gen",
    [
        build_zero_T_generator(biased_qubit(0.85, -0.255), Lorentzian(0.3, 0.4, 0.7), 3),
        build_zero_T_generator(biased_qutrit(1, 0.5), Lorentzian(0.5, 0.5), 2),
        build_finite_T_generator(biased_qubit(1, -0.1), OhmicDrude(0.05, 10), 0.5, 2, 2),
    ],
    ids=["qubit_zeroT", "qutrit_zeroT", "qubit_finiteT"],
)
def test_kernel_matches_dense_generator(backend, gen):
    rng = np.random.default_rng(7)
    N, D = len(gen.layout), gen.diag.shape[0]
    x = rng.normal(size=(N, D)) + 1j * rng.normal(size=(N, D))
    expected = (dense_generator(gen) @ x.reshape(-1)).reshape(N, D)
    got = backend.rhs(np.ascontiguousarray(x), *gen.kernel_args())
    assert np.allclose(got, expected, atol=1e-12)


def test_backends_agree_on_steps():
    if _heom_kernel is None:
        pytest.skip("compiled kernel not built")
    gen = build_zero_T_generator(biased_qutrit(1, 0.5), Lorentzian(0.5, 0.5), 3)
    N, D = len(gen.layout), gen.diag.shape[0]
    x0 = np.zeros((N, D), dtype=complex)
    x0[0] = projector(basis_state(3, 0)).reshape(-1)
    a, b = x0.copy(), x0.copy()
    _heom_kernel_py.rk4_steps(a, *gen.kernel_args(), 0.01, 50)
    _heom_kernel.rk4_steps(b, *gen.kernel_args(), 0.01, 50)
    assert np.allclose(a, b, atol=1e-14)


# -- propagation -------------------------------------------------------------


def test_closed_system_phase():
    eps = 1.3
    gen = build_zero_T_generator(biased_qubit(eps, 0), Lorentzian(0.0, 0.5), 2)
    state = HierarchyState.initial(gen, projector(PLUS))
    out = evolve(gen, state, math.pi / eps, 0.005)
    rho = reduced_state(out)
    assert rho[0, 1] == pytest.approx(-0.5, abs=1e-9)
    assert rho[0, 0].real == pytest.approx(0.5, abs=1e-12)


def test_evolution_matches_matrix_exponential():
    gen = build_zero_T_generator(biased_qubit(0.85, -0.255), Lorentzian(0.3, 0.4, 0.7), 3)
    state = HierarchyState.initial(gen, projector(basis_state(2, 0)))
    t = 2.0
    exact = expm(dense_generator(gen) * t) @ state.x.reshape(-1)
    out = evolve(gen, state, t, 0.01)
    assert np.allclose(out.x.reshape(-1), exact, atol=1e-9)


def test_pure_dephasing_coherence():
    J = Lorentzian(0.5, 0.05)
    gen = build_zero_T_generator(biased_qubit(1, 0), J, 20)
    times = np.linspace(0, 20, 11)
    rhos, stats = trajectory(gen, projector(PLUS), times)
    exact = np.array([0.5 * math.exp(-oracle.kappa(J, t)) for t in times])
    assert np.max(np.abs(np.abs(rhos[:, 0, 1]) - exact)) < 1e-5
    assert stats.max_trace_drift < 1e-8


def test_dark_state_is_frozen():
    gen = build_zero_T_generator(biased_qubit(1, 0), Lorentzian(0.5, 0.05), 6)
    rhos, _ = trajectory(gen, projector(basis_state(2, 0)), np.linspace(0, 30, 7))
    assert np.allclose(rhos, projector(basis_state(2, 0)), atol=1e-13)


def test_reduced_state_at_start():
    gen = build_zero_T_generator(biased_qutrit(1, 0.5), Lorentzian(0.5, 0.5), 2)
    rho0 = projector(su2_coherent_state(1, 1.0, 0.4))
    assert np.allclose(reduced_state(HierarchyState.initial(gen, rho0)), rho0, rtol=0, atol=1e-15)


@settings(max_examples=10, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.05, 1), st.floats(0.05, 2), st.floats(-1, 1))
def test_structure_preserved(eps, delta, g0, lam, w0):
    gen = build_zero_T_generator(biased_qubit(eps, delta), Lorentzian(g0, lam, w0), 3)
    rhos, stats = trajectory(gen, projector(PLUS), np.linspace(0, 5, 6))
    assert np.all(np.isfinite(rhos))
    assert stats.max_trace_drift < 1e-8
    assert max(np.abs(r - r.conj().T).max() for r in rhos) < 1e-10


def test_step_guard():
    gen = build_zero_T_generator(biased_qubit(1, 0), Lorentzian(0.5, 50.0), 4)
    with pytest.raises(StepSizeError) as exc:
        check_step(gen, 0.1)
    assert exc.value.suggested_dt < 0.1
    assert auto_dt(gen) * gen.max_decay < 0.5


def test_convergence_decoupled_is_immediate():
    J = Lorentzian(0.0, 0.5)
    m = biased_qubit(1, 0.3)
    L, _ = converge_in_depth(
        lambda L: build_zero_T_generator(m, J, L),
        lambda g: trajectory(g, projector(PLUS), [0.0, 3.0])[0],
        2,
        10,
        1e-10,
    )
    assert L == 2


def test_convergence_infinite_tolerance():
    J = Lorentzian(0.5, 0.05)
    m = biased_qubit(1, 0)
    L, _ = converge_in_depth(
        lambda L: build_zero_T_generator(m, J, L),
        lambda g: trajectory(g, projector(PLUS), [0.0, 3.0])[0],
        3,
        10,
        math.inf,
    )
    assert L == 3


def test_convergence_weak_coupling_is_shallow():
    J = Lorentzian(0.02, 0.1)
    m = biased_qubit(0.85, -0.255)
    L, _ = converge_in_depth(
        lambda L: build_zero_T_generator(m, J, L),
        lambda g: trajectory(g, projector(basis_state(2, 0)), np.linspace(0, 60, 31))[0],
        2,
        20,
        1e-4,
    )
    assert L <= 6


def test_convergence_failure_reports_delta():
    J = Lorentzian(0.5, 0.05)
    m = biased_qubit(1, 0)
    with pytest.raises(ConvergenceError) as exc:
        converge_in_depth(
            lambda L: build_zero_T_generator(m, J, L),
            lambda g: trajectory(g, projector(PLUS), np.linspace(0, 40, 5))[0],
            1,
            2,
            1e-8,
        )
    assert exc.value.last_delta > 1e-8
