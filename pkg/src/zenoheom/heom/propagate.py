"""Fixed-step RK4 integration of the hierarchy and depth-convergence control."""

import math
from dataclasses import dataclass

import numpy as np

from .. import kernel
from ..errors import ConvergenceError, DivergenceError, DomainError, IntegrityError, StepSizeError
from ..linalg import as_density_matrix, hermitize, hermiticity_residual
from ..policy import DEFAULT_POLICY

# RK4 keeps |1 + z + ... + z^4/24| <= 1 for |z| up to ~2.6 near the imaginary axis
STABILITY_GUARD = 0.5
DEFAULT_DT_CAP = 0.02


@dataclass
class HierarchyState:
    """ADO stack stored as an ``(N, d*d)`` array; row 0 is the physical state."""

    x: np.ndarray
    t: float
    dim: int

    @classmethod
    def initial(cls, gen, rho0, policy=DEFAULT_POLICY):
        rho0 = as_density_matrix(rho0, policy)
        if rho0.shape[0] != gen.dim:
            raise DomainError(f"initial state has dimension {rho0.shape[0]}, model has {gen.dim}")
        x = np.zeros((len(gen.layout), gen.dim * gen.dim), dtype=complex)
        x[0] = rho0.ravel()
        return cls(x=x, t=0.0, dim=gen.dim)

    @property
    def ados(self):
        return self.x.reshape(-1, self.dim, self.dim)

    def copy(self):
        return HierarchyState(self.x.copy(), self.t, self.dim)


@dataclass
class TrajectoryStats:
    dt: float
    halvings: int
    max_trace_drift: float
    max_hermitian_residual: float
    min_eigenvalue: float


def check_step(gen, dt):
    if not dt > 0:
        raise StepSizeError("dt must be > 0", suggested_dt=None)
    r = gen.max_decay
    if dt * r >= STABILITY_GUARD:
        raise StepSizeError(
            f"dt = {dt:.3g} violates the stability guard dt*max|l.nu| < {STABILITY_GUARD} (max rate {r:.3g})",
            suggested_dt=0.9 * STABILITY_GUARD / r,
        )


def auto_dt(gen, dt_cap=DEFAULT_DT_CAP):
    """Step small enough for the guard and for RK4 stability on the generator's norm bound."""
    dt = dt_cap
    bound = gen.row_bound()
    if bound > 0:
        dt = min(dt, 2.0 / bound)
    if gen.max_decay > 0:
        dt = min(dt, 0.9 * STABILITY_GUARD / gen.max_decay)
    return dt


def _advance(gen, x, span, dt, args):
    """Integrate ``x`` in place over ``span``: whole steps, then one shortened step."""
    n = int(math.floor(span / dt * (1 + 1e-12)))
    if n:
        kernel.rk4_steps(x, *args, dt, n)
    rest = span - n * dt
    if rest > 1e-12 * max(span, dt):
        kernel.rk4_steps(x, *args, rest, 1)


def evolve(gen, state, t_final, dt, policy=DEFAULT_POLICY):
    """Return a new state advanced to ``t_final``."""
    check_step(gen, dt)
    if t_final < state.t:
        raise DomainError("t_final precedes the current time")
    out = state.copy()
    tr0 = _trace(out.x[0], out.dim)
    _advance(gen, out.x, t_final - state.t, dt, gen.kernel_args())
    out.t = float(t_final)
    if not np.all(np.isfinite(out.x)):
        raise DivergenceError(f"non-finite ADO entries by t = {t_final:.6g}", time=t_final)
    drift = abs(_trace(out.x[0], out.dim) - tr0)
    if drift > policy.trace_drift_atol:
        raise IntegrityError(f"trace drifted by {drift:.3e}")
    return out


def _trace(row, d):
    return row.reshape(d, d).trace()


def reduced_state(state, policy=DEFAULT_POLICY):
    """Physical density matrix, Hermitised and renormalised after a trace check."""
    rho = state.x[0].reshape(state.dim, state.dim)
    tr = np.trace(rho)
    if abs(tr - 1.0) > policy.trace_drift_atol:
        raise IntegrityError(f"trace drift {abs(tr - 1.0):.3e} exceeds {policy.trace_drift_atol:.1e}")
    rho = hermitize(rho)
    return rho / rho.trace().real


def _run(gen, rho0, times, dt, policy):
    state = HierarchyState.initial(gen, rho0, policy)
    x, d = state.x, state.dim
    args = gen.kernel_args()
    out = np.empty((len(times), d, d), dtype=complex)
    t = 0.0
    for i, tt in enumerate(times):
        _advance(gen, x, tt - t, dt, args)
        t = tt
        r = x[0]
        if not np.all(np.isfinite(r)) or np.max(np.abs(r)) > 1.001:
            raise DivergenceError(f"reduced state left the physical range near t = {tt:.6g}", time=tt)
        out[i] = r.reshape(d, d)
    if not np.all(np.isfinite(x)):
        raise DivergenceError("non-finite auxiliary entries", time=t)
    return out


def trajectory(gen, rho0, times, dt=None, policy=DEFAULT_POLICY, dt_cap=DEFAULT_DT_CAP):
    """Physical state at each of ``times`` (non-decreasing, ``>= 0``) from one integration.

    On divergence or trace drift the step is halved and the whole run
    repeated, at most ``policy.max_step_halvings`` times. Returned matrices are
    raw (not Hermitised); ``TrajectoryStats`` carries the integrity figures.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise DomainError("times must be a non-decreasing sequence of non-negative values")
    dt = auto_dt(gen, dt_cap) if dt is None else float(dt)
    check_step(gen, dt)
    last = None
    for halving in range(policy.max_step_halvings + 1):
        try:
            rhos = _run(gen, rho0, times, dt, policy)
            tr = np.einsum("tii->t", rhos)
            drift = float(np.max(np.abs(tr - 1.0))) if len(times) else 0.0
            if drift > policy.trace_drift_atol:
                raise IntegrityError(f"trace drift {drift:.3e}")
            herm = max((hermiticity_residual(r) for r in rhos), default=0.0)
            mineig = min((float(np.linalg.eigvalsh(hermitize(r)).min()) for r in rhos), default=1.0)
            return rhos, TrajectoryStats(dt, halving, drift, herm, mineig)
        except (DivergenceError, IntegrityError) as exc:
            last = exc
            dt *= 0.5
    raise last


def converge_in_depth(builder, functional, L_start, L_max, tol):
    """Deepen the hierarchy until the observable stops changing.

    ``builder(L)`` returns a generator and ``functional(gen)`` a scalar or
    array. Returns the smallest ``L >= L_start`` with
    ``max|value(L) - value(L-1)| < tol`` together with ``value(L)``.
    """
    if L_start < 1:
        raise DomainError("L_start must be >= 1")
    if not tol > 0:
        raise DomainError("tol must be > 0")
    if L_max < L_start:
        raise DomainError("L_max must be >= L_start")
    prev = np.asarray(functional(builder(L_start - 1)))
    delta = math.inf
    for L in range(L_start, L_max + 1):
        val = np.asarray(functional(builder(L)))
        delta = float(np.max(np.abs(val - prev))) if val.size else 0.0
        if delta < tol:
            return L, (val.item() if val.ndim == 0 else val)
        prev = val
    raise ConvergenceError(
        f"no convergence up to L = {L_max}: last change {delta:.3e} >= {tol:.1e}",
        last_delta=delta,
        partial=prev.item() if prev.ndim == 0 else prev,
    )
