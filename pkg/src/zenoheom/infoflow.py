"""Trace-distance diagnostics of information exchange with the bath.

The distance between the evolving state and the state orthogonal to the
initial one starts at 1. Its rate of change splits into a loss part (rate
negative, information flows to the bath) and a gain part (rate positive,
information flows back), and ``D(T) = D(0) - loss + gain``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ContractViolation, DomainError
from .linalg import _same_dim, hermitize

RATE_ZERO = 1e-12


def trace_distance(rho, sigma):
    """``(1/2) sum |eig(rho - sigma)|`` for Hermitian ``rho``, ``sigma``."""
    rho, sigma = _same_dim(rho, sigma)
    w = np.linalg.eigvalsh(hermitize(rho - sigma))
    return float(0.5 * np.sum(np.abs(w)))


def two_level_distance_formula(c11, c12):
    """Distance from ``[[c11, c12], [c12*, 1 - c11]]`` to the projector on the second basis state.

    The difference ``[[c11, c12], [c12*, -c11]]`` has eigenvalues
    ``+-sqrt(c11**2 + |c12|**2)``.
    """
    c11 = float(c11)
    if not 0.0 <= c11 <= 1.0:
        raise DomainError(f"c11 must lie in [0, 1], got {c11!r}")
    s = c11 * c11 + abs(complex(c12)) ** 2
    if s > 1.0 + 1e-9:
        raise DomainError(f"c11**2 + |c12|**2 = {s!r} exceeds 1")
    return float(np.sqrt(s))


@dataclass
class FlowTrajectory:
    times: np.ndarray
    distance: np.ndarray
    rate: np.ndarray
    cum_loss: np.ndarray
    cum_gain: np.ndarray
    identity_residual: float
    error_bound: float

    @property
    def info_loss(self):
        return float(self.cum_loss[-1])

    @property
    def info_gain(self):
        return float(self.cum_gain[-1])


def flow_decomposition(times, states, reference, rate_zero=RATE_ZERO):
    """Distance to ``reference`` along a uniformly sampled trajectory and its loss/gain split.

    ``rate`` uses centred differences with second-order one-sided stencils at
    the ends; loss and gain are trapezoid integrals of its negative and
    positive parts. ``error_bound`` is ``2 dt max|d rate/dt|``.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=complex)
    if times.ndim != 1 or len(times) < 3:
        raise DomainError("need at least 3 time points")
    if states.shape[0] != len(times):
        raise ContractViolation("one state per time point required")
    steps = np.diff(times)
    dt = float(steps.mean())
    if not dt > 0 or np.max(np.abs(steps - dt)) > 1e-9 * max(1.0, abs(times[-1])):
        raise DomainError("time grid must be uniform and increasing")
    D = np.array([trace_distance(s, reference) for s in states])
    rate = np.gradient(D, dt, edge_order=2)
    rate = np.where(np.abs(rate) < rate_zero, 0.0, rate)
    cum_gain = cumulative_trapezoid(np.maximum(rate, 0.0), dx=dt, initial=0.0)
    cum_loss = cumulative_trapezoid(np.maximum(-rate, 0.0), dx=dt, initial=0.0)
    resid = float(D[-1] - (D[0] - cum_loss[-1] + cum_gain[-1]))
    bound = float(2 * dt * np.max(np.abs(np.gradient(rate, dt))))
    return FlowTrajectory(times, D, rate, cum_loss, cum_gain, resid, bound)
