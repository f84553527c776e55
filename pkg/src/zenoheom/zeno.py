"""Repeated projective measurements: survival probability, decay rate, Zeno time.

The bath returns to equilibrium after every measurement, so ``N`` intervals
of length ``tau`` survive with probability ``P(tau)**N`` and only one interval
is simulated. ``P`` is measured in the frame co-rotating with ``H_s``:
``P(tau) = <phi(tau)| rho_s(tau) |phi(tau)>`` with ``phi(tau) = exp(-i H_s tau) psi0``.

Every grid point shares the same initial state, so a single hierarchy run
sampled at all grid points yields the whole curve for a given depth ``L``.
Depth convergence is decided per point.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bath import Lorentzian, OhmicDrude
from .errors import ContractViolation, ConvergenceError, DomainError, IntegrityError, NoZenoRegimeError
from .heom import build_finite_T_generator, build_zero_T_generator, trajectory
from .heom.propagate import DEFAULT_DT_CAP
from .linalg import as_state_vector, projector
from .policy import DEFAULT_POLICY

FRAMES = ("rotating", "lab")


class ZenoRegimeWarning(UserWarning):
    """Leading grid points are not in the linear short-time regime of the rate."""


@dataclass(frozen=True)
class SolverSettings:
    dt: float = None
    dt_cap: float = DEFAULT_DT_CAP
    L_start: int = 2
    L_max: int = 40
    conv_tol: float = 1e-4
    matsubara_epsilon: object = "auto"
    terminator: bool = True
    link_pairing: str = "standard"
    threads: int = 1

    def __post_init__(self):
        if self.L_start < 1 or self.L_max < self.L_start:
            raise DomainError("need 1 <= L_start <= L_max")
        if not self.conv_tol > 0:
            raise DomainError("conv_tol must be > 0")
        if self.dt is not None and not self.dt > 0:
            raise DomainError("dt must be > 0")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")


@dataclass(frozen=True)
class Bath:
    """Spectrum plus temperature; Lorentzian at zero temperature or Drude at finite ``beta``."""

    spectrum: object
    beta: float = math.inf

    def __post_init__(self):
        if isinstance(self.spectrum, Lorentzian):
            if not math.isinf(self.beta):
                raise ContractViolation("a Lorentzian bath is only supported at zero temperature")
        elif isinstance(self.spectrum, OhmicDrude):
            if not (self.beta > 0 and math.isfinite(self.beta)):
                raise ContractViolation("an Ohmic-Drude bath needs a finite beta > 0")
        else:
            raise ContractViolation(f"unsupported spectrum {self.spectrum!r}")

    @property
    def zero_temperature(self):
        return math.isinf(self.beta)

    def generator(self, model, L, settings=SolverSettings(), policy=DEFAULT_POLICY):
        if self.zero_temperature:
            return build_zero_T_generator(model, self.spectrum, L, link_pairing=settings.link_pairing, policy=policy)
        return build_finite_T_generator(
            model,
            self.spectrum,
            self.beta,
            settings.matsubara_epsilon,
            L,
            terminator=settings.terminator,
            policy=policy,
        )


def effective_decay_rate(P, tau):
    """``-ln(P) / tau``."""
    if not tau > 0:
        raise DomainError("tau must be > 0")
    if not P > 0:
        raise DomainError(f"survival probability {P!r} is not positive; upstream integration failed")
    if P > 1:
        raise DomainError(f"survival probability {P!r} exceeds 1")
    return -math.log(P) / tau


def _reference_states(model, psi0, taus, frame):
    if frame == "lab":
        return np.broadcast_to(psi0, (len(taus), len(psi0)))
    w, V = np.linalg.eigh(model.H_s)
    c = V.conj().T @ psi0
    return (np.exp(-1j * np.multiply.outer(taus, w)) * c) @ V.T


def survival_curve(gen, psi0, taus, frame="rotating", dt=None, dt_cap=DEFAULT_DT_CAP, policy=DEFAULT_POLICY):
    """``P(tau)`` on a grid at the generator's fixed depth, plus trajectory statistics."""
    psi0 = as_state_vector(psi0, policy)
    taus = np.asarray(taus, dtype=float)
    rhos, stats = trajectory(gen, projector(psi0), taus, dt=dt, policy=policy, dt_cap=dt_cap)
    phis = _reference_states(gen.model, psi0, taus, frame)
    P = np.real(np.einsum("ti,tij,tj->t", phis.conj(), rhos, phis))
    slack = policy.survival_clamp_slack
    bad = (P < -slack) | (P > 1 + slack)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise IntegrityError(f"survival probability {P[i]!r} outside [0, 1] at tau = {taus[i]:.6g}")
    return np.clip(P, 0.0, 1.0), stats


def _rates(P, taus):
    with np.errstate(divide="ignore"):
        return -np.log(P) / taus


@dataclass
class ZenoTimeFit:
    tau_z: float
    slope: float
    residual: float
    window: int
    in_regime: bool


@dataclass
class ZenoScan:
    tau: np.ndarray
    survival: np.ndarray
    gamma: np.ndarray
    converged_L: np.ndarray
    converged: np.ndarray
    maxima: list = field(default_factory=list)
    minima: list = field(default_factory=list)
    zeno_fit: ZenoTimeFit = None
    provenance: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def zeno_time(self):
        return None if self.zeno_fit is None else self.zeno_fit.tau_z


def _check_grid(taus):
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.size == 0:
        raise DomainError("tau grid must be a non-empty 1-D sequence")
    if np.any(taus <= 0) or np.any(np.diff(taus) <= 0):
        raise DomainError("tau grid must be strictly increasing and positive")
    return taus


def _converge_per_point(eval_depth, taus, settings):
    """Per-point depth convergence over depths ``L_start-1 .. L_max``.

    ``eval_depth(L, upto)`` returns ``(P, stats)`` for grid points ``[:upto]``.
    Depths are evaluated in batches of ``settings.threads`` concurrently; the
    chosen depth for each point only depends on the sequence of values, so
    the outcome is independent of the batch size.
    """
    n = len(taus)
    tol = settings.conv_tol
    L0 = settings.L_start - 1
    P = {}
    stats = {}
    conv_L = np.full(n, -1, dtype=int)
    last_delta = np.full(n, np.inf)
    pool = ThreadPoolExecutor(settings.threads) if settings.threads > 1 else None

    def run_batch(depths, upto):
        if pool is None:
            return [eval_depth(L, upto) for L in depths]
        return list(pool.map(lambda L: eval_depth(L, upto), depths))

    try:
        L_next = L0
        upto = n
        while L_next <= settings.L_max:
            batch = list(range(L_next, min(L_next + settings.threads, settings.L_max + 1)))
            if L_next == L0 and len(batch) < 2 and L0 + 1 <= settings.L_max:
                batch = [L0, L0 + 1]
            for L, (p, st) in zip(batch, run_batch(batch, upto)):
                P[L], stats[L] = p, st
            L_next = batch[-1] + 1
            # decide in depth order so the choice is independent of batching
            for L in batch:
                if L - 1 not in P:
                    continue
                m = min(len(P[L]), len(P[L - 1]))
                g_now = _rates(P[L][:m], taus[:m])
                g_prev = _rates(P[L - 1][:m], taus[:m])
                with np.errstate(invalid="ignore"):
                    d = np.abs(g_now - g_prev)
                d = np.where(np.isnan(d), np.inf, d)
                open_ = conv_L[:m] < 0
                last_delta[:m][open_] = d[open_]
                hit = open_ & (d < tol)
                conv_L[:m][hit] = L
            pending = np.nonzero(conv_L < 0)[0]
            if pending.size == 0:
                break
            upto = int(pending[-1]) + 1
    finally:
        if pool is not None:
            pool.shutdown()
    return P, stats, conv_L, last_delta


def scan(
    model,
    bath,
    psi0,
    tau_grid,
    settings=SolverSettings(),
    frame="rotating",
    fit_window=5,
    policy=DEFAULT_POLICY,
    allow_unconverged=False,
):
    """Survival probability and decay rate on a grid with per-point depth convergence."""
    if frame not in FRAMES:
        raise DomainError(f"frame must be one of {FRAMES}")
    taus = _check_grid(tau_grid)
    psi0 = as_state_vector(psi0, policy)
    n = len(taus)
    cache = {}

    def generator(L):
        if L not in cache:
            cache[L] = bath.generator(model, L, settings, policy)
        return cache[L]

    def eval_depth(L, upto):
        return survival_curve(generator(L), psi0, taus[:upto], frame, settings.dt, settings.dt_cap, policy)

    P, stats, conv_L, last_delta = _converge_per_point(eval_depth, taus, settings)

    survival = np.empty(n)
    chosen = np.where(conv_L >= 0, conv_L, max(P))
    for i in range(n):
        L = int(chosen[i])
        while len(P[L]) <= i:
            L -= 1
        chosen[i] = L
        survival[i] = P[L][i]
    gamma = _rates(survival, taus)
    converged = conv_L >= 0
    used = sorted(set(int(c) for c in chosen) | {int(c) - 1 for c in chosen if c - 1 in stats})
    result = ZenoScan(
        tau=taus,
        survival=survival,
        gamma=gamma,
        converged_L=chosen.astype(int),
        converged=converged,
        provenance={
            "model": model.label,
            "model_params": dict(model.params),
            "bath": asdict(bath.spectrum) | {"kind": type(bath.spectrum).__name__},
            "beta": bath.beta,
            "settings": asdict(settings),
            "frame": frame,
        },
        stats={
            "max_trace_drift": max(stats[L].max_trace_drift for L in used),
            "max_hermitian_residual": max(stats[L].max_hermitian_residual for L in used),
            "min_eigenvalue": min(stats[L].min_eigenvalue for L in used),
            "dt": {L: stats[L].dt for L in used},
        },
    )
    if not bath.zero_temperature:
        result.provenance["matsubara_epsilon"] = len(generator(int(chosen[0])).decomposition) - 1
    if n >= 3:
        result.maxima, result.minima = detect_crossovers(result, policy)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ZenoRegimeWarning)
            result.zeno_fit = zeno_time(result, fit_window=min(fit_window, n), policy=policy)
    except (NoZenoRegimeError, DomainError):
        result.zeno_fit = None
    if not np.all(converged) and not allow_unconverged:
        i = int(np.argmin(converged))
        raise ConvergenceError(
            f"Gamma did not converge in hierarchy depth at tau = {taus[i]:.6g} "
            f"(last change {last_delta[i]:.3e}, L_max = {settings.L_max})",
            last_delta=float(last_delta[i]),
            tau=float(taus[i]),
            partial=result,
        )
    return result


def survival_probability(model, bath, psi0, tau, settings=SolverSettings(), frame="rotating", policy=DEFAULT_POLICY):
    """``P(tau)`` for a single measurement interval, converged in hierarchy depth."""
    if not tau > 0:
        raise DomainError("tau must be > 0")
    return float(scan(model, bath, psi0, [tau], settings, frame=frame, policy=policy).survival[0])


def zeno_time(scan_result, fit_window=5, policy=DEFAULT_POLICY):
    """Through-origin fit ``Gamma ~ a tau`` on the leading points; ``tau_Z = a**-1/2``."""
    if int(fit_window) < 2:
        raise DomainError("fit_window must be >= 2")
    k = int(fit_window)
    tau = np.asarray(scan_result.tau, dtype=float)[:k]
    g = np.asarray(scan_result.gamma, dtype=float)[:k]
    if len(tau) < k:
        raise DomainError(f"scan has fewer than {k} points")
    a = float(tau @ g / (tau @ tau))
    if not a > policy.rate_zero_atol:
        raise NoZenoRegimeError(f"short-time slope {a:.3e} is not positive")
    resid = float(np.linalg.norm(g - a * tau) / max(np.linalg.norm(g), 1e-300))
    ok = resid <= policy.zeno_fit_residual
    if not ok:
        warnings.warn(
            f"leading rates deviate from a line through the origin (relative residual {resid:.3f})",
            ZenoRegimeWarning,
            stacklevel=2,
        )
    return ZenoTimeFit(tau_z=a**-0.5, slope=a, residual=resid, window=k, in_regime=ok)


def detect_crossovers(scan_result, policy=DEFAULT_POLICY):
    """Interior local maxima and minima of ``Gamma``.

    Strict comparison on the left and non-strict on the right, so a plateau
    is reported once at its left edge. Points below ``policy.crossover_floor``
    are ignored.
    """
    g = np.asarray(scan_result.gamma, dtype=float)
    if len(g) < 3:
        raise DomainError("need at least 3 points to detect extrema")
    floor = policy.crossover_floor
    maxima, minima = [], []
    for i in range(1, len(g) - 1):
        if g[i] < floor:
            continue
        if g[i] > g[i - 1] and g[i] >= g[i + 1]:
            maxima.append(i)
        elif g[i] < g[i - 1] and g[i] <= g[i + 1]:
            minima.append(i)
    return maxima, minima
