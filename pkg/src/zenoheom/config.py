"""Experiment configuration: INI-style text to validated, immutable records.

Sections and keys::

    [model]    kind = qubit | qutrit, epsilon, delta, initial_state
    [bath]     kind = lorentzian | ohmic_drude
               gamma0, lambda, omega0          (lorentzian, beta = zero)
               chi, omega_c, beta              (ohmic_drude, beta > 0)
    [solver]   dt = auto | value, dt_cap, L_start, L_max, conv_tol,
               matsubara_epsilon = auto | integer, terminator, link_pairing
    [scan]     tau_min, tau_max, points, spacing = linear | log,
               frame = rotating | lab, fit_window
    [sweep]    parameter, values = v1, v2, ...
    [dynamics] t_final, points
    [output]   directory, emit_plots

Every problem found is reported at once through :class:`ConfigError`.
"""

import configparser
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .bath import Lorentzian, OhmicDrude
from .errors import ConfigError, ZenoHeomError
from .heom.generator import LINK_PAIRINGS
from .models import biased_qubit, biased_qutrit, parse_initial_state
from .zeno import FRAMES, Bath, SolverSettings

MODEL_KINDS = ("qubit", "qutrit")
BATH_KINDS = ("lorentzian", "ohmic_drude")
SPACINGS = ("linear", "log")
SWEEPABLE = ("epsilon", "delta", "gamma0", "lambda", "omega0", "chi", "omega_c", "beta")


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "qubit"
    epsilon: float = 1.0
    delta: float = 0.0
    initial_state: str = "plus"


@dataclass(frozen=True)
class BathConfig:
    kind: str = "lorentzian"
    gamma0: float = None
    lam: float = None
    omega0: float = 0.0
    chi: float = None
    omega_c: float = None
    beta: float = math.inf


@dataclass(frozen=True)
class SolverConfig:
    dt: float = None
    dt_cap: float = 0.02
    L_start: int = 2
    L_max: int = 40
    conv_tol: float = 1e-4
    matsubara_epsilon: object = "auto"
    terminator: bool = True
    link_pairing: str = "standard"


@dataclass(frozen=True)
class ScanConfig:
    tau_min: float = None
    tau_max: float = 40.0
    points: int = 50
    spacing: str = "linear"
    frame: str = "rotating"
    fit_window: int = 5


@dataclass(frozen=True)
class SweepConfig:
    parameter: str = None
    values: tuple = ()


@dataclass(frozen=True)
class DynamicsConfig:
    t_final: float = 40.0
    points: int = 401


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    emit_plots: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    bath: BathConfig = field(default_factory=BathConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    # -- builders ------------------------------------------------------------
    def build_model(self):
        m = self.model
        return (biased_qubit if m.kind == "qubit" else biased_qutrit)(m.epsilon, m.delta)

    def build_spectrum(self):
        b = self.bath
        if b.kind == "lorentzian":
            return Lorentzian(b.gamma0, b.lam, b.omega0)
        return OhmicDrude(b.chi, b.omega_c)

    def build_bath(self):
        return Bath(self.build_spectrum(), self.bath.beta)

    def initial_state(self):
        return parse_initial_state(self.model.initial_state, 2 if self.model.kind == "qubit" else 3)

    def solver_settings(self, threads=1):
        s = self.solver
        return SolverSettings(
            dt=s.dt,
            dt_cap=s.dt_cap,
            L_start=s.L_start,
            L_max=s.L_max,
            conv_tol=s.conv_tol,
            matsubara_epsilon=s.matsubara_epsilon,
            terminator=s.terminator,
            link_pairing=s.link_pairing,
            threads=threads,
        )

    def effective_tau_min(self):
        if self.scan.tau_min is not None:
            return self.scan.tau_min
        b = self.bath
        width = b.lam if b.kind == "lorentzian" else b.omega_c
        return 0.02 / max(abs(self.model.epsilon), abs(self.model.delta), width)

    def tau_grid(self):
        s = self.scan
        lo = self.effective_tau_min()
        if s.spacing == "log":
            return np.geomspace(lo, s.tau_max, s.points)
        return np.linspace(lo, s.tau_max, s.points)

    def time_grid(self):
        return np.linspace(0.0, self.dynamics.t_final, self.dynamics.points)

    def with_parameter(self, name, value):
        """Copy with one model or bath parameter replaced (sweep support)."""
        if name in ("epsilon", "delta"):
            return dataclasses.replace(self, model=dataclasses.replace(self.model, **{name: value}))
        key = "lam" if name == "lambda" else name
        return dataclasses.replace(self, bath=dataclasses.replace(self.bath, **{key: value}))

    def sweep_configs(self):
        if not self.sweep.parameter:
            return [(None, self)]
        return [(v, self.with_parameter(self.sweep.parameter, v)) for v in self.sweep.values]


# -- parsing -----------------------------------------------------------------

_KEYS = {
    "model": {"kind", "epsilon", "delta", "initial_state"},
    "bath": {"kind", "gamma0", "lambda", "omega0", "chi", "omega_c", "beta"},
    "solver": {"dt", "dt_cap", "l_start", "l_max", "conv_tol", "matsubara_epsilon", "terminator", "link_pairing"},
    "scan": {"tau_min", "tau_max", "points", "spacing", "frame", "fit_window"},
    "sweep": {"parameter", "values"},
    "dynamics": {"t_final", "points"},
    "output": {"directory", "emit_plots"},
}


class _Reader:
    def __init__(self, cp, problems):
        self.cp = cp
        self.problems = problems

    def raw(self, sec, key):
        if self.cp.has_section(sec) and self.cp.has_option(sec, key):
            return self.cp.get(sec, key).strip()
        return None

    def number(self, sec, key, default, positive=False, nonneg=False, allow=()):
        s = self.raw(sec, key)
        if s is None:
            return default
        if s.lower() in allow:
            return s.lower()
        try:
            v = float(s)
        except ValueError:
            self.problems.append(f"[{sec}] {key} = {s!r} is not a number")
            return default
        if not math.isfinite(v):
            self.problems.append(f"[{sec}] {key} must be finite")
        elif positive and not v > 0:
            self.problems.append(f"[{sec}] {key} must be > 0, got {v!r}")
        elif nonneg and v < 0:
            self.problems.append(f"[{sec}] {key} must be >= 0, got {v!r}")
        return v

    def integer(self, sec, key, default, minimum=None, allow=()):
        s = self.raw(sec, key)
        if s is None:
            return default
        if s.lower() in allow:
            return s.lower()
        try:
            v = int(s)
        except ValueError:
            self.problems.append(f"[{sec}] {key} = {s!r} is not an integer")
            return default
        if minimum is not None and v < minimum:
            self.problems.append(f"[{sec}] {key} must be >= {minimum}, got {v}")
        return v

    def choice(self, sec, key, default, options):
        s = self.raw(sec, key)
        if s is None:
            return default
        s = s.lower()
        if s not in options:
            self.problems.append(f"[{sec}] {key} = {s!r} is not one of {', '.join(options)}")
            return default
        return s

    def boolean(self, sec, key, default):
        s = self.raw(sec, key)
        if s is None:
            return default
        try:
            return self.cp.getboolean(sec, key)
        except ValueError:
            self.problems.append(f"[{sec}] {key} = {s!r} is not a boolean")
            return default


def parse_config(text):
    """Parse and validate configuration text; raises :class:`ConfigError` listing every problem."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"malformed configuration: {exc}"]) from exc
    problems = []
    for sec in cp.sections():
        if sec not in _KEYS:
            problems.append(f"unknown section [{sec}]")
            continue
        for key in cp.options(sec):
            if key not in _KEYS[sec]:
                problems.append(f"unknown key {key!r} in [{sec}]")
    r = _Reader(cp, problems)

    model = ModelConfig(
        kind=r.choice("model", "kind", "qubit", MODEL_KINDS),
        epsilon=r.number("model", "epsilon", 1.0),
        delta=r.number("model", "delta", 0.0),
        initial_state=r.raw("model", "initial_state") or "plus",
    )

    kind = r.choice("bath", "kind", "lorentzian", BATH_KINDS)
    beta_raw = r.raw("bath", "beta")
    if kind == "lorentzian":
        for key in ("chi", "omega_c"):
            if r.raw("bath", key) is not None:
                problems.append(f"[bath] {key} does not apply to a lorentzian bath")
        if beta_raw is not None and beta_raw.lower() != "zero":
            problems.append("[bath] a lorentzian bath is paired with zero temperature only (beta = zero)")
        bath = BathConfig(
            kind=kind,
            gamma0=r.number("bath", "gamma0", None, nonneg=True),
            lam=r.number("bath", "lambda", None, positive=True),
            omega0=r.number("bath", "omega0", 0.0),
        )
        for key, val in (("gamma0", bath.gamma0), ("lambda", bath.lam)):
            if val is None:
                problems.append(f"[bath] {key} is required for a lorentzian bath")
    else:
        for key in ("gamma0", "lambda", "omega0"):
            if r.raw("bath", key) is not None:
                problems.append(f"[bath] {key} does not apply to an ohmic_drude bath")
        beta = None
        if beta_raw is None:
            problems.append("[bath] beta is required for an ohmic_drude bath")
        elif beta_raw.lower() == "zero":
            problems.append("[bath] beta = zero is only paired with a lorentzian bath; ohmic_drude needs beta > 0")
        else:
            beta = r.number("bath", "beta", None, positive=True)
        bath = BathConfig(
            kind=kind,
            chi=r.number("bath", "chi", None, nonneg=True),
            omega_c=r.number("bath", "omega_c", None, positive=True),
            beta=beta if beta is not None else 1.0,
        )
        for key, val in (("chi", bath.chi), ("omega_c", bath.omega_c)):
            if val is None:
                problems.append(f"[bath] {key} is required for an ohmic_drude bath")

    eps = r.integer("solver", "matsubara_epsilon", "auto", minimum=0, allow=("auto",))
    dt = r.number("solver", "dt", None, positive=True, allow=("auto",))
    L_max = r.integer("solver", "l_max", 40, minimum=1)
    # an implicit L_start follows a small explicit L_max
    L_start_default = min(2, L_max) if isinstance(L_max, int) and L_max >= 1 else 2
    solver = SolverConfig(
        dt=None if dt == "auto" else dt,
        dt_cap=r.number("solver", "dt_cap", 0.02, positive=True),
        L_start=r.integer("solver", "l_start", L_start_default, minimum=1),
        L_max=L_max,
        conv_tol=r.number("solver", "conv_tol", 1e-4, positive=True),
        matsubara_epsilon=eps,
        terminator=r.boolean("solver", "terminator", True),
        link_pairing=r.choice("solver", "link_pairing", "standard", LINK_PAIRINGS),
    )
    if isinstance(solver.L_start, int) and isinstance(solver.L_max, int) and solver.L_max < solver.L_start:
        problems.append(f"[solver] L_max ({solver.L_max}) must be >= L_start ({solver.L_start})")

    scan = ScanConfig(
        tau_min=r.number("scan", "tau_min", None, positive=True),
        tau_max=r.number("scan", "tau_max", 40.0, positive=True),
        points=r.integer("scan", "points", 50, minimum=1),
        spacing=r.choice("scan", "spacing", "linear", SPACINGS),
        frame=r.choice("scan", "frame", "rotating", FRAMES),
        fit_window=r.integer("scan", "fit_window", 5, minimum=2),
    )
    if scan.tau_min is not None and scan.tau_max is not None and scan.tau_max <= scan.tau_min:
        problems.append("[scan] tau_max must exceed tau_min")

    param = r.raw("sweep", "parameter")
    values_raw = r.raw("sweep", "values")
    values = ()
    if param is not None and param not in SWEEPABLE:
        problems.append(f"[sweep] parameter {param!r} is not one of {', '.join(SWEEPABLE)}")
    if values_raw:
        try:
            values = tuple(float(v) for v in values_raw.split(",") if v.strip())
        except ValueError:
            problems.append(f"[sweep] values {values_raw!r} must be a comma-separated list of numbers")
    if param and not values:
        problems.append("[sweep] values must list at least one value")
    if values and not param:
        problems.append("[sweep] values given without a parameter")
    sweep = SweepConfig(parameter=param or None, values=values)

    dynamics = DynamicsConfig(
        t_final=r.number("dynamics", "t_final", 40.0, positive=True),
        points=r.integer("dynamics", "points", 401, minimum=3),
    )
    output = OutputConfig(
        directory=r.raw("output", "directory") or "out",
        emit_plots=r.boolean("output", "emit_plots", False),
    )
    cfg = ExperimentConfig(model, bath, solver, scan, sweep, dynamics, output)

    if not problems:
        # physical invariants enforced by the builders themselves
        try:
            cfg.build_model()
            cfg.build_bath()
            cfg.initial_state()
        except ZenoHeomError as exc:
            problems.append(str(exc))
    if not problems and sweep.parameter:
        for v in sweep.values:
            try:
                c = cfg.with_parameter(sweep.parameter, v)
                c.build_model()
                c.build_bath()
            except (ZenoHeomError, TypeError) as exc:
                problems.append(f"[sweep] {sweep.parameter} = {v!r}: {exc}")
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg):
    """Canonical text for ``cfg``; parsing it reproduces ``cfg`` exactly."""
    m, b, s, sc, sw, dy, o = cfg.model, cfg.bath, cfg.solver, cfg.scan, cfg.sweep, cfg.dynamics, cfg.output
    lines = ["[model]", f"kind = {m.kind}", f"epsilon = {_fmt(m.epsilon)}", f"delta = {_fmt(m.delta)}",
             f"initial_state = {m.initial_state}", "", "[bath]", f"kind = {b.kind}"]
    if b.kind == "lorentzian":
        lines += [f"gamma0 = {_fmt(b.gamma0)}", f"lambda = {_fmt(b.lam)}", f"omega0 = {_fmt(b.omega0)}", "beta = zero"]
    else:
        lines += [f"chi = {_fmt(b.chi)}", f"omega_c = {_fmt(b.omega_c)}", f"beta = {_fmt(b.beta)}"]
    lines += [
        "",
        "[solver]",
        f"dt = {'auto' if s.dt is None else _fmt(s.dt)}",
        f"dt_cap = {_fmt(s.dt_cap)}",
        f"L_start = {s.L_start}",
        f"L_max = {s.L_max}",
        f"conv_tol = {_fmt(s.conv_tol)}",
        f"matsubara_epsilon = {s.matsubara_epsilon}",
        f"terminator = {_fmt(s.terminator)}",
        f"link_pairing = {s.link_pairing}",
        "",
        "[scan]",
    ]
    if sc.tau_min is not None:
        lines.append(f"tau_min = {_fmt(sc.tau_min)}")
    lines += [
        f"tau_max = {_fmt(sc.tau_max)}",
        f"points = {sc.points}",
        f"spacing = {sc.spacing}",
        f"frame = {sc.frame}",
        f"fit_window = {sc.fit_window}",
        "",
    ]
    if sw.parameter:
        lines += ["[sweep]", f"parameter = {sw.parameter}", "values = " + ", ".join(_fmt(v) for v in sw.values), ""]
    lines += [
        "[dynamics]",
        f"t_final = {_fmt(dy.t_final)}",
        f"points = {dy.points}",
        "",
        "[output]",
        f"directory = {o.directory}",
        f"emit_plots = {_fmt(o.emit_plots)}",
        "",
    ]
    return "\n".join(lines)
