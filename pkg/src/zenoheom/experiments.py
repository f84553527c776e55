"""Experiment drivers behind the command-line subcommands.

Each driver writes CSV files whose header embeds the full configuration
(``#``-prefixed lines), followed by a fixed column order with 12 significant
digits and an optional ``#`` footer. Output depends only on the configuration
and the build, never on wall-clock time or thread count.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bath import Lorentzian
from .config import serialize_config
from .errors import ConvergenceError
from .heom import converge_in_depth, trajectory
from .infoflow import flow_decomposition, trace_distance
from .linalg import expectation, orthogonal_complement_state, projector
from .models import spin_matrices
from .oracle import short_time_zeno_time
from .zeno import scan, zeno_time

FLOAT_FMT = "%.12g"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return FLOAT_FMT % v


def write_csv(path, command, cfg, columns, rows, footer=(), extra_header=()):
    """Write ``rows`` under a ``#`` header carrying ``cfg``; ``footer`` is a list of ``(key, value)``."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    lines = [f"# zenoheom {__version__} {command}"]
    lines += [f"# {ln}" if ln else "#" for ln in serialize_config(cfg).rstrip("\n").split("\n")]
    lines += [f"# {k} = {v}" for k, v in extra_header]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    lines += [f"# {k} = {v}" for k, v in footer]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Header/footer comments and the numeric table of a CSV written by :func:`write_csv`."""
    comments, columns, rows = [], None, []
    with open(path, encoding="utf-8") as fh:
        for ln in fh:
            ln = ln.rstrip("\n")
            if ln.startswith("#"):
                comments.append(ln[1:].strip())
            elif columns is None:
                columns = ln.split(",")
            elif ln:
                rows.append([float(x) if x else math.nan for x in ln.split(",")])
    return comments, columns, np.array(rows)


def _suffix(param, value):
    return "" if param is None else f"_{param}_{value:.6g}"


def _observables(model):
    """Expectation operator column name and matrix."""
    if model.dim == 2:
        return "sigma_z", model.coupling_f
    return "j_z", spin_matrices((model.dim - 1) / 2)[0]


def _converged_states(cfg, times, threads=1):
    """Reduced states on ``times`` at the smallest depth where they stop changing."""
    model = cfg.build_model()
    bath = cfg.build_bath()
    settings = cfg.solver_settings(threads)
    psi0 = cfg.initial_state()
    rho0 = projector(psi0)
    cache = {}

    def builder(L):
        return bath.generator(model, L, settings)

    def functional(gen):
        rhos, stats = trajectory(gen, rho0, times, dt=settings.dt, dt_cap=settings.dt_cap)
        cache[gen.L] = (rhos, stats)
        return rhos

    L, _ = converge_in_depth(builder, functional, settings.L_start, settings.L_max, settings.conv_tol)
    rhos, stats = cache[L]
    return model, psi0, L, rhos, stats


@dataclass
class RunResult:
    paths: list = field(default_factory=list)
    data: dict = field(default_factory=dict)


def run_dynamics(cfg, out_dir=None, threads=1):
    """Time series of the polarisation, coherence magnitudes, trace and distance to the orthogonal state."""
    out_dir = out_dir or cfg.output.directory
    times = cfg.time_grid()
    model, psi0, L, rhos, stats = _converged_states(cfg, times, threads)
    name, op = _observables(model)
    ref = projector(orthogonal_complement_state(psi0))
    d = model.dim
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    columns = ["t", name] + [f"abs_rho_{i}{j}" for i, j in pairs] + ["trace", "distance"]
    rows = []
    for t, r in zip(times, rhos):
        rows.append(
            [t, expectation(r, op).real]
            + [abs(r[i, j]) for i, j in pairs]
            + [np.trace(r).real, trace_distance(r, ref)]
        )
    path = write_csv(
        os.path.join(out_dir, "dynamics.csv"),
        "dynamics",
        cfg,
        columns,
        rows,
        footer=[("converged_L", L), ("dt", FLOAT_FMT % stats.dt)],
    )
    result = RunResult([path], {"times": times, "rhos": rhos, "L": L, "stats": stats, "rows": np.array(rows)})
    if cfg.output.emit_plots:
        from .plotting import plot_dynamics

        result.paths.append(plot_dynamics(times, np.array(rows)[:, 1], name, os.path.join(out_dir, "dynamics.svg")))
    return result


def _scan_footer(s):
    foot = [
        ("maxima_tau", " ".join(FLOAT_FMT % s.tau[i] for i in s.maxima)),
        ("minima_tau", " ".join(FLOAT_FMT % s.tau[i] for i in s.minima)),
    ]
    if s.zeno_fit is not None:
        z = s.zeno_fit
        foot += [
            ("zeno_time", FLOAT_FMT % z.tau_z),
            ("zeno_slope", FLOAT_FMT % z.slope),
            ("zeno_fit_residual", FLOAT_FMT % z.residual),
            ("zeno_fit_in_regime", "1" if z.in_regime else "0"),
        ]
    else:
        foot.append(("zeno_time", "none"))
    if "matsubara_epsilon" in s.provenance:
        foot.append(("matsubara_epsilon", s.provenance["matsubara_epsilon"]))
    return foot


def _one_scan(cfg, threads):
    return scan(
        cfg.build_model(),
        cfg.build_bath(),
        cfg.initial_state(),
        cfg.tau_grid(),
        cfg.solver_settings(threads),
        frame=cfg.scan.frame,
        fit_window=cfg.scan.fit_window,
        allow_unconverged=True,
    )


def run_zeno_scan(cfg, out_dir=None, threads=1):
    """One scan per sweep value; a summary of Zeno times when a sweep is configured.

    Unconverged points are written (flagged ``converged = 0``) before the
    convergence failure is raised.
    """
    out_dir = out_dir or cfg.output.directory
    result = RunResult(data={"scans": []})
    failure = None
    summary = []
    param = cfg.sweep.parameter
    for value, sub in cfg.sweep_configs():
        s = _one_scan(sub, threads)
        rows = zip(s.tau, s.survival, s.gamma, s.converged_L, s.converged)
        path = write_csv(
            os.path.join(out_dir, f"zeno_scan{_suffix(param, value)}.csv"),
            "zeno-scan",
            sub,
            ["tau", "survival", "gamma", "converged_L", "converged"],
            rows,
            footer=_scan_footer(s),
        )
        result.paths.append(path)
        result.data["scans"].append((value, s))
        if cfg.output.emit_plots:
            from .plotting import plot_scan

            result.paths.append(plot_scan(s, path[:-4] + ".svg"))
        z = s.zeno_fit
        summary.append(
            [value, None if z is None else z.tau_z, None if z is None else z.slope, len(s.maxima), len(s.minima)]
        )
        if failure is None and not np.all(s.converged):
            i = int(np.argmin(s.converged))
            failure = ConvergenceError(
                f"Gamma did not converge in hierarchy depth at tau = {s.tau[i]:.6g} (L_max = {sub.solver.L_max})",
                tau=float(s.tau[i]),
                partial=s,
            )
    if param:
        result.paths.append(
            write_csv(
                os.path.join(out_dir, "zeno_time_summary.csv"),
                "zeno-scan",
                cfg,
                [param, "zeno_time", "zeno_slope", "n_maxima", "n_minima"],
                summary,
            )
        )
    if failure is not None:
        failure.result = result
        raise failure
    return result


def run_zeno_time(cfg, out_dir=None, threads=1):
    """Fitted Zeno time per sweep value, with the short-time prediction where it applies."""
    out_dir = out_dir or cfg.output.directory
    rows = []
    param = cfg.sweep.parameter
    fits = []
    for value, sub in cfg.sweep_configs():
        s = _one_scan(sub, threads)
        if not np.all(s.converged):
            i = int(np.argmin(s.converged))
            raise ConvergenceError(f"no depth convergence at tau = {s.tau[i]:.6g}", tau=float(s.tau[i]), partial=s)
        fit = zeno_time(s, fit_window=min(sub.scan.fit_window, len(s.tau)))
        spec = sub.build_spectrum()
        predicted = None
        if isinstance(spec, Lorentzian) and spec.omega0 == 0 and spec.gamma0 > 0:
            predicted = short_time_zeno_time(spec)
        fits.append((value, fit))
        rows.append([value if value is not None else math.nan, fit.tau_z, fit.slope, fit.residual, fit.in_regime, predicted])
    path = write_csv(
        os.path.join(out_dir, "zeno_time.csv"),
        "zeno-time",
        cfg,
        [param or "value", "zeno_time", "zeno_slope", "fit_residual", "in_regime", "predicted_zeno_time"],
        rows,
    )
    return RunResult([path], {"fits": fits})


def run_infoflow(cfg, out_dir=None, threads=1):
    """Distance to the state orthogonal to the initial one and its loss/gain decomposition.

    The distance is taken in the measurement frame of the ``[scan]`` block,
    so the default removes the free rotation generated by ``H_s``.
    """
    out_dir = out_dir or cfg.output.directory
    times = cfg.time_grid()
    model, psi0, L, rhos, stats = _converged_states(cfg, times, threads)
    if cfg.scan.frame == "rotating":
        w, V = np.linalg.eigh(model.H_s)
        U = np.einsum("ij,tj,kj->tik", V, np.exp(-1j * np.multiply.outer(times, w)), V.conj())
        rhos = np.einsum("tji,tjk,tkl->til", U.conj(), rhos, U)
    ref = projector(orthogonal_complement_state(psi0))
    flow = flow_decomposition(times, rhos, ref)
    rows = zip(flow.times, flow.distance, flow.rate, flow.cum_loss, flow.cum_gain)
    path = write_csv(
        os.path.join(out_dir, "infoflow.csv"),
        "infoflow",
        cfg,
        ["t", "distance", "rate", "cum_loss", "cum_gain"],
        rows,
        footer=[
            ("info_loss", FLOAT_FMT % flow.info_loss),
            ("info_gain", FLOAT_FMT % flow.info_gain),
            ("identity_residual", FLOAT_FMT % flow.identity_residual),
            ("error_bound", FLOAT_FMT % flow.error_bound),
            ("converged_L", L),
        ],
    )
    result = RunResult([path], {"flow": flow, "L": L, "stats": stats})
    if cfg.output.emit_plots:
        from .plotting import plot_infoflow

        result.paths.append(plot_infoflow(flow, os.path.join(out_dir, "infoflow.svg")))
    return result
