"""Command-line entry point: ``zenoheom <subcommand> --config PATH``.

Exit codes: 0 success, 1 other solver failure, 2 configuration error,
3 convergence failure, 4 verification failure.
"""

import argparse
import logging
import os
import sys

from . import __version__
from .config import load_config, parse_config
from .errors import ConfigError, ConvergenceError, ZenoHeomError
from .experiments import run_dynamics, run_infoflow, run_zeno_scan, run_zeno_time
from .kernel import BACKEND

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_VERIFY = 4

log = logging.getLogger("zenoheom")

RUNNERS = {
    "dynamics": run_dynamics,
    "zeno-scan": run_zeno_scan,
    "zeno-time": run_zeno_time,
    "infoflow": run_infoflow,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="experiment configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] directory)")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads (default 1)")
    common.add_argument("--seed", type=int, default=None, help="reserved; every computation is deterministic")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="zenoheom", description="Zeno and anti-Zeno decay rates from hierarchical equations of motion.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernel)")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("dynamics", "time series of populations, coherences and trace"),
        ("zeno-scan", "effective decay rate versus measurement interval"),
        ("zeno-time", "fitted Zeno time per sweep value"),
        ("infoflow", "trace-distance information loss and gain"),
    ):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(config_required=True)
    vp = sub.add_parser("verify", parents=[common], help="run the acceptance checks and write a JSON report")
    vp.add_argument("--criteria", default="all", help="comma-separated check ids, 'all' (default) or 'none' to check only --config")
    vp.add_argument("--report", metavar="PATH", help="JSON report path (default OUT/verify_report.json)")
    vp.set_defaults(config_required=False)
    return p


def _run_experiment(args):
    cfg = load_config(args.config)
    result = RUNNERS[args.command](cfg, out_dir=args.out, threads=args.threads)
    for path in result.paths:
        print(path)


def _run_verify(args):
    from .verify import run_verify

    text = None
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        parse_config(text)
    if args.criteria == "all":
        ids = None
    elif args.criteria == "none":
        ids = []
    else:
        ids = [c.strip() for c in args.criteria.split(",") if c.strip()]
    report = args.report or os.path.join(args.out or "out", "verify_report.json")
    passed, results = run_verify(text, ids=ids, threads=args.threads, report_path=report)
    for r in results:
        line = f"{'PASS' if r.passed else 'FAIL'}  {r.id:>8}  {r.title}"
        if r.detail:
            line += f"  [{r.detail}]"
        print(line)
    print(report)
    return EXIT_OK if passed else EXIT_VERIFY


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.config_required and not args.config:
        print(f"error: {args.command} requires --config", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "verify":
            return _run_verify(args)
        _run_experiment(args)
    except ConfigError as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ZenoHeomError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
