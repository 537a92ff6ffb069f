"""Command-line front end: theory, converge, and sweep subcommands.

Configuration comes from an optional JSON file (--config) with every
field overridable by a flag.  Output is UTF-8 CSV with a header row,
written to --out or stdout; floats carry 17 significant digits so runs
are reproducible bit-for-bit.  Exit codes: 0 success, 2 on a config
parse/validation error, 3 when --strict is set and the configuration
fails the feasibility checks.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from .config import ConfigError, RunConfig
from .runner import (
    CONVERGE_COLUMNS,
    SWEEP_AXES,
    SWEEP_COLUMNS,
    converge_rows,
    resolved_eta,
    run_experiment,
    sweep_rows,
)
from .theory import constants, feasibility

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

_THEORY_FIELDS = (
    "n",
    "f",
    "h",
    "b",
    "mu",
    "L",
    "sigma",
    "r",
    "k_h",
    "k_n",
    "k_star",
    "alpha_h",
    "beta",
    "gamma",
    "eta_max",
    "rho_min",
    "r_max_general",
    "r_max_strict",
    "p",
    "C",
)


def _add_config_flags(parser):
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument("--n", type=int, help="number of workers")
    parser.add_argument("--f", type=int, help="fault tolerance (max Byzantine workers)")
    parser.add_argument("--d", type=int, help="gradient dimension")
    parser.add_argument("--mu", type=float, help="strong convexity constant")
    parser.add_argument("--L", type=float, help="Lipschitz smoothness constant")
    parser.add_argument("--sigma", type=float, help="relative gradient noise bound")
    parser.add_argument("--r", type=float, help="deviation ratio")
    parser.add_argument("--eta", type=float, help="step size (default: beta/gamma)")
    parser.add_argument("--rounds", type=int, help="rounds per replica")
    parser.add_argument("--seed", type=int, help="base seed")
    parser.add_argument("--replicas", type=int, help="independent replicas")
    parser.add_argument("--adversary", help="adversary kind")
    parser.add_argument("--adversary-scale", type=float, dest="adversary_scale")
    parser.add_argument(
        "--byzantine-slots",
        dest="byzantine_slots",
        metavar="IDS",
        help="comma-separated worker IDs controlled by the adversary",
    )
    parser.add_argument(
        "--spectrum",
        dest="hessian_spectrum_mode",
        help="hessian spectrum mode: isotropic, two_point, or linear",
    )
    parser.add_argument("--strict", action="store_true", help="refuse infeasible configs")
    parser.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")


def _load_config(args):
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {}
    for name in RunConfig.field_names():
        value = getattr(args, name, None)
        if value is None:
            continue
        if name == "byzantine_slots":
            try:
                value = tuple(int(s) for s in str(value).split(",") if s.strip())
            except ValueError as exc:
                raise ConfigError(f"bad --byzantine-slots: {exc}") from exc
        overrides[name] = value
    return cfg.replace(**overrides) if overrides else cfg


def _feasibility_gate(config, strict):
    """Returns the report; under --strict an infeasible config is fatal."""
    try:
        eta = resolved_eta(config)
    except ConfigError:
        eta = math.nan
    report = feasibility(config.n, config.f, config.mu, config.L, config.sigma, config.r, eta)
    if not report.ok:
        failed = ", ".join(report.failed())
        if strict:
            print(f"error: infeasible configuration (failed: {failed})", file=sys.stderr)
        else:
            print(f"warning: infeasible configuration (failed: {failed})", file=sys.stderr)
    return report


def _write_csv(path, header, rows):
    out = open(path, "w", encoding="utf-8", newline="") if path else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if path:
            out.close()


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def cmd_theory(args):
    config = _load_config(args)
    report = _feasibility_gate(config, args.strict)
    consts = constants(config.n, config.f, config.mu, config.L, config.sigma, config.r)
    try:
        eta = resolved_eta(config)
    except ConfigError:
        eta = math.nan
    rows = [(name, _fmt(getattr(consts, name))) for name in _THEORY_FIELDS]
    rows.append(("eta", _fmt(eta)))
    rows.append(("rho_at_eta", _fmt(consts.rho_at(eta))))
    for name, passed, detail in report.checks:
        rows.append((f"check_{name}", "pass" if passed else f"fail ({detail})"))
    rows.append(("feasible", "pass" if report.ok else "fail"))
    _write_csv(args.out, ("field", "value"), rows)
    if args.strict and not report.ok:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_converge(args):
    config = _load_config(args)
    report = _feasibility_gate(config, args.strict)
    if args.strict and not report.ok:
        return EXIT_INFEASIBLE
    results = run_experiment(config)
    _write_csv(args.out, CONVERGE_COLUMNS, converge_rows(results))
    return EXIT_OK


def cmd_sweep(args):
    config = _load_config(args)
    report = _feasibility_gate(config, args.strict)
    if args.strict and not report.ok:
        return EXIT_INFEASIBLE
    if args.points < 1:
        raise ConfigError("--points must be >= 1")
    values = np.linspace(args.min, args.max, args.points)
    rows = sweep_rows(config, args.axis, values, empirical=args.empirical)
    _write_csv(args.out, SWEEP_COLUMNS, rows)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="echo-cgc",
        description="Byzantine-tolerant distributed SGD simulator for single-hop radio networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_theory = sub.add_parser("theory", help="print every derived constant and feasibility check")
    _add_config_flags(p_theory)
    p_theory.set_defaults(func=cmd_theory)

    p_conv = sub.add_parser("converge", help="run seeded replicas and emit per-round metrics")
    _add_config_flags(p_conv)
    p_conv.set_defaults(func=cmd_converge)

    p_sweep = sub.add_parser("sweep", help="sweep one axis of the communication bound")
    p_sweep.add_argument("axis", choices=SWEEP_AXES)
    p_sweep.add_argument("--min", type=float, required=True)
    p_sweep.add_argument("--max", type=float, required=True)
    p_sweep.add_argument("--points", type=int, default=50)
    p_sweep.add_argument(
        "--empirical",
        action="store_true",
        help="also simulate each grid point and report the measured traffic ratio",
    )
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
