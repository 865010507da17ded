"""Command line front end.

Exit codes: 0 success, 1 validation error, 2 numerical-guard failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .config import Config, load_config
from .counting import geometric_grid, growth_fit, strip_count_report
from .exceptions import NumericalGuardError, ValidationError
from .resonances import (
    WindowSpec,
    locate_resonances,
    resonances_from_csv,
    resonances_to_csv,
    system_lattice,
)
from .report import csv_table, format_value, key_value_document, write_text
from .systems import orbit_data
from .trace import BumpSpec, trace_check
from .zeta import ruelle_zeta, zeta1, zeta1_log_derivative

log = logging.getLogger("reslab")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


def _pair(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected re,im")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _window(text: str) -> WindowSpec:
    try:
        return WindowSpec.parse(text)
    except (ValidationError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _require_window(args, config: Config) -> WindowSpec:
    window = args.window or config.window
    if window is None:
        raise ValidationError("no window: pass --window=re_min,re_max,im_min,im_max or set it in the config")
    return window


def _sidecar(output, suffix: str, text: str) -> None:
    if output is None or str(output) == "-":
        sys.stderr.write(text)
    else:
        write_text(f"{output}{suffix}", text)


# --- subcommands ---------------------------------------------------------------------

def cmd_orbits(args, config: Config) -> None:
    data = orbit_data(config.system, args.max_period)
    rows = [(c.total_period, c.geometric_weight.real, c.geometric_weight.imag)
            for c in data.period_classes if c.total_period <= args.max_period * (1 + 1e-12)]
    write_text(args.output, csv_table(("total_period", "re_weight", "im_weight"), rows))
    if data.fixed_points:
        fp_rows = [(fp.id, fp.stable_count, ";".join(format_value(e) for e in fp.generator_eigenvalues),
                    ";".join(format_value(m) for m in fp.weight_generator_eigenvalues))
                   for fp in data.fixed_points]
        _sidecar(args.output, ".fixed_points.csv",
                 csv_table(("id", "stable_count", "generator_eigenvalues", "weight_generator_eigenvalues"),
                           fp_rows))


def cmd_zeta_eval(args, config: Config) -> None:
    data = orbit_data(config.system, args.horizon or config.horizon)
    lam = args.lam
    items: list[tuple[str, object]] = [("lambda", lam)]
    if args.which in ("zeta1", "both"):
        ev = zeta1(data, lam, method=args.method)
        ld = zeta1_log_derivative(data, lam, method=args.method)
        items += [("zeta1", ev.value), ("zeta1_method", ev.method),
                  ("zeta1_truncation_horizon", ev.truncation_horizon),
                  ("zeta1_tail_bound", ev.tail_bound), ("zeta1_heuristic", ev.heuristic),
                  ("log_derivative", ld.value), ("log_derivative_tail_bound", ld.tail_bound)]
    if args.which in ("ruelle", "both"):
        ev = ruelle_zeta(data, lam)
        items += [("ruelle_zeta", ev.value), ("ruelle_truncation_horizon", ev.truncation_horizon),
                  ("ruelle_tail_bound", ev.tail_bound), ("ruelle_heuristic", ev.heuristic)]
    write_text(args.output, key_value_document(items))


def cmd_exact(args, config: Config) -> None:
    window = _require_window(args, config)
    write_text(args.output, resonances_to_csv(system_lattice(config.system).in_window(window)))


def cmd_locate(args, config: Config) -> None:
    window = _require_window(args, config)
    tol = config.tolerances
    data = orbit_data(config.system, args.horizon or config.horizon)
    found = locate_resonances(
        data, window,
        tol=args.tol if args.tol is not None else tol.newton,
        seed_diameter=args.seed_diameter if args.seed_diameter is not None else tol.seed_diameter,
        edge_clearance=args.edge_clearance if args.edge_clearance is not None else tol.edge_clearance,
        quad_tol=tol.winding,
    )
    write_text(args.output, resonances_to_csv(found))


def _bump(args, config: Config) -> BumpSpec:
    l = args.l if args.l is not None else (config.bump.l if config.bump else None)
    d = args.d if args.d is not None else (config.bump.d if config.bump else None)
    if l is None or d is None:
        raise ValidationError("bump needs --l and --d (or a bump entry in the config)")
    order = config.bump.quadrature_order if config.bump else 200
    return BumpSpec(l, d, order)


def _resonance_source(args, config: Config):
    if args.resonances:
        text = Path(args.resonances).read_text(encoding="utf-8")
        return resonances_from_csv(text)
    return system_lattice(config.system)


def cmd_trace_check(args, config: Config) -> None:
    spec = _bump(args, config)
    A = args.A if args.A is not None else config.strip.A
    horizon = args.horizon or config.horizon
    data = orbit_data(config.system, horizon if horizon is not None else None)
    if data.horizon < spec.d + spec.l:
        data = orbit_data(config.system, math.ceil(spec.d + spec.l) + 1.0)
    report = trace_check(data, _resonance_source(args, config), spec, A, re_cutoff=args.re_cutoff,
                         C=args.C, epsilon=args.epsilon)
    write_text(args.output, key_value_document(report.as_items()))


def cmd_count(args, config: Config) -> None:
    beta = args.beta if args.beta is not None else config.strip.beta
    if beta is None:
        raise ValidationError("count needs --beta (or strip.beta in the config)")
    emin = args.emin if args.emin is not None else args.emax / 32
    grid = geometric_grid(emin, args.emax, args.points)
    source = _resonance_source(args, config)
    report = growth_fit(source, grid, beta) if args.fit else strip_count_report(source, grid, beta)
    write_text(args.output, csv_table(("E", "N", "per_unit_max"), report.table()))
    if args.fit:
        doc = key_value_document(report.as_items())
        if args.report:
            write_text(args.report, doc)
        else:
            sys.stderr.write(doc)


# --- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reslab",
        description="Resonances, zeta functions and trace checks from periodic-orbit data.",
        epilog="Negative flag values need the '=' form, e.g. --window=-7,7,-0.5,0.5.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("config", help="JSON system configuration")
        p.add_argument("-o", "--output", default="-", help="output file (default: stdout)")
        p.set_defaults(func=func)
        return p

    p = add("orbits", cmd_orbits, "period classes up to a maximal period (CSV)")
    p.add_argument("--max-period", type=float, required=True)

    p = add("zeta-eval", cmd_zeta_eval, "evaluate zeta1 and the Ruelle zeta at one point")
    p.add_argument("--lambda", dest="lam", type=_pair, required=True, metavar="RE,IM")
    p.add_argument("--which", choices=("zeta1", "ruelle", "both"), default="zeta1")
    p.add_argument("--method", choices=("auto", "series", "product"), default="auto")
    p.add_argument("--horizon", type=float)

    p = add("exact", cmd_exact, "exact resonance lattice in a window (CSV)")
    p.add_argument("--window", type=_window, metavar="RE_MIN,RE_MAX,IM_MIN,IM_MAX")

    p = add("locate", cmd_locate, "locate zeros of zeta1 in a window (CSV)")
    p.add_argument("--window", type=_window, metavar="RE_MIN,RE_MAX,IM_MIN,IM_MAX")
    p.add_argument("--tol", type=float, help="Newton tolerance")
    p.add_argument("--seed-diameter", type=float)
    p.add_argument("--edge-clearance", type=float)
    p.add_argument("--horizon", type=float)

    p = add("trace-check", cmd_trace_check, "compare both sides of the trace formula")
    p.add_argument("--l", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--A", type=float, help="strip depth; omit for line-complete summation")
    p.add_argument("--re-cutoff", type=float, help="spectral cutoff; omit for adaptive per-row cutoffs")
    p.add_argument("--C", type=float, default=1.0, help="bound-shape constant")
    p.add_argument("--epsilon", type=float, default=0.1, help="bound-shape epsilon")
    p.add_argument("--horizon", type=float)
    p.add_argument("--resonances", help="resonance CSV to use instead of the exact lattice")

    p = add("count", cmd_count, "strip counts N(E, beta) on a geometric grid (CSV)")
    p.add_argument("--emax", type=float, required=True)
    p.add_argument("--emin", type=float, help="smallest grid energy (default emax/32)")
    p.add_argument("--points", type=int, default=6)
    p.add_argument("--beta", type=float)
    p.add_argument("--fit", action="store_true", help="fit the growth exponent")
    p.add_argument("--report", help="where to write the fit report (default: stderr)")
    p.add_argument("--resonances", help="resonance CSV to count instead of the exact lattice")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        args.func(args, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalGuardError as exc:
        print(f"numerical guard: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
