"""Command line interface: ``dirkdg solve|converge|analyze|stability``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields, replace

import numpy as np

from . import config as cfg
from .config import ConfigError, RunConfig
from .driver import (SimulationError, default_wave_numbers, gamma_sweep, run_analysis,
                     run_convergence, run_simulation, run_stability)
from .tableaux import SCHEMES

EXIT_FAILURE = 1
EXIT_USAGE = 2


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI file with a [run] section; flags override it")
    for f in fields(RunConfig):
        base = f.type.removeprefix("Optional[").rstrip("]")
        kind = {"int": int, "float": float, "bool": _bool}.get(base, str)
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, type=kind, default=None, metavar=base.upper())


def _config_from(args) -> RunConfig:
    base = cfg.load(args.config) if args.config else RunConfig()
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)
                 if getattr(args, f.name) is not None}
    return replace(base, **overrides)


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def cmd_solve(args) -> int:
    config = _config_from(args)
    if args.write_config:
        cfg.save(config, args.write_config)
    result = run_simulation(config)
    print(f"{config.problem} {config.scheme} N={config.N}: {result.steps} steps, dt={result.dt:.6g}, "
          f"delta={result.delta}, max troubled={result.max_troubled}, "
          f"newton={result.newton_iterations}, krylov={result.krylov_iterations}, "
          f"wall={result.wall_time:.2f}s")
    if result.spec.exact is not None:
        print(f"L1 error of the means: {result.l1_error():.6e}")
    return 0


def cmd_converge(args) -> int:
    config = _config_from(args)
    report = run_convergence(config, _ints(args.grids), args.component, args.output)
    print("N,l1_error,rate,max_troubled")
    for n, e, r, t in report.rows():
        print(f"{n},{e:.6e},{'' if r is None else f'{r:.3f}'},{t}")
    return 0


def cmd_analyze(args) -> int:
    Ks = default_wave_numbers(args.samples)
    if args.gammas:
        lo, hi, count = _floats(args.gammas)
        rows = gamma_sweep(np.linspace(lo, hi, int(count)), _floats(args.ratios)[0], Ks,
                           args.output)
        print(f"gamma sweep: {len(rows)} rows")
        return 0
    tables = run_analysis(args.scheme, _floats(args.ratios), Ks, args.p, args.output_dir)
    for r, rows in tables.items():
        worst = max(rows, key=lambda row: abs(row["m_diss"]))
        print(f"{args.scheme} r={r:g}: {len(rows)} wave numbers, "
              f"max |m_diss| {abs(worst['m_diss']):.4g} at K={worst['K']:.4g}")
    return 0


def cmd_stability(args) -> int:
    scan = run_stability(args.scheme, args.output, args.samples)
    verdict = "A-stable" if scan.a_stable else "not A-stable"
    print(f"{args.scheme}: {verdict} (max |R| on the left half-plane {scan.max_left:.6g}, "
          f"|R(-1e8)| {scan.r_infinity:.3g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirkdg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log every run")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one configuration and write CSV output")
    _add_config_flags(solve)
    solve.add_argument("--write-config", help="also save the effective configuration here")
    solve.set_defaults(func=cmd_solve)

    conv = sub.add_parser("converge", help="L1 convergence study on doubled grids")
    _add_config_flags(conv)
    conv.add_argument("--grids", default="40,80,160,320", help="comma-separated cell counts")
    conv.add_argument("--component", type=int, default=0)
    conv.add_argument("--output", help="CSV path for the error table")
    conv.set_defaults(func=cmd_converge)

    ana = sub.add_parser("analyze", help="Fourier dissipation/dispersion measures")
    ana.add_argument("--scheme", default="DG2DIRK22-Lstab", choices=sorted(SCHEMES))
    ana.add_argument("--p", type=int, default=None)
    ana.add_argument("--ratios", default="1,15", help="comma-separated Courant ratios r")
    ana.add_argument("--samples", type=int, default=200, help="wave numbers in (0, pi]")
    ana.add_argument("--output-dir", help="directory for one CSV per ratio")
    ana.add_argument("--gammas", help="LO,HI,COUNT: sweep the 2-stage family with P1 instead")
    ana.add_argument("--output", help="CSV path for the gamma sweep")
    ana.set_defaults(func=cmd_analyze)

    stab = sub.add_parser("stability", help="A-stability scan of |R(z)|")
    stab.add_argument("--scheme", default="DG2DIRK22-Lstab", choices=sorted(SCHEMES))
    stab.add_argument("--samples", type=int, default=600)
    stab.add_argument("--output", help="CSV path for the sampled region")
    stab.set_defaults(func=cmd_stability)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SimulationError as exc:
        print(f"solver failure at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
