"""``eitcool <subcommand> --config <path> [...]`` command-line entry point."""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .commands import run_command
from .config import COMMANDS, SweepSpec, parse_config, parse_sweep
from .errors import EITCoolError, NumericalError, ParameterError, RegimeError
from .tables import emit_csv

EXIT_OK, EXIT_PARAMETER, EXIT_REGIME, EXIT_NUMERICAL = 0, 2, 3, 4


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ParameterError):
        return EXIT_PARAMETER
    if isinstance(exc, RegimeError):
        return EXIT_REGIME
    if isinstance(exc, (NumericalError, ArithmeticError)):
        return EXIT_NUMERICAL
    if isinstance(exc, (OSError, ValueError)):
        return EXIT_PARAMETER
    return getattr(exc, "exit_code", 1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eitcool", description="EIT cooling of a trapped Lambda atom.")
    p.add_argument("subcommand", choices=COMMANDS)
    p.add_argument("--config", required=True, help="key=value configuration file")
    p.add_argument("--sweep", action="append", default=[], metavar="KEY=START:STOP:COUNT[:log]",
                   help="sweep a key; repeat for a Cartesian grid")
    p.add_argument("--out", help="output CSV path (default: standard output)")
    p.add_argument("--seed", type=int, help="seed base for Monte Carlo trajectories")
    p.add_argument("--ntraj", type=int, help="number of trajectories")
    p.add_argument("--nmax", type=int, help="Fock-space truncation")
    return p


def _showwarning(message, category, filename, lineno, file=None, line=None):
    print(f"eitcool: warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.showwarning = _showwarning
    try:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        config = parse_config(text)
        spec_file = config.get("spectrum_file")
        if spec_file is not None and not Path(spec_file).is_absolute():
            # relative to the config file, not the working directory
            config = config.with_values(spectrum_file=str(Path(args.config).parent / spec_file))
        overrides = {k: getattr(args, k) for k in ("seed", "ntraj", "nmax") if getattr(args, k) is not None}
        if overrides:
            config = config.with_values(**overrides).validate()
        sweep = SweepSpec(tuple(parse_sweep(s) for s in args.sweep))
        table = run_command(args.subcommand, config, sweep)
        text = emit_csv(table, args.out)
        if args.out is None:
            sys.stdout.write(text)
    except (EITCoolError, OSError, ValueError, ArithmeticError) as exc:
        print(f"eitcool: error: {exc}", file=sys.stderr)
        return exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
