"""Steady occupation against the Rabi frequency, compared with the resonance-condition optimum.

Usage: python scripts/optimum_sweep.py [--nu 2] [--delta -70] [--out sweep.csv]
"""
import argparse

import numpy as np

from eitcool.cooling import closed_form_n_inf, optimize_parameters
from eitcool.tables import CsvTable, emit_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nu", type=float, default=2.0)
    ap.add_argument("--delta", type=float, default=-70.0)
    ap.add_argument("--out")
    args = ap.parse_args()

    for gamma in (20.0, 10.0, 1.0, 0.1):
        r = optimize_parameters(args.nu, args.delta, gamma)
        print(f"gamma = {gamma:5.1f}: omega_opt = {r.omegaOpt:.6f}  argmin = {r.omegaArgmin:.6f}  "
              f"n(opt) = {r.nAtOpt:.4e}  n(argmin) = {r.nAtArgmin:.4e}")
    omega = np.linspace(2.2 * args.nu, 60.0, 300)
    cols = {"omega": omega}
    for gamma in (20.0, 10.0, 1.0):
        cols[f"nInf_gamma{gamma:g}"] = closed_form_n_inf(args.nu, args.delta, gamma, omega)
    if args.out:
        emit_csv(CsvTable.from_columns(cols), args.out)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
