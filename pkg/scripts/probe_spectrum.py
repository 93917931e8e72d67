"""Probe excitation spectrum of the driven Lambda system with its dark zero and dressed resonances.

Usage: python scripts/probe_spectrum.py [--out spectrum.csv]
"""
import argparse
import math

import numpy as np

from eitcool.internal import dressed_decomposition, excitation_spectrum
from eitcool.params import LambdaParams
from eitcool.tables import CsvTable, emit_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, default=2.5)
    ap.add_argument("--out")
    args = ap.parse_args()

    params = LambdaParams(1 / math.sqrt(2), 1 / math.sqrt(2), args.delta, 1.0)
    d = dressed_decomposition(params)
    grid = np.arange(-200, 501) / 100.0
    intensity = excitation_spectrum(params, grid)
    inner = intensity[1:-1]
    peaks = grid[1:-1][(inner > intensity[:-2]) & (inner > intensity[2:])]
    k = int(np.argmin(np.abs(grid - params.delta)))
    print(f"dressed resonances: {d.deltaOmegaPlus:.4f}, {d.deltaOmegaMinus:.4f} "
          f"(widths {d.gammaPlus:.4f}, {d.gammaMinus:.4f})")
    print(f"grid maxima: {', '.join(f'{p:.2f}' for p in peaks)}")
    print(f"I(deltaP = delta) = {intensity[k]:.3g}")
    if args.out:
        emit_csv(CsvTable.from_columns({"deltaP": grid, "I": intensity}), args.out)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
