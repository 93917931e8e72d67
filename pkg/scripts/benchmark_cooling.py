"""Benchmark cooling run: rates, steady state, master equation and a quantum-jump ensemble.

Usage: python scripts/benchmark_cooling.py [--ntraj 500] [--nmax 12] [--out run.csv]
"""
import argparse
import time

import numpy as np

from eitcool.cooling import cooling_summary, evolve_mean_n, rate_evolve, sideband_rates
from eitcool.fullquantum import build_full_generator, fitted_cooling_rate, master_evolve, mc_ensemble
from eitcool.params import Geometry, LambdaParams, TrapParams
from eitcool.tables import CsvTable, emit_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ntraj", type=int, default=500)
    ap.add_argument("--nmax", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tmax", type=float, default=4200.0)
    ap.add_argument("--out")
    args = ap.parse_args()

    params = LambdaParams(17.0, 17.0, -70.0, 20.0)
    geom = Geometry.counterpropagating(0.01)
    trap = TrapParams(2.0, args.nmax)
    s = cooling_summary(params, geom, trap)
    print(f"A+ = {s.aPlus:.6g}  A- = {s.aMinus:.6g}  W = {s.w:.6g}  n_inf = {s.nInf:.6g}  "
          f"n_min = {s.nInfMin:.6g}  omega_opt = {s.omegaOpt:.6g}")

    t = np.linspace(0.0, args.tmax, 71)
    p0 = np.zeros(trap.nmax + 1)
    p0[1] = 1.0
    rate_n = rate_evolve(sideband_rates(params, trap), geom, p0, t).mean_n

    gen = build_full_generator(params, geom, trap)
    psi0 = gen.dark_product_state(1)
    t0 = time.perf_counter()
    master = master_evolve(gen, psi0, t)
    print(f"master equation: {time.perf_counter() - t0:.1f} s, <n>(tmax) = {master.meanN[-1]:.6g}")
    t0 = time.perf_counter()
    stats = mc_ensemble(gen, psi0, t, args.ntraj, seed_base=args.seed)
    rate, rate_sd = fitted_cooling_rate(stats, rate_guess=s.w)
    print(f"quantum jumps ({args.ntraj} trajectories): {time.perf_counter() - t0:.1f} s, "
          f"n_inf = {stats.nInf:.6g} +- {stats.nInfErr:.2g}, W = {rate:.6g} +- {rate_sd:.2g}")

    table = CsvTable.from_columns({"t": t, "nAnalytic": evolve_mean_n(s, 1, t), "nRate": rate_n,
                                   "nMaster": master.meanN, "nMC": stats.meanN, "stderrMC": stats.stderr})
    if args.out:
        emit_csv(table, args.out)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
