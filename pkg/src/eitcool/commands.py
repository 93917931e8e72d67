"""Subcommand dispatch: each subcommand turns a RunConfig into a CsvTable."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import COMMANDS, RunConfig, SweepSpec, apply_point
from .cooling import (cooling_summary, evolve_mean_n, optimize_parameters, rate_evolve,
                      sideband_rates, steady_populations, validity_check)
from .errors import ConfigError, ParameterError
from .fullquantum import build_full_generator, mc_ensemble, worker_count
from .generic import generic_evolve, generic_rates
from .internal import excitation_spectrum
from .tables import CsvTable, concat, load_motion_spectrum


def _times(config: RunConfig) -> np.ndarray:
    n = config.get("npoints")
    if n < 2:
        raise ConfigError("npoints must be >= 2", key="npoints")
    if not config["tmax"] > 0:
        raise ConfigError("tmax must be > 0", key="tmax")
    return np.linspace(0.0, config["tmax"], n)


def cmd_spectrum(config: RunConfig, workers=None) -> CsvTable:
    params = config.lambda_params()
    count = config["probe_count"]
    if count < 1:
        raise ConfigError("probe_count must be >= 1", key="probe_count")
    if "omegaP" in config.values:
        config.probe().check_weak(params)
    grid = np.linspace(config["probe_start"], config["probe_stop"], count)
    return CsvTable.from_columns({"deltaP": grid, "I": excitation_spectrum(params, grid)})


def cmd_rates(config: RunConfig, workers=None) -> CsvTable:
    params, geom, trap = config.lambda_params(), config.geometry(), config.trap()
    rates = sideband_rates(params, trap)
    w = geom.eta ** 2 * (rates.aMinus - rates.aPlus)
    n_inf = rates.aPlus / (rates.aMinus - rates.aPlus) if rates.cooling else float("nan")
    v = validity_check(params, geom, trap, n_estimate=n_inf if rates.cooling else 0.0)
    return CsvTable(
        ("aPlus", "aMinus", "W", "nInf", "perturbative1", "perturbative2", "zeta", "wRatio", "valid"),
        ((rates.aPlus, rates.aMinus, w, n_inf, v.perturbative[0], v.perturbative[1],
          v.zeta, v.wRatio, v.ok),),
    )


def cmd_cool(config: RunConfig, workers=None) -> CsvTable:
    params, geom, trap = config.lambda_params(), config.geometry(), config.trap()
    summary = cooling_summary(params, geom, trap)
    t = _times(config)
    n0 = config.get("n0")
    if not 0 <= n0 < trap.nmax:
        raise ConfigError(f"n0 must lie in [0, nmax), got {n0}", key="n0")
    p0 = np.zeros(trap.nmax + 1)
    p0[n0] = 1.0
    series = rate_evolve(sideband_rates(params, trap), geom, p0, t, trap.nmax)
    return CsvTable.from_columns({
        "t": t,
        "nAnalytic": evolve_mean_n(summary, n0, t),
        "nRate": series.mean_n,
        "leak": series.leak,
    })


def cmd_steady(config: RunConfig, workers=None) -> CsvTable:
    params, trap = config.lambda_params(), config.trap()
    cooling_summary(params, config.geometry(), trap)
    pops = steady_populations(sideband_rates(params, trap), trap.nmax)
    return CsvTable.from_columns({"n": np.arange(trap.nmax + 1), "p": pops.p})


def cmd_mc(config: RunConfig, workers=None) -> CsvTable:
    params, geom, trap = config.lambda_params(), config.geometry(), config.trap()
    summary = cooling_summary(params, geom, trap)
    t = _times(config)
    n0 = config.get("n0")
    if not 0 <= n0 < trap.nmax:
        raise ConfigError(f"n0 must lie in [0, nmax), got {n0}", key="n0")
    gen = build_full_generator(params, geom, trap, quadrature_order=config.get("quadrature"))
    stats = mc_ensemble(gen, gen.dark_product_state(n0), t, config.get("ntraj"),
                        seed_base=config.get("seed"), workers=workers)
    return CsvTable.from_columns({
        "t": t,
        "meanN": stats.meanN,
        "stderr": stats.stderr,
        "nAnalytic": evolve_mean_n(summary, n0, t),
    })


def cmd_optimize(config: RunConfig, workers=None) -> CsvTable:
    res = optimize_parameters(config["nu"], config["delta"], config["gamma"], config.get("omega_max"))
    return CsvTable(("omegaOpt", "omegaArgmin", "nAtOpt", "nAtArgmin"),
                    ((res.omegaOpt, res.omegaArgmin, res.nAtOpt, res.nAtArgmin),))


def cmd_generic(config: RunConfig, workers=None) -> CsvTable:
    params, geom = config.lambda_params(), config.geometry()
    spectrum = load_motion_spectrum(config["spectrum_file"])
    t = _times(config)
    n0 = config.get("n0")
    if not 0 <= n0 < spectrum.size:
        raise ConfigError(f"n0 must index a level of the spectrum, got {n0}", key="n0")
    R = generic_rates(params, geom, spectrum)
    p0 = np.zeros(spectrum.size)
    p0[n0] = 1.0
    series = generic_evolve(R, p0, t, spectrum.energies)
    return CsvTable.from_columns({"t": t, "meanEnergy": series.meanEnergy, "p0": series.populations[:, 0]})


HANDLERS = {
    "spectrum": cmd_spectrum,
    "rates": cmd_rates,
    "cool": cmd_cool,
    "steady": cmd_steady,
    "mc": cmd_mc,
    "optimize": cmd_optimize,
    "generic": cmd_generic,
}
assert tuple(HANDLERS) == COMMANDS


def _run_point(args):
    command, config, point, workers = args
    table = HANDLERS[command](apply_point(config, point), workers=workers)
    return table.prepend(point) if point else table


def run_command(command: str, config: RunConfig, sweep: SweepSpec | None = None,
                workers: int | None = None) -> CsvTable:
    """Run ``command``; a sweep yields one block of rows per grid point with the swept keys in front.

    Grid points are evaluated on at most ``workers`` processes (default from
    ``EITCOOL_THREADS``) and reassembled in grid order.
    """
    if command not in HANDLERS:
        raise ConfigError(f"unknown subcommand {command!r}; expected one of {COMMANDS}")
    swept = set(sweep.keys) if sweep else set()
    probe = config.with_values(**{k: 0.0 for k in swept if k not in config.values})
    probe.require(command)
    if not sweep or not sweep.axes:
        return HANDLERS[command](config, workers=workers)
    if len(swept) != len(sweep.axes):
        raise ParameterError("a key may be swept only once")
    points = list(sweep.points())
    nworkers = min(worker_count(workers), len(points))
    if nworkers == 1:
        tables = [_run_point((command, config, p, None)) for p in points]
    else:
        # trajectories inside each grid point stay serial so the pool stays bounded
        jobs = [(command, config, p, 1) for p in points]
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            tables = list(pool.map(_run_point, jobs))
    return concat(tables)
