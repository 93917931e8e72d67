"""Sideband cooling of a harmonically trapped Lambda atom in the Lamb-Dicke limit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .errors import HeatingRegimeError, ParameterError, RegimeError, TruncationError
from .internal import UNIT_GEOMETRY, dressed_decomposition, fluctuation_spectrum
from .params import Geometry, LambdaParams, TrapParams

METHODS = ("closed-form", "regression")


def closed_form_rates(params: LambdaParams, nu):
    """``(A+, A-)`` per unit ``eta**2``; ``nu`` may be an array."""
    nu = np.asarray(nu, dtype=float)
    om2 = params.omega ** 2
    pref = 0.25 * (params.omega1 * params.omega2) ** 2 / om2 * params.gamma * nu ** 2
    width = 0.25 * params.gamma ** 2 * nu ** 2

    def rate(sign):
        return pref / ((0.25 * om2 - nu * (nu + sign * params.delta)) ** 2 + width)

    return rate(+1.0), rate(-1.0)


@dataclass(frozen=True)
class SidebandRates:
    aPlus: float
    aMinus: float
    method: str = "closed-form"

    @property
    def cooling(self) -> bool:
        return self.aMinus > self.aPlus

    @property
    def ratio(self) -> float:
        return self.aPlus / self.aMinus


def sideband_rates(params: LambdaParams, trap: TrapParams, method: str = "closed-form",
                   geom: Geometry | None = None) -> SidebandRates:
    """Heating (``aPlus``) and cooling (``aMinus``) rates per unit ``eta**2``.

    The regression path evaluates ``2 Re S(-+nu)`` numerically. When ``geom``
    has a non-zero effective Lamb-Dicke parameter the spectrum is taken in
    that geometry and divided by ``eta**2``; otherwise a unit geometry is used.
    """
    if method == "closed-form":
        ap, am = closed_form_rates(params, trap.nu)
        return SidebandRates(float(ap), float(am), method)
    if method != "regression":
        raise ParameterError(f"unknown rate method {method!r}; expected one of {METHODS}")
    scale = 1.0
    if geom is None or geom.eta == 0:
        geom = UNIT_GEOMETRY
    else:
        scale = geom.eta ** 2
    s = fluctuation_spectrum(params, geom, np.array([-trap.nu, trap.nu]))
    ap, am = 2.0 * s.real / scale
    return SidebandRates(float(ap), float(am), method)


def closed_form_n_inf(nu, delta, gamma, omega):
    """Steady mean phonon number as a function of the total Rabi frequency.

    Written with ``-delta`` in place of ``|delta|`` so the same expression is
    the ratio ``A+/(A- - A+)`` on both sides of resonance.
    """
    # integer constants keep exact rational inputs exact
    num = 4 * (omega ** 2 / 4 - nu * (nu - delta)) ** 2 + gamma ** 2 * nu ** 2
    return num / (-4 * nu * delta * (omega ** 2 - 4 * nu ** 2))


@dataclass(frozen=True)
class ValidityReport:
    perturbative: tuple            # eta_j Omega_j cos(theta) / gamma_+ for j = 1, 2
    zeta: float
    wRatio: float                  # W / (gamma_+ / 2)
    w: float
    wMax: float                    # eta^2 (Omega1 Omega2 / Omega)^2 / gamma
    threshold: float = 0.1
    flags: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.flags.values())


def validity_check(params: LambdaParams, geom: Geometry, trap: TrapParams,
                   n_estimate: float = 0.0, threshold: float = 0.1) -> ValidityReport:
    dressed = dressed_decomposition(params)
    gp = dressed.gammaPlus
    cos_t = math.cos(dressed.theta)
    pert = (abs(geom.kcos1) * params.omega1 * cos_t / gp,
            abs(geom.kcos2) * params.omega2 * cos_t / gp)
    rates = sideband_rates(params, trap)
    w = geom.eta ** 2 * (rates.aMinus - rates.aPlus)
    zeta = geom.zeta(n_estimate)
    w_ratio = w / (0.5 * gp)
    w_max = geom.eta ** 2 * (params.omega1 * params.omega2 / params.omega) ** 2 / params.gamma
    flags = {
        "lamb_dicke": zeta < threshold,
        "perturbative": max(pert) < threshold,
        "cooling": rates.cooling,
    }
    return ValidityReport(pert, zeta, w_ratio, w, w_max, threshold, flags)


@dataclass(frozen=True)
class CoolingSummary:
    aPlus: float
    aMinus: float
    w: float
    nInf: float
    nInfClosed: float
    nInfMin: float
    omegaOpt: float
    t0Estimate: float
    tZetaEstimate: float
    regime: str
    validity: ValidityReport

    @property
    def cooling(self) -> bool:
        return self.aMinus > self.aPlus


def resonance_omega(nu: float, delta: float) -> float:
    """Rabi frequency placing the narrow resonance on the first red sideband."""
    val = 4.0 * nu * (nu - delta)
    return math.sqrt(val) if val > 0 else float("nan")


def cooling_summary(params: LambdaParams, geom: Geometry, trap: TrapParams,
                    strict: bool = True) -> CoolingSummary:
    """Cooling rate, steady occupation and diagnostics.

    Raises :class:`HeatingRegimeError` when ``A+ >= A-`` unless ``strict`` is
    False, in which case the steady values are NaN.
    """
    rates = sideband_rates(params, trap)
    ap, am = rates.aPlus, rates.aMinus
    if am <= ap and strict:
        raise HeatingRegimeError(
            f"no steady state: A+ = {ap:.6g} >= A- = {am:.6g} (needs delta<0 and omega>2nu, "
            "or delta>0 and omega<2nu)")
    eta2 = geom.eta ** 2
    dressed = dressed_decomposition(params)
    nan = float("nan")
    if am > ap:
        n_inf = ap / (am - ap)
        n_closed = float(closed_form_n_inf(trap.nu, params.delta, params.gamma, params.omega))
    else:
        n_inf = n_closed = nan
    return CoolingSummary(
        aPlus=ap,
        aMinus=am,
        w=eta2 * (am - ap),
        nInf=n_inf,
        nInfClosed=n_closed,
        nInfMin=(params.gamma / (4.0 * abs(params.delta))) ** 2 if params.delta else float("inf"),
        omegaOpt=resonance_omega(trap.nu, params.delta),
        t0Estimate=1.0 / min(dressed.gammaPlus, dressed.gammaMinus),
        tZetaEstimate=1.0 / (eta2 * am) if eta2 * am > 0 else float("inf"),
        regime="narrow" if trap.nu < 0.5 * params.omega else "broad",
        validity=validity_check(params, geom, trap),
    )


def evolve_mean_n(summary: CoolingSummary, n0: float, times) -> np.ndarray:
    if not summary.w > 0:
        raise HeatingRegimeError(f"mean phonon number does not relax: W = {summary.w}")
    t = np.asarray(times, dtype=float)
    return (n0 - summary.nInf) * np.exp(-summary.w * t) + summary.nInf


# --- Fock-state rate equations ---------------------------------------------

@dataclass(frozen=True)
class FockPopulations:
    p: np.ndarray

    @property
    def leak(self) -> float:
        return float(1.0 - self.p.sum())

    @property
    def mean_n(self) -> float:
        return float(np.arange(self.p.size) @ self.p)


@dataclass(frozen=True)
class RateSeries:
    times: np.ndarray
    populations: np.ndarray        # (ntimes, nmax + 1)

    @property
    def mean_n(self) -> np.ndarray:
        return self.populations @ np.arange(self.populations.shape[1])

    @property
    def leak(self) -> np.ndarray:
        return 1.0 - self.populations.sum(axis=1)

    def __getitem__(self, k) -> FockPopulations:
        return FockPopulations(self.populations[k])


def rate_generator(rates: SidebandRates, eta: float, nmax: int) -> np.ndarray:
    """Tridiagonal generator ``dp/dt = G p`` with reflecting truncation at ``nmax``."""
    n = np.arange(nmax + 1, dtype=float)
    up = eta ** 2 * rates.aPlus * (n[:-1] + 1.0)    # n -> n+1
    down = eta ** 2 * rates.aMinus * n[1:]          # n -> n-1
    G = np.diag(up, -1) + np.diag(down, 1)
    G -= np.diag(G.sum(axis=0))
    return G


def thermal_populations(n_mean: float, nmax: int) -> np.ndarray:
    q = n_mean / (n_mean + 1.0)
    p = q ** np.arange(nmax + 1)
    return p / p.sum()


def rate_evolve(rates: SidebandRates, geom: Geometry, populations0, times, nmax: int | None = None,
                overflow: float = 1e-6) -> RateSeries:
    p0 = np.asarray(populations0, dtype=float)
    nmax = p0.size - 1 if nmax is None else nmax
    if p0.size < nmax + 1:
        p0 = np.concatenate([p0, np.zeros(nmax + 1 - p0.size)])
    elif p0.size > nmax + 1:
        raise ParameterError("initial populations exceed the truncation")
    if abs(p0.sum() - 1.0) > 1e-12 or np.any(p0 < 0):
        raise ParameterError("initial populations must be a normalised distribution")
    t = np.asarray(times, dtype=float)
    G = rate_generator(rates, geom.eta, nmax)
    out = np.empty((t.size, nmax + 1))
    cache = {}
    p, t_prev = p0, 0.0
    for k, tk in enumerate(t):
        dt = tk - t_prev
        key = round(dt, 12)
        if key not in cache:
            cache[key] = expm(G * dt)
        p = cache[key] @ p
        t_prev = tk
        out[k] = p
        if p[-1] > overflow:
            raise TruncationError(
                f"top Fock level holds {p[-1]:.3g} > {overflow:g} at t = {tk:g}; increase nmax")
    return RateSeries(t, out)


def steady_populations(rates: SidebandRates, nmax: int) -> FockPopulations:
    if not rates.cooling:
        raise HeatingRegimeError("rate equation has no steady state when A+ >= A-")
    q = rates.ratio
    n = np.arange(nmax + 1)
    p = (1.0 - q) * q ** n / (1.0 - q ** (nmax + 1))
    return FockPopulations(p)


# --- optimisation over the Rabi frequency ----------------------------------

@dataclass(frozen=True)
class OptimumResult:
    omegaOpt: float
    nAtOpt: float
    omegaArgmin: float
    nAtArgmin: float


def optimize_parameters(nu: float, delta: float, gamma: float,
                        omega_max: float | None = None) -> OptimumResult:
    """Resonance-condition optimum and the exact argmin of the steady occupation over omega.

    The argmin is bracketed on ``(2 nu, omega_max]`` and located as the root
    of the derivative of ``n_inf`` with respect to ``omega**2``. It exceeds
    ``omegaOpt`` at finite ``gamma`` because the resonance condition ignores
    the ``gamma**2 nu**2`` width term.
    """
    if not delta < 0:
        raise RegimeError(f"cooling optimum needs delta < 0, got {delta}")
    if not nu > 0:
        raise ParameterError(f"nu must be > 0, got {nu}")
    omega_opt = resonance_omega(nu, delta)
    n_opt = (gamma / (4.0 * abs(delta))) ** 2
    hi = omega_max if omega_max is not None else 10.0 * omega_opt
    lo = 2.0 * nu
    if hi <= lo:
        raise ParameterError("omega_max must exceed 2 nu")

    c4 = 4.0 * nu * (nu - delta)
    w2 = 4.0 * nu * nu

    def stationarity(u):
        # d n_inf / d(omega^2) up to a positive factor
        return 2.0 * (u - c4) * (u - w2) - (u - c4) ** 2 - 4.0 * gamma ** 2 * nu ** 2

    lo_u, hi_u = w2, hi * hi
    if stationarity(hi_u) <= 0:
        om = hi
    else:
        u = brentq(stationarity, lo_u, hi_u, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        om = math.sqrt(u)
    return OptimumResult(omega_opt, n_opt, om, float(closed_form_n_inf(nu, delta, gamma, om)))
