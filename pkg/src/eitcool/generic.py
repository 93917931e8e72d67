"""Rate dynamics for an arbitrary non-degenerate discrete motional spectrum.

Lengths are measured in a reference unit ``x_ref`` for which the geometry's
Lamb-Dicke parameters are ``eta_j = k_j x_ref``; for a harmonic trap
``x_ref = x0`` and the position matrix is the usual ladder.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, null_space

from .errors import DegenerateSpectrumError, NumericalError, ParameterError
from .internal import bloch_system, fluctuation_spectrum
from .params import Geometry, LambdaParams

SPACING_MARGIN = 10.0


@dataclass(frozen=True)
class MotionSpectrum:
    energies: np.ndarray
    xElements: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        x = np.asarray(self.xElements, dtype=complex)
        if e.ndim != 1 or e.size < 2:
            raise ParameterError("spectrum needs at least two levels")
        if x.shape != (e.size, e.size):
            raise ParameterError(f"x-element matrix has shape {x.shape}, expected {(e.size, e.size)}")
        if np.any(np.diff(e) <= 0):
            raise DegenerateSpectrumError("energies must be strictly ascending")
        if np.max(np.abs(x - x.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(x))):
            raise ParameterError("x-element matrix is not Hermitian")
        if np.all(x.imag == 0):
            x = x.real
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "xElements", x)

    @property
    def size(self) -> int:
        return self.energies.size

    @property
    def min_gap(self) -> float:
        return float(np.min(np.diff(self.energies)))


def harmonic_spectrum(nu: float, nmax: int) -> MotionSpectrum:
    n = np.arange(nmax + 1)
    x = np.diag(np.sqrt(n[1:].astype(float)), 1)
    return MotionSpectrum(nu * (n + 0.5), x + x.T)


def box_position_elements(nlevels: int, length: float = 1.0) -> np.ndarray:
    """``<m|x|n>`` for a hard-wall box centred on the origin (levels counted from 1)."""
    m = np.arange(1, nlevels + 1)[:, None]
    n = np.arange(1, nlevels + 1)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (length / np.pi ** 2) * (((-1.0) ** (m - n) - 1.0) / (m - n) ** 2
                                     - ((-1.0) ** (m + n) - 1.0) / (m + n) ** 2)
    np.fill_diagonal(x, 0.0)
    return x


def box_spectrum(nlevels: int, ground_energy: float = 1.0, length: float = 1.0) -> MotionSpectrum:
    n = np.arange(1, nlevels + 1)
    return MotionSpectrum(ground_energy * n ** 2, box_position_elements(nlevels, length))


def coupling_coefficients(spectrum: MotionSpectrum) -> np.ndarray:
    return np.abs(spectrum.xElements) ** 2


def spacing_margin(params: LambdaParams, geom: Geometry, spectrum: MotionSpectrum) -> float:
    """``min gap / max_j(zeta_j Omega_j)`` with the ground-level position spread."""
    spread = np.sqrt(np.sum(np.abs(spectrum.xElements[0]) ** 2))
    drive = max(abs(geom.kcos1) * params.omega1, abs(geom.kcos2) * params.omega2) * spread
    return spectrum.min_gap / drive if drive > 0 else np.inf


def generic_rates(params: LambdaParams, geom: Geometry, spectrum: MotionSpectrum,
                  margin: float = SPACING_MARGIN, clip: float = 1e-12) -> np.ndarray:
    """Transition rates ``R[i, j]`` for level ``i -> j``; the diagonal is zero.

    ``R[i, j] = 2 Re[C_ij S(e_i - e_j)]``. Raises when the level spacing does
    not exceed the sideband coupling at all and warns when the margin is below
    ``margin``.
    """
    m = spacing_margin(params, geom, spectrum)
    if m <= 1.0:
        raise DegenerateSpectrumError(
            f"level spacing {spectrum.min_gap:g} does not exceed the sideband coupling (margin {m:.3g})")
    if m < margin:
        warnings.warn(f"spacing margin {m:.3g} below {margin:g}; perturbative rates are unreliable",
                      RuntimeWarning, stacklevel=2)
    C = coupling_coefficients(spectrum)
    e = spectrum.energies
    omega = e[:, None] - e[None, :]
    system = bloch_system(params)
    offdiag = ~np.eye(e.size, dtype=bool)
    R = np.zeros_like(C)
    R[offdiag] = 2.0 * (C[offdiag] * fluctuation_spectrum(params, geom, omega[offdiag], system=system)).real
    scale = max(np.max(np.abs(R)), np.finfo(float).tiny)
    if np.min(R) < -clip * scale:
        raise NumericalError(f"negative transition rate {np.min(R):.3g} beyond clipping tolerance")
    return np.where(R < 0, 0.0, R)


def generator_from_rates(R: np.ndarray) -> np.ndarray:
    """``dp/dt = G p`` with columns summing to zero."""
    G = R.T.copy()
    np.fill_diagonal(G, 0.0)
    G -= np.diag(G.sum(axis=0))
    return G


@dataclass(frozen=True)
class GenericSeries:
    times: np.ndarray
    populations: np.ndarray
    meanEnergy: np.ndarray | None = None


def generic_evolve(R: np.ndarray, populations0, times, energies=None) -> GenericSeries:
    p = np.asarray(populations0, dtype=float)
    if p.shape != (R.shape[0],):
        raise ParameterError("initial populations do not match the rate matrix")
    if abs(p.sum() - 1.0) > 1e-12 or np.any(p < 0):
        raise ParameterError("initial populations must be a normalised distribution")
    G = generator_from_rates(R)
    t = np.asarray(times, dtype=float)
    out = np.empty((t.size, p.size))
    cache, t_prev = {}, 0.0
    for k, tk in enumerate(t):
        key = round(tk - t_prev, 12)
        if key not in cache:
            cache[key] = expm(G * (tk - t_prev))
        p = cache[key] @ p
        out[k] = p
        t_prev = tk
    mean_e = out @ np.asarray(energies) if energies is not None else None
    return GenericSeries(t, out, mean_e)


def stationary_distribution(R: np.ndarray) -> np.ndarray:
    ker = null_space(generator_from_rates(R))
    if ker.shape[1] != 1:
        raise NumericalError(f"rate generator kernel has dimension {ker.shape[1]}")
    p = ker[:, 0].real
    return p / p.sum()


def energy_drift(R: np.ndarray, spectrum: MotionSpectrum, populations) -> float:
    """``d<e>/dt`` for the given populations; negative means cooling."""
    return float(spectrum.energies @ (generator_from_rates(R) @ np.asarray(populations)))


def tuned_omega(spectrum: MotionSpectrum, delta: float) -> float:
    """Total Rabi frequency placing the narrow resonance at the mean red-sideband frequency.

    Uses nearest-neighbour gaps as the red-sideband frequencies.
    """
    gap = float(np.mean(np.diff(spectrum.energies)))
    val = 4.0 * gap * (gap - delta)
    if val <= 0:
        raise ParameterError("no real Rabi frequency tunes the resonance for this detuning")
    return float(np.sqrt(val))
