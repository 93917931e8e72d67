"""Physical parameters of the trapped Lambda atom.

Every frequency-like quantity (Rabi frequencies, detuning, decay rates, trap
frequency) is an angular frequency in one shared unit, called "MHz-angular"
throughout (rad/us). Only ratios enter the results, so any common unit works;
the unit matters only when converting the trap frequency to a length scale.
Energies are expressed in the same unit with hbar = 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.constants import hbar as HBAR_SI

from .errors import ParameterError

# rad/s per unit of the frequency fields
FREQUENCY_UNIT_SI = 1.0e6

PATTERNS = ("isotropic", "dipole", "custom")


@dataclass(frozen=True)
class LambdaParams:
    """Laser and decay parameters of the driven Lambda system.

    ``delta`` follows the atomic-minus-laser convention, so ``delta < 0`` is
    blue detuning. When neither branching rate is given the decay is split
    evenly; when only one is given the other takes the remainder.
    """

    omega1: float
    omega2: float
    delta: float
    gamma: float
    gamma1: Optional[float] = None
    gamma2: Optional[float] = None

    def __post_init__(self):
        for name in ("omega1", "omega2", "delta", "gamma"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if self.omega1 < 0 or self.omega2 < 0:
            raise ParameterError("omega1 and omega2 must be >= 0")
        if self.omega1 + self.omega2 <= 0:
            raise ParameterError("omega1 + omega2 must be > 0")

        g1, g2 = self.gamma1, self.gamma2
        if g1 is None and g2 is None:
            g1 = g2 = 0.5 * self.gamma
        elif g1 is None:
            g1 = self.gamma - g2
        elif g2 is None:
            g2 = self.gamma - g1
        if g1 < 0 or g2 < 0:
            raise ParameterError(f"branching rates must be >= 0, got gamma1={g1}, gamma2={g2}")
        if abs(g1 + g2 - self.gamma) > 1e-12 * self.gamma:
            raise ParameterError(
                f"gamma1 + gamma2 must equal gamma: {g1} + {g2} != {self.gamma}"
            )
        object.__setattr__(self, "gamma1", float(g1))
        object.__setattr__(self, "gamma2", float(g2))

    @property
    def omega(self) -> float:
        return math.hypot(self.omega1, self.omega2)

    def with_branching(self, ratio: float) -> "LambdaParams":
        """Same total decay rate with ``gamma1/gamma2 = ratio``."""
        g2 = self.gamma / (1.0 + ratio)
        return LambdaParams(self.omega1, self.omega2, self.delta, self.gamma,
                            self.gamma - g2, g2)

    def scaled(self, factor: float) -> "LambdaParams":
        return LambdaParams(self.omega1 * factor, self.omega2 * factor,
                            self.delta * factor, self.gamma * factor,
                            self.gamma1 * factor, self.gamma2 * factor)


def _pattern_density(pattern: str):
    if pattern == "isotropic":
        return lambda u: 0.5 * np.ones_like(u)
    if pattern == "dipole":
        # dipole along the motional axis
        return lambda u: 0.75 * (1.0 - u ** 2)
    raise ParameterError(f"no analytic density for pattern {pattern!r}")


@dataclass(frozen=True)
class Geometry:
    """Beam geometry and emission pattern.

    ``eta1``, ``eta2`` are the bare Lamb-Dicke parameters ``k_j x0``;
    ``phi1``, ``phi2`` the beam angles to the motional axis. A ``custom``
    pattern is a discrete table of ``cosphi`` nodes with weights, normalised
    on construction.
    """

    eta1: float
    eta2: float
    phi1: float = 0.0
    phi2: float = math.pi
    pattern: str = "isotropic"
    custom_nodes: tuple = ()
    custom_weights: tuple = ()

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ParameterError(f"unknown emission pattern {self.pattern!r}; expected one of {PATTERNS}")
        if self.eta1 < 0 or self.eta2 < 0:
            raise ParameterError("eta1 and eta2 must be >= 0")
        if self.pattern == "custom":
            nodes = np.asarray(self.custom_nodes, dtype=float)
            weights = np.asarray(self.custom_weights, dtype=float)
            if nodes.size == 0 or nodes.shape != weights.shape:
                raise ParameterError("custom pattern needs matching, non-empty node and weight tables")
            if np.any(np.abs(nodes) > 1) or np.any(weights < 0) or weights.sum() <= 0:
                raise ParameterError("custom pattern nodes must lie in [-1, 1] with non-negative weights")
            object.__setattr__(self, "custom_nodes", tuple(nodes.tolist()))
            object.__setattr__(self, "custom_weights", tuple((weights / weights.sum()).tolist()))

    @property
    def kcos1(self) -> float:
        return self.eta1 * math.cos(self.phi1)

    @property
    def kcos2(self) -> float:
        return self.eta2 * math.cos(self.phi2)

    @property
    def eta(self) -> float:
        """Effective Lamb-Dicke parameter of the two-photon gradient."""
        return self.kcos1 - self.kcos2

    @property
    def alpha(self) -> float:
        u, w = self.emission_nodes()
        return float(np.sum(w * u ** 2))

    def zeta(self, n_mean: float = 0.0) -> float:
        return abs(self.eta) * math.sqrt(2.0 * n_mean + 1.0)

    def emission_nodes(self, order: int = 3):
        """Quadrature ``(cosphi, weight)`` over the emission pattern.

        Gauss-Legendre nodes weighted by the pattern density and renormalised
        to unit total weight, so the dissipator is complete at any order. For
        the analytic patterns (polynomials of degree <= 2) ``order >= 3``
        also reproduces the second moment exactly.
        """
        if self.pattern == "custom":
            return np.array(self.custom_nodes), np.array(self.custom_weights)
        if order < 1:
            raise ParameterError(f"quadrature order must be >= 1, got {order}")
        u, w = np.polynomial.legendre.leggauss(order)
        w = w * _pattern_density(self.pattern)(u)
        return u, w / w.sum()

    @classmethod
    def counterpropagating(cls, eta0: float, **kwargs) -> "Geometry":
        """Beams along +x and -x with ``eta1 = eta2 = eta0`` (effective eta = 2 eta0)."""
        return cls(eta0, eta0, 0.0, math.pi, **kwargs)


@dataclass(frozen=True)
class TrapParams:
    nu: float
    nmax: int = 12
    mass: Optional[float] = None  # kg, only needed for absolute lengths

    def __post_init__(self):
        if not (self.nu > 0 and np.isfinite(self.nu)):
            raise ParameterError(f"trap frequency nu must be > 0, got {self.nu}")
        if int(self.nmax) != self.nmax or self.nmax < 1:
            raise ParameterError(f"nmax must be an integer >= 1, got {self.nmax}")
        object.__setattr__(self, "nmax", int(self.nmax))
        if self.mass is not None and not self.mass > 0:
            raise ParameterError(f"mass must be > 0, got {self.mass}")

    def _need_mass(self):
        if self.mass is None:
            raise ParameterError("trap mass is required for absolute length scales")

    @property
    def x0(self) -> float:
        """Ground-state position width in metres."""
        self._need_mass()
        return math.sqrt(HBAR_SI / (2.0 * self.mass * self.nu * FREQUENCY_UNIT_SI))

    @property
    def p0(self) -> float:
        self._need_mass()
        return math.sqrt(HBAR_SI * self.mass * self.nu * FREQUENCY_UNIT_SI / 2.0)


@dataclass(frozen=True)
class ProbeParams:
    omegaP: float
    deltaP: float = 0.0

    def check_weak(self, params: LambdaParams, ratio: float = 0.1) -> bool:
        """Warn when the probe is not weak compared with both drives."""
        weak = self.omegaP <= ratio * min(params.omega1, params.omega2)
        if not weak:
            warnings.warn(
                f"probe Rabi frequency {self.omegaP} is not << min(omega1, omega2)",
                RuntimeWarning, stacklevel=2)
        return weak


@dataclass(frozen=True)
class DerivedSet:
    omega: float
    eta: float
    alpha: float
    x0: Optional[float] = None

    def zeta(self, n_mean: float = 0.0) -> float:
        return abs(self.eta) * math.sqrt(2.0 * n_mean + 1.0)


def derived_quantities(params: LambdaParams, geom: Geometry, trap: TrapParams) -> DerivedSet:
    x0 = trap.x0 if trap.mass is not None else None
    return DerivedSet(omega=params.omega, eta=geom.eta, alpha=geom.alpha, x0=x0)
