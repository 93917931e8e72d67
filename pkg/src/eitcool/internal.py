"""Internal dynamics of the three-level Lambda atom (hbar = 1).

Basis ordering is ``(|e>, |g1>, |g2>)``. Superoperators act on row-major
vectorised density matrices, ``vec(A rho B) = kron(A, B.T) vec(rho)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateCouplingError, NonUniqueSteadyStateError,
                     SingularBlochMatrixError, UnstableSystemError)
from .params import Geometry, LambdaParams

E, G1, G2 = 0, 1, 2

# k-projections giving unit effective Lamb-Dicke parameter
UNIT_GEOMETRY = Geometry(0.5, 0.5, 0.0, math.pi)


def _ket(i, dim=3):
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def _op(i, j, dim=3):
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def build_hamiltonian(params: LambdaParams) -> np.ndarray:
    h = np.zeros((3, 3), dtype=complex)
    h[G1, G1] = h[G2, G2] = -params.delta
    h[E, G1] = h[G1, E] = 0.5 * params.omega1
    h[E, G2] = h[G2, E] = 0.5 * params.omega2
    return h


def decay_operators(params: LambdaParams) -> list:
    """Jump operators ``sqrt(gamma_j) |g_j><e|`` of the internal dissipator."""
    return [math.sqrt(params.gamma1) * _op(G1, E), math.sqrt(params.gamma2) * _op(G2, E)]


def lindblad_superoperator(h: np.ndarray, c_ops) -> np.ndarray:
    n = h.shape[0]
    eye = np.eye(n)
    L = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in c_ops:
        cdc = c.conj().T @ c
        L += np.kron(c, c.conj()) - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return L


def liouvillian(params: LambdaParams) -> np.ndarray:
    return lindblad_superoperator(build_hamiltonian(params), decay_operators(params))


def null_steady_state(L: np.ndarray, dim: int, rtol: float = 1e-10) -> np.ndarray:
    """Unique trace-one density matrix in the kernel of ``L``."""
    _, s, vh = np.linalg.svd(L)
    null_dim = int(np.sum(s <= rtol * s[0]))
    if null_dim != 1:
        raise NonUniqueSteadyStateError(
            f"steady state is not unique: kernel dimension {null_dim}")
    rho = vh[-1].conj().reshape(dim, dim)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    # nearest density matrix: clip the rounding-level negative eigenvalues
    w, v = np.linalg.eigh(rho)
    if w.min() < 0:
        w = np.clip(w, 0.0, None)
        rho = (v * (w / w.sum())) @ v.conj().T
    return rho


@dataclass(frozen=True)
class DressedDecomposition:
    theta: float
    deltaOmegaPlus: float
    deltaOmegaMinus: float
    gammaPlus: float
    gammaMinus: float
    darkState: np.ndarray
    psiC: np.ndarray
    psiPlus: np.ndarray
    psiMinus: np.ndarray


def dark_state(params: LambdaParams) -> np.ndarray:
    om = params.omega
    return (params.omega2 * _ket(G1) - params.omega1 * _ket(G2)) / om


def dressed_decomposition(params: LambdaParams) -> DressedDecomposition:
    om, d = params.omega, params.delta
    if om <= 0:
        raise DegenerateCouplingError("dressed states need omega > 0")
    root = math.hypot(d, om)
    # cancellation-free: the large-magnitude root first, the other from the product -omega^2/4
    if d <= 0:
        plus = 0.5 * (d - root)
        minus = -0.25 * om * om / plus
        tan_theta = (root - d) / om
    else:
        minus = 0.5 * (d + root)
        plus = -0.25 * om * om / minus
        tan_theta = om / (root + d)
    theta = math.atan(tan_theta)
    c, s = math.cos(theta), math.sin(theta)
    psi_c = (params.omega1 * _ket(G1) + params.omega2 * _ket(G2)) / om
    e = _ket(E)
    return DressedDecomposition(
        theta=theta,
        deltaOmegaPlus=plus,
        deltaOmegaMinus=minus,
        gammaPlus=params.gamma * c * c,
        gammaMinus=params.gamma * s * s,
        darkState=dark_state(params),
        psiC=psi_c,
        psiPlus=c * e + s * psi_c,
        psiMinus=s * e - c * psi_c,
    )


def internal_steady_state(params: LambdaParams) -> np.ndarray:
    return null_steady_state(liouvillian(params), 3)


# --- Bloch-vector representation -------------------------------------------

def sigma_operators() -> list:
    """The eight operators whose expectation values form the Bloch vector."""
    return [_op(G1, G1), _op(G2, G2), _op(G1, E), _op(E, G1),
            _op(G2, E), _op(E, G2), _op(G2, G1), _op(G1, G2)]


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([np.trace(s @ rho) for s in sigma_operators()])


@dataclass(frozen=True)
class BlochSystem:
    M: np.ndarray
    B: np.ndarray
    sigmaSt: np.ndarray

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.M @ self.sigmaSt + self.B)))


def bloch_matrices(params: LambdaParams):
    """``M`` and ``B`` of ``d<sigma>/dt = M <sigma> + B``, excited population eliminated by the trace."""
    o1, o2, d, g = params.omega1, params.omega2, params.delta, params.gamma
    g1, g2 = params.gamma1, params.gamma2
    a, b = 0.5j * o1, 0.5j * o2
    M = np.zeros((8, 8), dtype=complex)
    M[0, [0, 1, 2, 3]] = [-g1, -g1, -a, a]
    M[1, [0, 1, 4, 5]] = [-g2, -g2, -b, b]
    M[2, [0, 1, 2, 7]] = [-2 * a, -a, -(0.5 * g + 1j * d), -b]
    M[3, [0, 1, 3, 6]] = [2 * a, a, -(0.5 * g - 1j * d), b]
    M[4, [0, 1, 4, 6]] = [-b, -2 * b, -(0.5 * g + 1j * d), -a]
    M[5, [0, 1, 5, 7]] = [b, 2 * b, -(0.5 * g - 1j * d), a]
    M[6, [3, 4]] = [b, -a]
    M[7, [2, 5]] = [-b, a]
    B = np.array([g1, g2, a, -a, b, -b, 0, 0], dtype=complex)
    return M, B


def bloch_system(params: LambdaParams) -> BlochSystem:
    M, B = bloch_matrices(params)
    if np.linalg.cond(M) > 1e13:
        raise SingularBlochMatrixError("Bloch matrix is singular for these parameters")
    return BlochSystem(M, B, np.linalg.solve(M, -B))


# --- fluctuation spectrum --------------------------------------------------

def gradient_operator(params: LambdaParams, geom: Geometry) -> np.ndarray:
    """First-order term of the light coupling in the position (units where k_j x_ref = eta_j)."""
    v = np.zeros((3, 3), dtype=complex)
    for g, kc, om in ((G1, geom.kcos1, params.omega1), (G2, geom.kcos2, params.omega2)):
        v[E, g] += 0.5j * kc * om
        v[g, E] -= 0.5j * kc * om
    return v


def spectral_abscissa(M: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(M).real))


def fluctuation_spectrum(params: LambdaParams, geom: Geometry = UNIT_GEOMETRY, nu=0.0, *,
                         system: BlochSystem | None = None):
    """One-sided spectrum ``S(nu) = int_0^inf G(tau) exp(i nu tau) dtau`` of the gradient operator.

    Evaluated by the regression theorem on the Bloch system. ``G`` is the
    correlation ``Tr{V1 exp(L0 tau)(V1 rho_St)}``. ``nu`` may be a scalar or
    an array; the result has matching shape. With the default geometry the
    effective Lamb-Dicke parameter is one, and ``2 Re S(-+nu)`` are the
    sideband rates ``A+-`` per unit ``eta**2``.
    """
    system = system or bloch_system(params)
    M, B = system.M, system.B
    if spectral_abscissa(M) >= 0:
        raise UnstableSystemError("Bloch matrix has an eigenvalue with non-negative real part")

    sig = sigma_operators()
    rho = steady_density(system.sigmaSt)
    v1 = gradient_operator(params, geom)
    x0 = v1 @ rho
    init = np.array([np.trace(s @ x0) for s in sig])
    trace0 = np.trace(x0)
    alpha1 = 0.5j * geom.kcos1 * params.omega1
    alpha2 = 0.5j * geom.kcos2 * params.omega2
    readout = np.zeros(8, dtype=complex)
    readout[[2, 3, 4, 5]] = [-alpha1, alpha1, -alpha2, alpha2]

    nus = np.atleast_1d(np.asarray(nu, dtype=float)).ravel()
    out = np.empty(nus.shape, dtype=complex)
    eye = np.eye(8)
    for k, w in enumerate(nus):
        rhs = init.copy()
        if abs(trace0) > 1e-14:
            rhs = rhs + B * trace0 / (-1j * w)
        out[k] = readout @ np.linalg.solve(-1j * w * eye - M, rhs)
    return out[0] if np.ndim(nu) == 0 else out.reshape(np.shape(nu))


def steady_density(sigma: np.ndarray) -> np.ndarray:
    """Rebuild the 3x3 density matrix from a Bloch vector."""
    rho = np.zeros((3, 3), dtype=complex)
    rho[G1, G1], rho[G2, G2] = sigma[0], sigma[1]
    rho[E, E] = 1.0 - sigma[0] - sigma[1]
    rho[E, G1], rho[G1, E] = sigma[2], sigma[3]
    rho[E, G2], rho[G2, E] = sigma[4], sigma[5]
    rho[G1, G2], rho[G2, G1] = sigma[6], sigma[7]
    return rho


def excitation_spectrum(params: LambdaParams, probe_detunings, geom: Geometry = UNIT_GEOMETRY):
    """Probe excitation profile ``I(deltaP)`` normalised to unit peak.

    The probe offset from the pump is ``delta - deltaP``; the profile is the
    absorptive part ``2 Re S`` at that offset, so the dark resonance at
    ``deltaP = delta`` is an exact zero.
    """
    dp = np.asarray(probe_detunings, dtype=float)
    values = np.maximum(0.0, 2.0 * fluctuation_spectrum(params, geom, params.delta - dp).real)
    peak = values.max() if values.size else 0.0
    return values / peak if peak > 0 else values
