"""Exact dynamics on the truncated internal (x) Fock space.

Composite states are ordered ``(internal, fock)``, i.e. index
``i * (nmax + 1) + n`` with internal basis ``(|e>, |g1>, |g2>)``. Positions
are in units of ``x0``, so ``exp(i k x cos(phi))`` is a displacement with
argument ``eta cos(phi)``.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh, expm
from scipy.optimize import brentq, curve_fit

from .errors import DimensionGuardError, NumericalError, ParameterError, TruncationError
from .internal import E, G1, G2, dark_state, lindblad_superoperator, null_steady_state
from .params import Geometry, LambdaParams, TrapParams

MAX_DIMENSION = 200
EDGE_TOL = 1e-8
THREADS_ENV = "EITCOOL_THREADS"


def position_matrix(nmax: int) -> np.ndarray:
    """Truncated ``a + a^dagger``."""
    off = np.sqrt(np.arange(1, nmax + 1, dtype=float))
    return np.diag(off, 1) + np.diag(off, -1)


def displacement_matrix(eta: float, nmax: int) -> np.ndarray:
    """``exp(i eta (a + a^dagger))`` on Fock states ``0..nmax``.

    Exponentiates the truncated Hermitian generator through its eigenbasis,
    so the result is exactly unitary on the truncated space; only the
    matrix elements near ``nmax`` differ from the untruncated operator.
    """
    if nmax < 1:
        raise ParameterError(f"nmax must be >= 1, got {nmax}")
    if eta == 0:
        return np.eye(nmax + 1, dtype=complex)
    if eta * eta * nmax > 1.0:
        warnings.warn(f"eta^2 nmax = {eta * eta * nmax:.3g}: displacement is contaminated by the "
                      "truncation edge", RuntimeWarning, stacklevel=2)
    w, v = eigh(position_matrix(nmax))
    return (v * np.exp(1j * eta * w)) @ v.conj().T


def _proj(i, j):
    m = np.zeros((3, 3), dtype=complex)
    m[i, j] = 1.0
    return m


@dataclass(frozen=True)
class JumpChannel:
    targetLevel: int           # 1 or 2
    cosphi: float
    weight: float              # gamma_j times the quadrature weight
    operator: np.ndarray       # |g_j><e| (x) exp(i eta_j cosphi (a + a^dagger))


@dataclass
class FullGenerator:
    hamiltonian: np.ndarray
    channels: list
    nmax: int
    params: LambdaParams
    geom: Geometry
    trap: TrapParams
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return 3 * (self.nmax + 1)

    @property
    def nfock(self) -> int:
        return self.nmax + 1

    @property
    def number_operator(self) -> np.ndarray:
        return np.kron(np.ones(3), np.arange(self.nfock, dtype=float))

    def completeness(self) -> np.ndarray:
        """``sum_c w c^dagger c``; equals ``gamma |e><e| (x) 1``."""
        return sum(ch.weight * ch.operator.conj().T @ ch.operator for ch in self.channels)

    def h_eff(self) -> np.ndarray:
        if "h_eff" not in self._cache:
            self._cache["h_eff"] = self.hamiltonian - 0.5j * self.completeness()
        return self._cache["h_eff"]

    def liouvillian(self) -> np.ndarray:
        if self.dim > MAX_DIMENSION:
            raise DimensionGuardError(f"composite dimension {self.dim} exceeds {MAX_DIMENSION}")
        if "L" not in self._cache:
            ops = [math.sqrt(ch.weight) * ch.operator for ch in self.channels]
            self._cache["L"] = lindblad_superoperator(self.hamiltonian, ops)
        return self._cache["L"]

    def product_state(self, internal, n: int) -> np.ndarray:
        fock = np.zeros(self.nfock, dtype=complex)
        fock[n] = 1.0
        return np.kron(np.asarray(internal, dtype=complex), fock)

    def dark_product_state(self, n: int = 0) -> np.ndarray:
        return self.product_state(dark_state(self.params), n)

    def composite_dark_state(self, n: int = 0) -> np.ndarray:
        """Dark superposition with the relative displacement on the |g2> branch."""
        fock = np.zeros(self.nfock, dtype=complex)
        fock[n] = 1.0
        disp = displacement_matrix(self.geom.eta, self.nmax) @ fock
        om = self.params.omega
        psi = np.zeros(self.dim, dtype=complex)
        psi[G1 * self.nfock:(G1 + 1) * self.nfock] = self.params.omega2 / om * fock
        psi[G2 * self.nfock:(G2 + 1) * self.nfock] = -self.params.omega1 / om * disp
        return psi

    def fock_distribution(self, psi: np.ndarray) -> np.ndarray:
        return np.sum(np.abs(psi.reshape(3, self.nfock)) ** 2, axis=0)


def interaction_matrix(params: LambdaParams, geom: Geometry, nmax: int) -> np.ndarray:
    d1 = displacement_matrix(geom.kcos1, nmax)
    d2 = displacement_matrix(geom.kcos2, nmax)
    v = 0.5 * (params.omega1 * np.kron(_proj(E, G1), d1) + params.omega2 * np.kron(_proj(E, G2), d2))
    return v + v.conj().T


def build_full_generator(params: LambdaParams, geom: Geometry, trap: TrapParams,
                         quadrature_order: int = 3) -> FullGenerator:
    nmax = trap.nmax
    nf = nmax + 1
    fock_eye = np.eye(nf)
    h_int = np.kron(-params.delta * (_proj(G1, G1) + _proj(G2, G2)), fock_eye)
    h_mec = np.kron(np.eye(3), trap.nu * np.diag(np.arange(nf, dtype=float)))
    h = h_int + h_mec + interaction_matrix(params, geom, nmax)

    u, w = geom.emission_nodes(quadrature_order)
    channels = []
    for level, rate, eta in ((1, params.gamma1, geom.eta1), (2, params.gamma2, geom.eta2)):
        target = G1 if level == 1 else G2
        for uq, wq in zip(u, w):
            if rate * wq == 0:
                continue
            op = np.kron(_proj(target, E), displacement_matrix(eta * uq, nmax))
            channels.append(JumpChannel(level, float(uq), float(rate * wq), op))
    return FullGenerator(h, channels, nmax, params, geom, trap)


# --- master equation ---------------------------------------------------------

@dataclass(frozen=True)
class MasterResult:
    times: np.ndarray
    rhos: np.ndarray            # (ntimes, dim, dim)
    meanN: np.ndarray
    trace: np.ndarray
    excited: np.ndarray


def _observables(gen: FullGenerator, rho):
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    nf = gen.nfock
    return diag @ gen.number_operator, diag.sum(axis=-1), diag[..., :nf].sum(axis=-1)


def master_evolve(gen: FullGenerator, rho0, times, method: str = "expm",
                  rtol: float = 1e-10, atol: float = 1e-12, edge_tol: float = EDGE_TOL) -> MasterResult:
    """Integrate the Lindblad equation of the composite system.

    ``method="expm"`` propagates with the exact exponential of the constant
    generator between output times; ``method="ode"`` uses adaptive DOP853.
    """
    L = gen.liouvillian()
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim == 1:
        rho0 = np.outer(rho0, rho0.conj())
    t = np.asarray(times, dtype=float)
    n = gen.dim
    if method == "expm":
        out = np.empty((t.size, n * n), dtype=complex)
        cache, t_prev, vec = {}, 0.0, rho0.reshape(-1)
        for k, tk in enumerate(t):
            key = round(tk - t_prev, 12)
            if key not in cache:
                cache[key] = expm(L * (tk - t_prev))
            vec = cache[key] @ vec
            out[k] = vec
            t_prev = tk
    elif method == "ode":
        span = (0.0, float(t[-1])) if t[0] >= 0 else (float(t[0]), float(t[-1]))
        sol = solve_ivp(lambda _, y: L @ y, span, rho0.reshape(-1), method="DOP853",
                        t_eval=t, rtol=rtol, atol=atol)
        if not sol.success:
            raise NumericalError(f"master equation integration failed: {sol.message}")
        out = sol.y.T
    else:
        raise ParameterError(f"unknown master-equation method {method!r}")
    rhos = out.reshape(t.size, n, n)
    rhos = 0.5 * (rhos + np.conj(np.swapaxes(rhos, 1, 2)))
    mean_n, tr, exc = _observables(gen, rhos)
    fock = np.real(np.einsum("tii->ti", rhos)).reshape(t.size, 3, gen.nfock).sum(axis=1)
    edge = fock[:, -2:].sum(axis=1).max()
    if edge > edge_tol:
        raise TruncationError(f"top Fock occupation {edge:.3g} exceeds {edge_tol:g}; increase nmax")
    return MasterResult(t, rhos, mean_n, tr, exc)


def master_steady_state(gen: FullGenerator) -> np.ndarray:
    return null_steady_state(gen.liouvillian(), gen.dim)


# --- quantum jumps -----------------------------------------------------------

@dataclass(frozen=True)
class TrajectoryResult:
    times: np.ndarray
    meanN: np.ndarray
    populations: np.ndarray     # (ntimes, 3): e, g1, g2
    jumps: tuple                # ((time, channel index), ...)
    edge: np.ndarray = None     # occupation of the top two Fock levels


class _Propagator:
    """No-jump evolution ``exp(-i H_eff t)`` through the eigenbasis of ``H_eff``."""

    def __init__(self, h_eff: np.ndarray):
        lam, vec = np.linalg.eig(h_eff)
        self.lam = lam
        self.vec = vec
        self.inv = np.linalg.inv(vec)
        if np.linalg.cond(vec) > 1e8:
            raise NumericalError("non-Hermitian Hamiltonian is too close to defective")

    def coefficients(self, psi):
        return self.inv @ psi

    def state(self, coeff, t):
        return self.vec @ (coeff * np.exp(-1j * self.lam * t))


def _propagator(gen: FullGenerator) -> _Propagator:
    if "prop" not in gen._cache:
        gen._cache["prop"] = _Propagator(gen.h_eff())
    return gen._cache["prop"]


def mc_trajectory(gen: FullGenerator, psi0, times, seed: int, time_rtol: float = 1e-10,
                  edge_tol: float | None = None) -> TrajectoryResult:
    """One quantum-jump trajectory sampled at ``times``.

    Jump times are located where the no-jump norm crosses a uniform random
    threshold, to ``time_rtol`` relative precision; the channel is drawn in
    proportion to ``w ||c psi||^2``. Deterministic in ``seed``. The top-two
    Fock occupation is recorded at every output time; with ``edge_tol`` set
    a single trajectory exceeding it aborts (ensembles check the average).
    """
    rng = np.random.default_rng(np.uint64(seed % 2 ** 64))
    prop = _propagator(gen)
    t = np.asarray(times, dtype=float)
    nop = gen.number_operator
    nf = gen.nfock
    weights = np.array([ch.weight for ch in gen.channels])
    ops = [ch.operator for ch in gen.channels]

    psi = np.asarray(psi0, dtype=complex)
    norm0 = np.vdot(psi, psi).real
    if abs(norm0 - 1.0) > 1e-10:
        raise ParameterError("initial state must be normalised")
    coeff = prop.coefficients(psi)
    t_ref, t_lo = 0.0, 0.0
    threshold = rng.random()
    mean_n = np.empty(t.size)
    pops = np.empty((t.size, 3))
    edge = np.empty(t.size)
    jumps = []

    def norm2(tau):
        v = prop.state(coeff, tau - t_ref)
        return np.vdot(v, v).real

    for k, tk in enumerate(t):
        while True:
            phi = prop.state(coeff, tk - t_ref)
            nrm = np.vdot(phi, phi).real
            if nrm > threshold:
                break
            f = lambda tau: norm2(tau) - threshold
            if f(t_lo) <= 0:
                t_jump = t_lo
            else:
                t_jump = brentq(f, t_lo, tk, xtol=time_rtol * max(tk, 1.0), rtol=4 * np.finfo(float).eps)
            pre = prop.state(coeff, t_jump - t_ref)
            probs = weights * np.array([np.vdot(o @ pre, o @ pre).real for o in ops])
            idx = int(rng.choice(len(ops), p=probs / probs.sum()))
            post = ops[idx] @ pre
            post /= math.sqrt(np.vdot(post, post).real)
            jumps.append((float(t_jump), idx))
            coeff = prop.coefficients(post)
            t_ref = t_lo = t_jump
            threshold = rng.random()
        prob = np.abs(phi) ** 2 / nrm
        mean_n[k] = prob @ nop
        by_level = prob.reshape(3, nf)
        pops[k] = by_level.sum(axis=1)
        edge[k] = by_level.sum(axis=0)[-2:].sum()
        if edge_tol is not None and edge[k] > edge_tol:
            raise TruncationError(f"top Fock occupation {edge[k]:.3g} exceeds {edge_tol:g}")
        t_lo = tk
    return TrajectoryResult(t, mean_n, pops, tuple(jumps), edge)


@dataclass(frozen=True)
class EnsembleStats:
    times: np.ndarray
    meanN: np.ndarray
    stderr: np.ndarray
    nInf: float
    nInfErr: float
    samples: np.ndarray = field(repr=False)     # (ntraj, ntimes) per-trajectory <n>(t)
    tail: int = 0

    @property
    def ntraj(self) -> int:
        return self.samples.shape[0]


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_block(args):
    gen, psi0, times, seeds = args
    out = []
    for s in seeds:
        r = mc_trajectory(gen, psi0, times, s)
        out.append((r.meanN, r.edge))
    return out


def mc_ensemble(gen: FullGenerator, psi0, times, ntraj: int, seed_base: int = 0,
                workers: int | None = None, tail_fraction: float = 0.3,
                edge_tol: float = EDGE_TOL) -> EnsembleStats:
    """Mean and standard error of ``<n>(t)`` over seeded trajectories.

    Trajectory ``i`` uses seed ``seed_base + i``. The steady estimate
    ``nInf`` averages each trajectory over the final ``tail_fraction`` of
    the output times before taking the ensemble mean and standard error.
    Raises :class:`TruncationError` when the ensemble-averaged top-two Fock
    occupation exceeds ``edge_tol``.
    """
    if ntraj < 2:
        raise ParameterError("ntraj must be >= 2")
    seeds = [seed_base + i for i in range(ntraj)]
    nworkers = min(worker_count(workers), ntraj)
    _propagator(gen)
    if nworkers == 1:
        rows = _run_block((gen, psi0, times, seeds))
    else:
        blocks = [seeds[i::nworkers] for i in range(nworkers)]
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            results = list(pool.map(_run_block, [(gen, psi0, times, b) for b in blocks]))
        order = {s: row for b, res in zip(blocks, results) for s, row in zip(b, res)}
        rows = [order[s] for s in seeds]
    samples = np.array([r[0] for r in rows])
    edge = np.array([r[1] for r in rows]).mean(axis=0)
    if edge.max() > edge_tol:
        raise TruncationError(f"ensemble top Fock occupation {edge.max():.3g} exceeds {edge_tol:g}; "
                              "increase nmax")
    t = np.asarray(times, dtype=float)
    tail = max(1, int(round(tail_fraction * t.size)))
    per_traj = samples[:, -tail:].mean(axis=1)
    return EnsembleStats(
        times=t,
        meanN=samples.mean(axis=0),
        stderr=samples.std(axis=0, ddof=1) / math.sqrt(ntraj),
        nInf=float(per_traj.mean()),
        nInfErr=float(per_traj.std(ddof=1) / math.sqrt(ntraj)),
        samples=samples,
        tail=tail,
    )


def _relaxation(t, n0, rate, n_inf):
    return (n0 - n_inf) * np.exp(-rate * t) + n_inf


def fit_relaxation(times, mean_n, sigma=None, rate_guess: float | None = None):
    """Fit ``(n0 - n_inf) exp(-W t) + n_inf``; returns ``(W, n_inf, n0)``."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(mean_n, dtype=float)
    if rate_guess is None:
        rate_guess = 1.0 / max(t[-1] - t[0], 1e-300) * 3.0
    p0 = (y[0], rate_guess, y[-1])
    popt, _ = curve_fit(_relaxation, t, y, p0=p0, sigma=sigma, maxfev=20000)
    return float(popt[1]), float(popt[2]), float(popt[0])


def fitted_cooling_rate(stats: EnsembleStats, nboot: int = 200, seed: int = 0,
                        rate_guess: float | None = None):
    """Cooling rate of the ensemble mean with a bootstrap standard deviation."""
    rate, _, _ = fit_relaxation(stats.times, stats.meanN, rate_guess=rate_guess)
    rng = np.random.default_rng(seed)
    boot = np.empty(nboot)
    for b in range(nboot):
        idx = rng.integers(0, stats.ntraj, stats.ntraj)
        boot[b] = fit_relaxation(stats.times, stats.samples[idx].mean(axis=0), rate_guess=rate)[0]
    return rate, float(boot.std(ddof=1))


def dark_leakage_rate(gen: FullGenerator, n: int = 0, t_start: float | None = None,
                      t_stop: float | None = None) -> float:
    """Photon-emission rate out of the composite dark state under no-jump evolution.

    Measured as the logarithmic norm-decay rate of ``exp(-i H_eff t)`` applied
    to the dark superposition over ``[t_start, t_stop]`` (defaults: 20 and 40
    times the slowest internal relaxation time).
    """
    from .internal import dressed_decomposition

    d = dressed_decomposition(gen.params)
    t0 = 1.0 / min(d.gammaPlus, d.gammaMinus)
    t_start = 20.0 * t0 if t_start is None else t_start
    t_stop = 40.0 * t0 if t_stop is None else t_stop
    prop = _propagator(gen)
    c = prop.coefficients(gen.composite_dark_state(n))
    a, b = prop.state(c, t_start), prop.state(c, t_stop)
    return float(math.log(np.vdot(a, a).real / np.vdot(b, b).real) / (t_stop - t_start))
