"""Bloch-Redfield generator for the spin pair, its spectrum, and propagation.

The generator acts on density matrices flattened row-major in the H_S eigenbasis,
``(a, b) -> 4 a + b``:

    d rho_ab / dt = -i w_ab rho_ab - sum_mn R_abmn rho_mn

No secular approximation is made.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .bath import DEFAULT_QUAD, BathParams, QuadratureSpec, RateTable
from .model import ModelParams, SpinPairModel, build_model
from .operators import DensityMatrix, EigResult, general_eig, pauli
from .sweep import GridMap, grid_map, run_grid

REAL_TOL = 1e-9
POSITIVITY_TOL = 1e-7


class PositivityWarning(UserWarning):
    pass


class DefectiveSpectrumError(RuntimeError):
    pass


@dataclass(frozen=True)
class RedfieldGenerator:
    model: SpinPairModel
    bath: BathParams
    g_matrix: np.ndarray
    tensor: np.ndarray = field(repr=False)
    include_lamb_shift: bool = True

    def apply(self, rho_eigen: np.ndarray) -> np.ndarray:
        """Time derivative of an eigenbasis density matrix."""
        return (self.g_matrix @ np.asarray(rho_eigen).reshape(16)).reshape(4, 4)


def redfield_tensor(s: np.ndarray, gp: np.ndarray, gm: np.ndarray) -> np.ndarray:
    """``R[a, b, m, n]`` from coupling elements ``s`` and rate matrices.

    ``gp[x, y] = Gamma^+(w_xy)`` and ``gm[x, y] = Gamma^-(w_xy)``.
    """
    eye = np.eye(4)
    p = s * gp  # p[r, m] = S_rm G+(w_rm)
    q = s * gm  # q[n, r] = S_nr G-(w_nr)
    t1 = np.einsum("bn,am->abmn", eye, s @ p)
    t2 = np.einsum("am,nb->abmn", p, s)
    t3 = np.einsum("am,nb->abmn", eye, q @ s)
    t4 = np.einsum("am,nb->abmn", s, q)
    return t1 - t2 + t3 - t4


def build_generator(model: SpinPairModel, bath: BathParams, quad: QuadratureSpec = DEFAULT_QUAD,
                    include_lamb_shift: bool = True, rates: RateTable | None = None) -> RedfieldGenerator:
    if rates is None:
        rates = RateTable(bath, quad, include_lamb_shift)
    w = model.bohr_frequencies
    gp = rates.matrix(w, +1)
    gm = rates.matrix(w, -1)
    r = redfield_tensor(model.s_matrix, gp, gm)
    g = -r.reshape(16, 16) - 1j * np.diag(w.reshape(16))
    g.setflags(write=False)
    return RedfieldGenerator(model, bath, g, r, include_lamb_shift)


@dataclass(frozen=True)
class GeneratorSpectrum:
    """Eigen-decomposition of a generator, sorted by decreasing real part.

    ``right[:, k]`` reshaped to 4x4 is mode ``k`` in the eigenbasis; ``left`` is
    biorthonormal to it.
    """

    model: SpinPairModel
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    min_overlap: float
    defective: bool
    residual: float

    def mode(self, k: int) -> np.ndarray:
        return self.right[:, k].reshape(4, 4)

    def is_real(self, tol: float = REAL_TOL) -> np.ndarray:
        return np.abs(self.eigenvalues.imag) < tol

    def counts(self, tol: float = REAL_TOL) -> tuple[int, int]:
        """(number of real eigenvalues, number of conjugate pairs)."""
        real = int(np.sum(self.is_real(tol)))
        return real, (len(self.eigenvalues) - real) // 2

    def amplitudes(self, rho0_eigen: np.ndarray) -> np.ndarray:
        return self.left.conj().T @ np.asarray(rho0_eigen).reshape(16)

    def steady_state(self) -> np.ndarray:
        """Trace-normalized null mode, in the computational basis."""
        k = int(np.argmin(np.abs(self.eigenvalues)))
        m = self.mode(k)
        m = m / np.trace(m)
        return self.model.to_computational(0.5 * (m + m.conj().T))


def spectrum(gen: RedfieldGenerator) -> GeneratorSpectrum:
    eig: EigResult = general_eig(gen.g_matrix)
    lam = eig.eigenvalues
    # deterministic order: slowest decay first, then by frequency
    keys = np.lexsort((np.round(lam.imag, 10), np.round(-lam.real, 12)))
    lam = lam[keys]
    right = eig.right[:, keys]
    left = eig.left[:, keys]
    res = float(np.max(np.linalg.norm(gen.g_matrix @ right - right * lam, axis=0)))
    return GeneratorSpectrum(gen.model, lam, right, left, eig.min_overlap, eig.defective, res)


@dataclass(frozen=True)
class ModeWeight:
    index: int
    rate: float
    frequency: float
    weight: float
    amplitude: complex

    @property
    def oscillatory(self) -> bool:
        return abs(self.frequency) >= REAL_TOL


@dataclass(frozen=True)
class ModeRanking:
    """Modes ordered by weight in one observable (ties broken by index)."""

    modes: tuple[ModeWeight, ...]

    def oscillatory(self) -> list[ModeWeight]:
        return [m for m in self.modes if m.oscillatory]

    def __getitem__(self, i: int) -> ModeWeight:
        return self.modes[i]


def _observable_eigen(model: SpinPairModel, observable: np.ndarray) -> np.ndarray:
    return model.to_eigen(np.asarray(observable, dtype=complex))


def mode_contributions(spec: GeneratorSpectrum, observable: np.ndarray, initial: DensityMatrix) -> np.ndarray:
    """Signed amplitude of each mode in ``<O>(t) = sum_k a_k exp(lam_k t)``."""
    o = _observable_eigen(spec.model, observable)
    c = spec.amplitudes(spec.model.to_eigen(initial.mat))
    # tr(O r_k) with r_k reshaped row-major
    traces = np.einsum("ij,jik->k", o, spec.right.reshape(4, 4, 16))
    return traces * c


def rank_modes(spec: GeneratorSpectrum, observable: np.ndarray, initial: DensityMatrix) -> ModeRanking:
    if spec.defective:
        raise DefectiveSpectrumError("mode ranking needs a diagonalizable generator")
    amp = mode_contributions(spec, observable, initial)
    weights = np.abs(amp)
    order = sorted(range(16), key=lambda k: (-weights[k], k))
    lam = spec.eigenvalues
    modes = tuple(ModeWeight(k, float(-lam[k].real), float(lam[k].imag), float(weights[k]), complex(amp[k]))
                  for k in order)
    return ModeRanking(modes)


def signal_from_modes(spec: GeneratorSpectrum, observable: np.ndarray, initial: DensityMatrix,
                      times: np.ndarray) -> np.ndarray:
    amp = mode_contributions(spec, observable, initial)
    return np.real(np.exp(np.outer(times, spec.eigenvalues)) @ amp)


@dataclass(frozen=True)
class SlowModePair:
    """The two slow oscillatory modes carrying the local spin signals.

    ``rate1 <= rate2`` are decay rates (``-Re lambda``); ``gap = rate1 - rate2 <= 0``.
    """

    rate1: float
    rate2: float
    frequency1: float
    frequency2: float
    index1: int
    index2: int

    @property
    def gap(self) -> float:
        return self.rate1 - self.rate2


def select_slow_pair(spec: GeneratorSpectrum, initial: DensityMatrix,
                     observables: Sequence[np.ndarray] | None = None, candidates: int = 3) -> SlowModePair:
    """Among the ``candidates`` slowest oscillatory modes (one per conjugate pair),
    keep the two with the largest weight in the observables (max over observables).
    """
    if observables is None:
        observables = (pauli("x", 1), pauli("x", 2))
    if spec.defective:
        raise DefectiveSpectrumError("mode selection needs a diagonalizable generator")
    weights = np.max([np.abs(mode_contributions(spec, o, initial)) for o in observables], axis=0)
    lam = spec.eigenvalues
    osc = [k for k in range(16) if lam[k].imag >= REAL_TOL]
    osc.sort(key=lambda k: (-lam[k].real, k))
    pool = osc[:candidates]
    if len(pool) < 2:
        raise ValueError("fewer than two oscillatory modes available")
    best = sorted(pool, key=lambda k: (-weights[k], k))[:2]
    best.sort(key=lambda k: (-lam[k].real, k))
    k1, k2 = best
    return SlowModePair(float(-lam[k1].real), float(-lam[k2].real), float(lam[k1].imag), float(lam[k2].imag), k1, k2)


# -- propagation ---------------------------------------------------------------

@dataclass(frozen=True)
class PositivityRecord:
    worst_eigenvalue: float
    time: float
    n_violations: int


@dataclass(frozen=True)
class Trajectory:
    """States on a time grid (computational basis) plus cached local observables."""

    times: np.ndarray
    states: np.ndarray
    sigma1x: np.ndarray
    sigma2x: np.ndarray
    sigma1z: np.ndarray
    sigma2z: np.ndarray
    min_eig: np.ndarray
    method: str = "spectral"
    positivity: PositivityRecord | None = None

    @property
    def trace_err(self) -> np.ndarray:
        return np.abs(np.trace(self.states, axis1=1, axis2=2) - 1.0)

    def state(self, i: int) -> DensityMatrix:
        return DensityMatrix(self.states[i])

    def observable(self, name: str) -> np.ndarray:
        return getattr(self, name)


_OBS = {name: pauli(name[-1], int(name[-2])) for name in ("sigma1x", "sigma2x", "sigma1z", "sigma2z")}


def trajectory_from_states(times: np.ndarray, states: np.ndarray, method: str,
                           positivity_tol: float = POSITIVITY_TOL) -> Trajectory:
    times = np.asarray(times, dtype=float)
    herm = 0.5 * (states + np.conj(np.swapaxes(states, 1, 2)))
    min_eig = np.linalg.eigvalsh(herm)[:, 0]
    obs = {k: np.real(np.einsum("ij,tji->t", op, states)) for k, op in _OBS.items()}
    record = None
    bad = min_eig < -positivity_tol
    if np.any(bad):
        i = int(np.argmin(min_eig))
        record = PositivityRecord(float(min_eig[i]), float(times[i]), int(np.sum(bad)))
        warnings.warn(f"state lost positivity: min eigenvalue {min_eig[i]:.3e} at t={times[i]:.4g} "
                      f"({record.n_violations} samples below -{positivity_tol:g})", PositivityWarning,
                      stacklevel=3)
    for arr in (times, states, min_eig, *obs.values()):
        arr.setflags(write=False)
    return Trajectory(times, states, obs["sigma1x"], obs["sigma2x"], obs["sigma1z"], obs["sigma2z"],
                      min_eig, method, record)


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-D grid")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be ascending and non-negative")
    return times


def propagate(gen: RedfieldGenerator, initial: DensityMatrix, times, method: str = "auto",
              spec: GeneratorSpectrum | None = None, positivity_tol: float = POSITIVITY_TOL,
              ode_rtol: float = 1e-10, ode_atol: float = 1e-12) -> Trajectory:
    """Evolve ``initial`` over ``times``.

    ``method`` is ``"spectral"`` (mode expansion), ``"ode"`` (adaptive Runge-Kutta)
    or ``"auto"``, which uses the mode expansion unless the spectrum is defective.
    """
    times = _check_times(times)
    model = gen.model
    rho0 = model.to_eigen(np.asarray(initial.mat, dtype=complex))
    if method not in ("auto", "spectral", "ode"):
        raise ValueError(f"unknown propagation method {method!r}")
    if method != "ode":
        spec = spec if spec is not None else spectrum(gen)
        if spec.defective:
            if method == "spectral":
                raise DefectiveSpectrumError(f"generator is defective (min overlap {spec.min_overlap:.2e})")
            method = "ode"
        else:
            method = "spectral"
    if method == "spectral":
        c = spec.amplitudes(rho0)
        vecs = (np.exp(np.outer(times, spec.eigenvalues)) * c) @ spec.right.T
    else:
        g = np.asarray(gen.g_matrix)
        sol = solve_ivp(lambda t, y: g @ y, (0.0, float(times[-1])), rho0.reshape(16).astype(complex),
                        method="DOP853", t_eval=times, rtol=ode_rtol, atol=ode_atol)
        if not sol.success:
            raise RuntimeError(f"time stepping failed: {sol.message}")
        vecs = sol.y.T
    u = model.eigenbasis
    states = np.einsum("ia,tab,jb->tij", u, vecs.reshape(-1, 4, 4), u.conj())
    return trajectory_from_states(times, states, method, positivity_tol)


def _gap_cell(delta: float, g: float, bath: BathParams, initial: DensityMatrix, quad: QuadratureSpec,
              include_lamb_shift: bool) -> SlowModePair:
    model = build_model(ModelParams(omega2=1.0 + delta, g=g))
    spec = spectrum(build_generator(model, bath, quad, include_lamb_shift))
    return select_slow_pair(spec, initial)


def gap_map(delta_grid, g_grid, bath: BathParams, initial: DensityMatrix, quad: QuadratureSpec = DEFAULT_QUAD,
            include_lamb_shift: bool = True, workers: int = 1) -> GridMap:
    """Decay-rate separation ``rate1 - rate2`` of the slow pair over a (delta, g) grid."""
    fn = partial(_gap_cell, bath=bath, initial=initial, quad=quad, include_lamb_shift=include_lamb_shift)
    cells = run_grid(fn, delta_grid, g_grid, workers)
    return grid_map(cells, delta_grid, g_grid, lambda pair: pair.gap)
