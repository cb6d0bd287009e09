"""Exact pure-dephasing evolution of the spin pair when the coupling is longitudinal (g = 1).

With ``V_S = 2 (sigma_1^z + sigma_2^z)`` commuting with ``H_S``, each computational
matrix element evolves independently:

    rho_ab(t) = rho_ab(0) exp(-i w_ab t) exp(-(Gamma_ab(t) + i L_ab(t)))

``Gamma_ab = 2 (l_a - l_b)^2 int J w^-2 sin^2(w t/2) coth(beta w/2) dw`` and
``L_ab = (l_a^2 - l_b^2) int J w^-2 sin(w t) dw`` with ``l = (4, 0, 0, -4)``.
Both are scaled by ``spectral_weight``; the default 1/4 puts this channel on
the same bath normalization as the Redfield rates (see ``DephasingChannel``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .bath import (DEFAULT_QUAD, BathParams, QuadratureSpec, decoherence_regular, decoherence_regular_limit,
                   decoherence_singular, lamb_integral, lamb_integral_closed)
from .model import SpinPairModel
from .operators import DensityMatrix
from .redfield import Trajectory, trajectory_from_states

VS_EIGENVALUES = np.array([4.0, 0.0, 0.0, -4.0])
REDFIELD_WEIGHT = 0.25
# the oscillating part of the regular integral decays like exp(-min(wc, 2 pi/beta) t)
_TAIL_DECAY_LENGTHS = 40.0
_RAMP_LENGTHS = 10.0


@dataclass(frozen=True)
class _RegularTable:
    """``decoherence_regular`` by direct quadrature on the initial ramp ``t < t_ramp``,
    a cubic spline on ``[t_ramp, t_tail]`` and its limit beyond.
    """

    bath: BathParams
    quad: QuadratureSpec
    t_ramp: float
    t_tail: float
    limit: float
    spline: CubicSpline = field(repr=False)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.where(t >= self.t_tail, self.limit, self.spline(np.clip(t, self.t_ramp, self.t_tail)))
        for i in np.nonzero(t < self.t_ramp)[0]:
            out[i] = decoherence_regular(float(t[i]), self.bath, self.quad)
        return out


def _build_table(bath: BathParams, quad: QuadratureSpec, step: float) -> _RegularTable:
    rate = min(bath.omega_c, 2.0 * math.pi / bath.beta)
    t_tail = _TAIL_DECAY_LENGTHS / rate
    # the integral turns on over ~1/omega_c, too sharply for a uniform spline
    t_ramp = min(_RAMP_LENGTHS / bath.omega_c, 0.5 * t_tail)
    grid = np.linspace(t_ramp, t_tail, max(8, int(math.ceil((t_tail - t_ramp) / step))) + 1)
    vals = np.array([decoherence_regular(t, bath, quad) for t in grid])
    limit = decoherence_regular_limit(bath, quad)
    return _RegularTable(bath, quad, t_ramp, t_tail, limit, CubicSpline(grid, vals))


class DephasingChannel:
    """Closed-form dephasing map for a g = 1 model.

    ``spectral_weight`` multiplies both bath integrals.  Taken literally, the
    integrals give a long-time dephasing rate four times the one implied by the
    Redfield rates of :mod:`spinsync.bath` for the same ``J``; the default 1/4
    reconciles the two engines, ``1.0`` gives the bare formula.

    The regular part of the decoherence integral is tabulated lazily on a grid of
    step ``grid_step`` and interpolated; ``interpolate=False`` evaluates every
    time point by direct quadrature.  The Lamb phase uses its closed form (or
    quadrature when not interpolating); ``include_lamb_shift=False`` drops it,
    which leaves a mixture of collective z rotations that cannot entangle.
    """

    def __init__(self, model: SpinPairModel, bath: BathParams, quad: QuadratureSpec = DEFAULT_QUAD,
                 spectral_weight: float = REDFIELD_WEIGHT, interpolate: bool = True, grid_step: float = 0.01,
                 include_lamb_shift: bool = True):
        if model.params.g != 1.0:
            raise ValueError(f"exact dephasing channel needs g = 1, got g = {model.params.g}")
        if not (spectral_weight > 0 and grid_step > 0):
            raise ValueError("spectral_weight and grid_step must be positive")
        off = max(np.max(np.abs(model.h_s - np.diag(np.diag(model.h_s)))),
                  np.max(np.abs(model.v_s - np.diag(np.diag(model.v_s)))))
        if off > 1e-12:
            raise ValueError("H_S and V_S are not diagonal in the computational basis")
        lam = np.real(np.diag(model.v_s))
        if not np.allclose(lam, VS_EIGENVALUES, atol=1e-12):
            raise ValueError(f"unexpected coupling eigenvalues {lam}")
        self.model = model
        self.bath = bath
        self.quad = quad
        self.spectral_weight = float(spectral_weight)
        self.interpolate = interpolate
        self.grid_step = grid_step
        self.include_lamb_shift = include_lamb_shift
        self.vs_eigenvalues = VS_EIGENVALUES.copy()
        self.vs_eigenvalues.setflags(write=False)
        e = np.real(np.diag(model.h_s))
        self.bohr = e[:, None] - e[None, :]
        self.bohr.setflags(write=False)
        lam = self.vs_eigenvalues
        self._gamma_coef = 2.0 * (lam[:, None] - lam[None, :]) ** 2
        self._lamb_coef = lam[:, None] ** 2 - lam[None, :] ** 2
        self._table: _RegularTable | None = None

    def _regular(self, t: np.ndarray) -> np.ndarray:
        if self.interpolate:
            if self._table is None:
                self._table = _build_table(self.bath, self.quad, self.grid_step)
            return self._table(t)
        return np.array([decoherence_regular(x, self.bath, self.quad) for x in t])

    def decoherence_integral(self, times) -> np.ndarray:
        """``int J w^-2 sin^2(w t/2) coth(beta w/2) dw`` at each time (unweighted)."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(t < 0):
            raise ValueError("times must be non-negative")
        sing = np.array([decoherence_singular(x, self.bath) for x in t])
        return sing + self.bath.gamma * self._regular(t)

    def lamb_integral(self, times) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(t < 0):
            raise ValueError("times must be non-negative")
        if not self.include_lamb_shift:
            return np.zeros_like(t)
        if self.interpolate:
            return np.array([lamb_integral_closed(x, self.bath) for x in t])
        return np.array([lamb_integral(x, self.bath, self.quad) for x in t])

    def decay_exponents(self, times) -> np.ndarray:
        """``Gamma_ab(t)``, shape ``(n_times, 4, 4)``."""
        i = self.decoherence_integral(times)
        return self.spectral_weight * i[:, None, None] * self._gamma_coef

    def lamb_phases(self, times) -> np.ndarray:
        """``L_ab(t)``, shape ``(n_times, 4, 4)``."""
        k = self.lamb_integral(times)
        return self.spectral_weight * k[:, None, None] * self._lamb_coef

    def factors(self, times) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        phase = self.bohr[None] * t[:, None, None] + self.lamb_phases(t)
        return np.exp(-self.decay_exponents(t) - 1j * phase)

    def evolve_many(self, initial: DensityMatrix, times) -> np.ndarray:
        return self.factors(times) * initial.mat[None]

    def evolve_exact(self, initial: DensityMatrix, t: float) -> DensityMatrix:
        if t < 0:
            raise ValueError("time must be non-negative")
        return DensityMatrix(self.evolve_many(initial, [t])[0])

    def trajectory(self, initial: DensityMatrix, times) -> Trajectory:
        times = np.asarray(times, dtype=float)
        return trajectory_from_states(times, self.evolve_many(initial, times), "exact")

    def asymptotic_phase(self, t: float) -> float:
        """The ``xi`` for which :func:`asymptotic_state` matches this channel at time ``t``."""
        return float(self.bohr[1, 2] * t)


def asymptotic_state(initial: DensityMatrix, xi: float) -> DensityMatrix:
    """Long-time image of ``initial``: populations kept, only the
    ``|ud><du|`` coherence survives, as ``rho_23 e^{-i xi}`` and ``rho_32 e^{+i xi}``.
    """
    rho = np.diag(np.diag(initial.mat)).astype(complex)
    rho[1, 2] = initial.mat[1, 2] * np.exp(-1j * xi)
    rho[2, 1] = initial.mat[2, 1] * np.exp(1j * xi)
    return DensityMatrix(rho)
