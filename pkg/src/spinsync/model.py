"""Spin-pair Hamiltonian, anisotropic bath coupling and initial states.

Frequencies are in units of the first spin's frequency, so ``omega1 == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import PureState, pauli


@dataclass(frozen=True)
class ModelParams:
    omega2: float = 1.0
    g: float = -1.0
    omega1: float = 1.0

    def __post_init__(self) -> None:
        if self.omega1 != 1.0:
            raise ValueError("omega1 is the frequency unit and must equal 1.0")
        if not -1.0 <= self.g <= 1.0:
            raise ValueError(f"anisotropy g must lie in [-1, 1], got {self.g}")
        if not np.isfinite(self.omega2):
            raise ValueError("omega2 must be finite")

    @property
    def detuning(self) -> float:
        return self.omega2 - self.omega1


@dataclass(frozen=True)
class SpinPairModel:
    """Operators of the spin pair in both the computational and H_S eigenbasis.

    ``eigenbasis[:, a]`` is eigenvector ``a``; energies are sorted descending with
    ties broken by computational index.  ``s_matrix`` holds ``<a|V_S|b>`` in that
    basis and ``bohr_frequencies[a, b] = E_a - E_b``.
    """

    params: ModelParams
    h_s: np.ndarray
    v_s: np.ndarray
    eigen_energies: np.ndarray
    eigenbasis: np.ndarray
    s_matrix: np.ndarray
    bohr_frequencies: np.ndarray = field(repr=False)

    def to_eigen(self, rho: np.ndarray) -> np.ndarray:
        u = self.eigenbasis
        return u.conj().T @ rho @ u

    def to_computational(self, rho: np.ndarray) -> np.ndarray:
        u = self.eigenbasis
        return u @ rho @ u.conj().T


def coupling_operator(g: float) -> np.ndarray:
    sz = pauli("z", 1) + pauli("z", 2)
    sx = pauli("x", 1) + pauli("x", 2)
    return (1 + g) * sz + (1 - g) * sx


def build_model(params: ModelParams) -> SpinPairModel:
    h_s = params.omega1 * pauli("z", 1) + params.omega2 * pauli("z", 2)
    v_s = coupling_operator(params.g)
    diag = np.real(np.diag(h_s))
    # stable sort on -E keeps computational order for degenerate levels
    order = np.argsort(-diag, kind="stable")
    energies = diag[order]
    # H_S is diagonal, so its eigenvectors are permuted computational vectors
    u = np.eye(4, dtype=complex)[:, order]
    s = u.conj().T @ v_s @ u
    w = energies[:, None] - energies[None, :]
    for arr in (h_s, v_s, energies, u, s, w):
        arr.setflags(write=False)
    return SpinPairModel(params, h_s, v_s, energies, u, s, w)


UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)


def product_state(theta1: float, phi1: float, theta2: float, phi2: float) -> PureState:
    """``(cos t1|u> + e^{i p1} sin t1|d>) (x) (cos t2|u> + e^{i p2} sin t2|d>)``."""
    a = np.cos(theta1) * UP + np.exp(1j * phi1) * np.sin(theta1) * DOWN
    b = np.cos(theta2) * UP + np.exp(1j * phi2) * np.sin(theta2) * DOWN
    amp = np.kron(a, b)
    return PureState(amp / np.linalg.norm(amp))


_BELL = {
    "psi-": np.array([0, 1, -1, 0]),
    "psi+": np.array([0, 1, 1, 0]),
    "phi+": np.array([1, 0, 0, 1]),
    "phi-": np.array([1, 0, 0, -1]),
}


def bell_state(which: str) -> PureState:
    """One of ``psi-``, ``psi+``, ``phi+``, ``phi-``."""
    try:
        v = _BELL[which]
    except KeyError:
        raise ValueError(f"unknown Bell state {which!r}; choose from {sorted(_BELL)}") from None
    return PureState(v / np.sqrt(2))
