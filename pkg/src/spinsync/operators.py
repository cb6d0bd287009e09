"""Dense two-qubit linear algebra: Pauli operators, states, eigensolvers, entropies.

All matrices are plain ``numpy`` complex arrays.  The computational basis is
ordered ``|uu>, |ud>, |du>, |dd>`` with ``sigma_z |u> = +|u>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg as la

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-7
ENTROPY_CLAMP = 1e-9

I2 = np.eye(2, dtype=complex)
SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def pauli(which: str, site: int) -> np.ndarray:
    """``sigma^which`` acting on spin ``site`` (1 or 2) of the pair, as a 4x4 matrix."""
    if which not in SIGMA:
        raise ValueError(f"unknown Pauli axis {which!r}")
    if site == 1:
        return kron(SIGMA[which], I2)
    if site == 2:
        return kron(I2, SIGMA[which])
    raise ValueError(f"site must be 1 or 2, got {site!r}")


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def hermitian_eig(m: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Ascending real eigenvalues and orthonormal eigenvectors (columns) of ``m``.

    Raises ``ValueError`` if ``m`` departs from Hermiticity by more than ``tol``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    err = hermiticity_error(m)
    if err > tol:
        raise ValueError(f"matrix is not Hermitian (max |m - m^H| = {err:.3e})")
    return np.linalg.eigh(0.5 * (m + dagger(m)))


@dataclass(frozen=True)
class EigResult:
    """Biorthogonal eigensystem of a general square matrix.

    ``right[:, k]`` and ``left[:, k]`` satisfy ``m @ r = lam r`` and
    ``l^H @ m = lam l^H`` with ``left.conj().T @ right == I``.
    ``min_overlap`` is the smallest ``|<l_k|r_k>|`` for unit-norm vectors (the
    reciprocal eigenvalue condition number); ``defective`` is set when it drops
    below the detection threshold.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    min_overlap: float
    defective: bool

    def residual(self, m: np.ndarray) -> float:
        r = m @ self.right - self.right * self.eigenvalues
        return float(np.max(np.linalg.norm(r, axis=0)))


def general_eig(m: np.ndarray, defect_tol: float = 1e-10) -> EigResult:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    lam, vl, vr = la.eig(m, left=True, right=True)
    vr = vr / np.linalg.norm(vr, axis=0)
    vl = vl / np.linalg.norm(vl, axis=0)
    overlaps = np.einsum("ij,ij->j", vl.conj(), vr)
    min_overlap = float(np.min(np.abs(overlaps)))
    defective = min_overlap < defect_tol
    if not defective:
        # LAPACK pairs left/right vectors per eigenvalue; for (nearly) degenerate
        # eigenvalues the blocks need not be biorthogonal, so use the inverse.
        try:
            left = dagger(np.linalg.inv(vr))
        except np.linalg.LinAlgError:
            defective = True
            left = vl / overlaps.conj()
        else:
            if not np.all(np.isfinite(left)):
                defective = True
                left = vl / overlaps.conj()
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            left = vl / overlaps.conj()
    return EigResult(lam, vr, left, min_overlap, defective)


def partial_trace(rho: np.ndarray, keep: int) -> np.ndarray:
    """Reduced 2x2 state of spin ``keep`` (1 or 2)."""
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    if keep == 1:
        return np.einsum("ijkj->ik", r)
    if keep == 2:
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 1 or 2, got {keep!r}")


def clamped_spectrum(rho: np.ndarray, tol: float = ENTROPY_CLAMP) -> np.ndarray:
    w = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))
    if w.min() < -tol:
        raise ValueError(f"state has a negative eigenvalue {w.min():.3e} beyond tolerance {tol:.1e}")
    return np.clip(w, 0.0, None)


def shannon_bits(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho: np.ndarray, tol: float = ENTROPY_CLAMP) -> float:
    """Entropy in bits; eigenvalues within ``tol`` below zero are clamped."""
    return shannon_bits(clamped_spectrum(np.asarray(rho, dtype=complex), tol))


Basis = Literal["computational", "eigen"]


@dataclass(frozen=True)
class DensityMatrix:
    """Validated 4x4 state of the spin pair in a tagged basis."""

    mat: np.ndarray
    basis: Basis = "computational"

    def __post_init__(self) -> None:
        mat = np.array(self.mat, dtype=complex)
        if mat.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @classmethod
    def from_pure(cls, psi: "PureState | np.ndarray") -> "DensityMatrix":
        amp = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
        return cls(np.outer(amp, amp.conj()))

    def check(self, positivity_tol: float = POSITIVITY_TOL) -> None:
        herm = hermiticity_error(self.mat)
        if herm > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian: {herm:.3e}")
        tr = abs(np.trace(self.mat) - 1.0)
        if tr > TRACE_TOL:
            raise ValueError(f"density matrix trace off by {tr:.3e}")
        mn = self.min_eigenvalue()
        if mn < -positivity_tol:
            raise ValueError(f"density matrix has eigenvalue {mn:.3e}")

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.mat + dagger(self.mat)))[0])

    def expect(self, op: np.ndarray) -> float:
        return float(np.real(np.trace(op @ self.mat)))


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape != (4,):
            raise ValueError(f"pure state needs 4 amplitudes, got {amp.shape}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"pure state not normalized (|psi| = {norm!r})")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))
