"""Two-qubit correlation measures: concurrence, entanglement of formation, mutual
information, classical correlations and quantum discord.

Entropies are in bits.  Discord ``delta_{a:b}`` is computed for orthogonal
projective measurements on party ``b`` (the second spin) by default:

    delta = S(rho_b) - S(rho_ab) + min_n S(a | {Pi_n, 1 - Pi_n})

The conditional entropy is evaluated in Bloch form.  With
``rho = (1/4)(1 + r.s (x) 1 + 1 (x) s.s + sum T_ij s_i (x) s_j)``, measuring
``n.sigma`` on b gives outcome weights ``(1 +- s.n)/2`` and conditional Bloch
vectors ``(r +- T n)/(1 +- s.n)`` for a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

from .operators import (ENTROPY_CLAMP, SIGMA, DensityMatrix, clamped_spectrum, dagger, partial_trace,
                        von_neumann_entropy)

Party = Literal["a", "b"]
_YY = np.kron(SIGMA["y"], SIGMA["y"])
_SWAP = np.eye(4)[[0, 2, 1, 3]]
_LN2 = math.log(2.0)
_XPATTERN = np.ones((4, 4), dtype=bool)
_XPATTERN[[0, 1, 1, 2, 2, 3], [0, 1, 2, 1, 2, 3]] = False


@dataclass(frozen=True)
class DiscordGrid:
    """Coarse measurement grid (``n_theta`` over [0, pi/2], ``n_phi`` over [0, 2 pi))
    followed by Nelder-Mead refinement to ``angle_tol``.
    """

    n_theta: int = 64
    n_phi: int = 128
    angle_tol: float = 1e-5
    rescan_every: int = 20
    warm_theta: int = 9
    warm_phi: int = 16

    def __post_init__(self) -> None:
        if min(self.n_theta, self.n_phi, self.warm_theta, self.warm_phi) < 2 or self.angle_tol <= 0:
            raise ValueError(f"invalid discord grid {self}")
        if self.rescan_every < 1:
            raise ValueError("rescan_every must be >= 1")


DEFAULT_GRID = DiscordGrid()


@dataclass(frozen=True)
class CorrelationValues:
    concurrence: float
    entanglement_of_formation: float
    mutual_information: float
    classical: float
    discord: float
    theta: float
    phi: float


def _mat(rho) -> np.ndarray:
    m = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 state, got {m.shape}")
    return m


def _psd_sqrt(m: np.ndarray, tol: float) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    if w[0] < -tol:
        raise ValueError(f"state has a negative eigenvalue {w[0]:.3e} beyond tolerance {tol:.1e}")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)


def concurrence(rho, tol: float = 1e-10) -> float:
    """Wootters concurrence ``max(0, mu1 - mu2 - mu3 - mu4)``.

    ``mu_i`` are the eigenvalues of ``sqrt(sqrt(rho) rho~ sqrt(rho))``, taken here as
    the singular values of ``sqrt(rho) (Y x Y) sqrt(rho)*``, which avoids
    square-rooting round-off near zero.
    """
    m = _mat(rho)
    root = _psd_sqrt(m, tol)
    mu = np.linalg.svd(root @ _YY @ root.conj(), compute_uv=False)
    return float(max(0.0, mu[0] - mu[1:].sum()))


def binary_entropy(p: float) -> float:
    if not -1e-12 <= p <= 1 + 1e-12:
        raise ValueError(f"probability out of range: {p}")
    p = min(1.0, max(0.0, p))
    return float(-(xlogy(p, p) + xlogy(1 - p, 1 - p)) / _LN2) + 0.0


def eof_from_concurrence(c: float) -> float:
    """``H((1 - sqrt(1 - c^2)) / 2)``."""
    c = min(1.0, max(0.0, c))
    return binary_entropy(0.5 * (1.0 - math.sqrt(1.0 - c * c)))


def entanglement_of_formation(rho, tol: float = 1e-10) -> float:
    return eof_from_concurrence(concurrence(rho, tol))


def mutual_information(rho, tol: float = ENTROPY_CLAMP) -> float:
    m = _mat(rho)
    return (von_neumann_entropy(partial_trace(m, 1), tol) + von_neumann_entropy(partial_trace(m, 2), tol)
            - von_neumann_entropy(m, tol))


def bloch_decomposition(rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(r, s, T)`` with ``r_i = tr(rho s_i x 1)``, ``s_j = tr(rho 1 x s_j)``, ``T_ij = tr(rho s_i x s_j)``."""
    m = _mat(rho)
    paulis = [SIGMA[k] for k in "xyz"]
    eye = np.eye(2)
    r = np.array([np.trace(np.kron(p, eye) @ m).real for p in paulis])
    s = np.array([np.trace(np.kron(eye, p) @ m).real for p in paulis])
    t = np.array([[np.trace(np.kron(p, q) @ m).real for q in paulis] for p in paulis])
    return r, s, t


def _directions(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta) + 0.0 * phi], axis=-1)


def _conditional_entropy(r, s, t, n: np.ndarray) -> np.ndarray:
    """``sum_k p_k S(rho_a|k)`` for measurement axes ``n`` (shape ``(..., 3)``) on b."""
    sn = n @ s
    tn = n @ t.T
    total = np.zeros(sn.shape)
    for sign in (1.0, -1.0):
        q = 1.0 + sign * sn  # = 2 p_k
        w = np.linalg.norm(r + sign * tn, axis=-1)
        w = np.minimum(w, q)  # guard round-off on (near-)pure conditional states
        lam = np.stack([(q + w) / 4.0, (q - w) / 4.0])
        p = q / 2.0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(p > 0, lam / np.where(p > 0, p, 1.0), 1.0)
        total -= np.sum(xlogy(lam, np.clip(ratio, 0.0, None)), axis=0) / _LN2
    return total


def _coarse(r, s, t, n_theta: int, n_phi: int) -> tuple[float, float, float]:
    theta = np.linspace(0.0, math.pi / 2, n_theta)
    phi = np.arange(n_phi) * (2 * math.pi / n_phi)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    vals = _conditional_entropy(r, s, t, _directions(th, ph))
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    return float(vals[i, j]), float(theta[i]), float(phi[j])


def _refine(r, s, t, theta: float, phi: float, tol: float) -> tuple[float, float, float]:
    def f(x):
        return float(_conditional_entropy(r, s, t, _directions(x[0], x[1])))

    res = minimize(f, np.array([theta, phi]), method="Nelder-Mead",
                   options={"xatol": tol, "fatol": 1e-14, "maxiter": 4000,
                            "initial_simplex": [[theta, phi], [theta + 0.02, phi], [theta, phi + 0.04]]})
    th, ph = float(res.x[0]), float(res.x[1])
    best = min(res.fun, f([theta, phi]))
    if best < res.fun:
        th, ph = theta, phi
    return float(best), *_canonical_angles(th, ph)


def _canonical_angles(theta: float, phi: float) -> tuple[float, float]:
    """Fold (theta, phi) into theta in [0, pi/2], phi in [0, 2 pi) (n and -n give the same measurement)."""
    n = _directions(theta, phi)
    if n[2] < 0:
        n = -n
    th = math.acos(min(1.0, max(-1.0, float(n[2]))))
    ph = math.atan2(float(n[1]), float(n[0])) % (2 * math.pi) if th > 1e-12 else 0.0
    return th, ph


def _oriented(m: np.ndarray, measured_party: Party) -> np.ndarray:
    if measured_party == "b":
        return m
    if measured_party == "a":
        return _SWAP @ m @ _SWAP
    raise ValueError(f"measured_party must be 'a' or 'b', got {measured_party!r}")


def _assemble(m: np.ndarray, cond: float, theta: float, phi: float, tol: float) -> CorrelationValues:
    s_a = von_neumann_entropy(partial_trace(m, 1), tol)
    s_b = von_neumann_entropy(partial_trace(m, 2), tol)
    s_ab = von_neumann_entropy(m, tol)
    mi = s_a + s_b - s_ab
    classical = s_a - cond
    discord = mi - classical
    c = concurrence(m, tol)
    return CorrelationValues(c, eof_from_concurrence(c), mi, classical, discord, theta, phi)


def discord_and_classical(rho, measured_party: Party = "b", grid: DiscordGrid = DEFAULT_GRID,
                          start: tuple[float, float] | None = None, tol: float = ENTROPY_CLAMP,
                          full_scan: bool = True) -> CorrelationValues:
    """All correlation measures of ``rho``, discord minimized over projective
    measurements on ``measured_party``.  The optimal axis ``(theta, phi)`` refers
    to the Bloch sphere of the measured spin.

    ``start`` adds a warm-start candidate; with ``full_scan=False`` only a coarse
    ``warm_theta x warm_phi`` scan accompanies it.
    """
    m = _oriented(_mat(rho), measured_party)
    clamped_spectrum(m, tol)
    r, s, t = bloch_decomposition(m)
    if full_scan:
        cands = [_coarse(r, s, t, grid.n_theta, grid.n_phi)]
    else:
        cands = [_coarse(r, s, t, grid.warm_theta, grid.warm_phi)]
    if start is not None:
        th, ph = start
        cands.append((float(_conditional_entropy(r, s, t, _directions(th, ph))), float(th), float(ph)))
    _, th, ph = min(cands)
    cond, th, ph = _refine(r, s, t, th, ph, grid.angle_tol)
    return _assemble(m, cond, th, ph, tol)


def check_xstate(rho, tol: float = 1e-10) -> np.ndarray:
    m = _mat(rho)
    off = float(np.max(np.abs(m[_XPATTERN])))
    if off > tol:
        raise ValueError(f"state is not of the diagonal + rho_23 form (stray element {off:.2e})")
    return m


def xstate_discord(rho, tol: float = ENTROPY_CLAMP) -> CorrelationValues:
    """Discord of a state with only populations and the ``rho_23`` coherence,
    checking just the sigma^z and sigma^x measurements on b.
    """
    m = check_xstate(rho)
    clamped_spectrum(m, tol)
    r, s, t = bloch_decomposition(m)
    z = float(_conditional_entropy(r, s, t, _directions(0.0, 0.0)))
    x = float(_conditional_entropy(r, s, t, _directions(math.pi / 2, 0.0)))
    if x < z:
        return _assemble(m, x, math.pi / 2, 0.0, tol)
    return _assemble(m, z, 0.0, 0.0, tol)


def correlation_trace(states: Sequence[np.ndarray] | Iterable[np.ndarray], measured_party: Party = "b",
                      grid: DiscordGrid = DEFAULT_GRID, tol: float = 1e-3) -> list[CorrelationValues]:
    """Correlation measures along a sequence of states.

    Each step warm-starts from the previous optimum plus a coarse re-scan; every
    ``grid.rescan_every`` samples (and at the first) the full grid is scanned.
    ``tol`` is the slack on negative eigenvalues (Redfield states can dip slightly).
    """
    out: list[CorrelationValues] = []
    start = None
    for i, rho in enumerate(states):
        full = start is None or i % grid.rescan_every == 0
        cv = discord_and_classical(rho, measured_party, grid, start=start, tol=tol, full_scan=full)
        out.append(cv)
        start = (cv.theta, cv.phi)
    return out
