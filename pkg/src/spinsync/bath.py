"""Ohmic bath with Lorentz-Drude cutoff: spectral density, Redfield rates and
pure-dephasing integrals.

``J(w) = gamma * w * wc^2 / (wc^2 + w^2)``.  The Redfield rates use the odd
continuation of this formula to negative frequencies, so emission and absorption
rates are both positive and continuous through ``x = 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Raised when an integral misses its tolerance; ``estimate`` is the reported error."""

    def __init__(self, message: str, value: float, estimate: float):
        super().__init__(f"{message}: value={value:.6e}, error estimate={estimate:.3e}")
        self.value = value
        self.estimate = estimate


@dataclass(frozen=True)
class BathParams:
    gamma: float = 1e-3
    omega_c: float = 20.0
    temperature: float = 1.0

    def __post_init__(self) -> None:
        for name in ("gamma", "omega_c", "temperature"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"bath parameter {name} must be positive, got {v!r}")

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    def validity_warnings(self, omega_min: float = 1.0) -> list[str]:
        """Weak-coupling / Markov conditions that do not hold (empty if all hold)."""
        out = []
        if self.omega_c <= 10 * omega_min:
            out.append(f"cutoff omega_c={self.omega_c} is not >> system frequency {omega_min}")
        if self.gamma * self.omega_c >= 0.1 * omega_min:
            out.append(f"gamma*omega_c={self.gamma * self.omega_c:.3g} is not << system frequency")
        return out


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for all bath integrals.

    ``cutoff_multiplier * omega_c`` is where the finite-interval (principal value)
    rule hands over to an infinite-interval rule for the tail.
    """

    cutoff_multiplier: float = 50.0
    rel_tol: float = 1e-8
    limit: int = 800
    accept_factor: float = 50.0

    def __post_init__(self) -> None:
        # QUADPACK needs epsrel above 50 machine epsilons when epsabs is 0
        if self.cutoff_multiplier <= 1 or not 1e-13 <= self.rel_tol < 1 or self.limit < 10:
            raise ValueError(f"invalid quadrature spec {self}")


DEFAULT_QUAD = QuadratureSpec()


def _quad(f, a, b, quad: QuadratureSpec, what: str, scale: float = 0.0, **kw) -> float:
    """``scipy.integrate.quad`` with a convergence check.

    ``scale`` is the magnitude the result is compared against (e.g. the integral
    it gets subtracted from); it sets the absolute tolerance.
    """
    epsabs = quad.rel_tol * scale * 1e-2
    if kw.get("weight") in ("cos", "sin") and b == np.inf:
        epsabs = max(epsabs, 1e-300)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=quad.rel_tol, limit=quad.limit, **kw)
    allowed = quad.accept_factor * quad.rel_tol * max(abs(val), scale)
    if not np.isfinite(val) or (err > allowed and err > 1e-15):
        raise QuadratureError(f"{what} did not converge", val, err)
    return val


def spectral_density(omega, bath: BathParams):
    """``J(omega)`` for ``omega >= 0``; works on scalars and arrays."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral density is defined for non-negative frequencies only")
    wc2 = bath.omega_c**2
    out = bath.gamma * w * wc2 / (wc2 + w * w)
    return float(out) if out.ndim == 0 else out


def _j_odd(x: float, bath: BathParams) -> float:
    wc2 = bath.omega_c**2
    return bath.gamma * x * wc2 / (wc2 + x * x)


def _x_coth(u: float) -> float:
    """``u * coth(u)``, even and smooth through 0."""
    u = abs(u)
    if u < 1e-4:
        return 1.0 + u * u / 3.0
    return u / math.tanh(u)


def _j_coth(w: float, bath: BathParams) -> float:
    """``J(w) coth(beta w / 2)`` extended evenly; tends to ``2 gamma / beta`` at 0."""
    wc2 = bath.omega_c**2
    beta = bath.beta
    return bath.gamma * wc2 / (wc2 + w * w) * (2.0 / beta) * _x_coth(beta * w / 2.0)


def _sign(sign) -> int:
    if sign in (1, "+"):
        return 1
    if sign in (-1, "-"):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def relaxation_rate(x: float, sign, bath: BathParams) -> float:
    """Real part of Gamma^{+/-}(x): ``(pi/8) J(x) (coth(beta x/2) -/+ 1)``."""
    s = _sign(sign)
    # J_odd(x) coth(beta x/2) is even in x and equals 2 gamma/beta at x = 0
    return math.pi / 8.0 * (_j_coth(x, bath) - s * _j_odd(x, bath))


def lamb_shift(x: float, sign, bath: BathParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Imaginary part of Gamma^{+/-}(x).

    ``(1/4) P int_0^inf J(w) (x coth(beta w/2) -/+ w) / (w^2 - x^2) dw``; the pole
    at ``w = |x|`` is handled by a Cauchy-weighted rule up to the cutoff, the
    remaining tail by an ordinary infinite-interval rule.
    """
    s = _sign(sign)
    if x == 0.0:
        return -s * math.pi * bath.gamma * bath.omega_c / 8.0
    a = abs(x)
    upper = max(quad.cutoff_multiplier * bath.omega_c, 4.0 * a + 1.0)

    def numer(w):
        return x * _j_coth(w, bath) - s * w * _j_odd(w, bath)

    core = _quad(lambda w: numer(w) / (4.0 * (w + a)), 0.0, upper, quad,
                 f"principal value at x={x}", weight="cauchy", wvar=a)
    tail = _quad(lambda w: numer(w) / (4.0 * (w * w - a * a)), upper, np.inf, quad,
                 f"principal value tail at x={x}")
    return core + tail


def gamma_plus_minus(x: float, sign, bath: BathParams, quad: QuadratureSpec = DEFAULT_QUAD,
                     include_lamb_shift: bool = True) -> complex:
    re = relaxation_rate(x, sign, bath)
    im = lamb_shift(x, sign, bath, quad) if include_lamb_shift else 0.0
    return complex(re, im)


# -- pure-dephasing integrals --------------------------------------------------

def _lorentz(w: float, wc: float) -> float:
    return wc * wc / (wc * wc + w * w)


def _coth_excess(w: float, beta: float) -> float:
    """``coth(beta w/2)/w - 2/(beta w^2)``, finite at 0 (-> beta/6)."""
    u = beta * w / 2.0
    if u < 1e-3:
        return beta / 6.0 * (1.0 - u * u / 15.0)
    return (1.0 / math.tanh(u) - 1.0 / u) / w


def decoherence_integral(t: float, bath: BathParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_0^inf J(w) w^-2 sin^2(w t/2) coth(beta w/2) dw``.

    The ``2/(beta w^2)`` part of ``coth/w`` is integrated in closed form; the
    bounded remainder is integrated numerically.
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    if t == 0.0:
        return 0.0
    return decoherence_singular(t, bath) + bath.gamma * decoherence_regular(t, bath, quad)


def decoherence_singular(t: float, bath: BathParams) -> float:
    """Closed-form part of the decoherence integral from the ``2/(beta w^2)`` term; grows linearly."""
    wc = bath.omega_c
    x = wc * t
    if x < 1e-3:
        ramp = x * x / 2.0 - x**3 / 6.0 + x**4 / 24.0
    else:
        ramp = x + math.expm1(-x)
    return (2.0 * bath.gamma / bath.beta) * math.pi / (4.0 * wc) * ramp


def decoherence_regular(t: float, bath: BathParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int L(w) h(w) sin^2(w t/2) dw`` with ``h = coth(beta w/2)/w - 2/(beta w^2)``, per unit gamma.

    Bounded and smooth; it saturates at half the ``t -> inf`` mean once
    ``t >> max(1/omega_c, beta/(2 pi))``.
    """
    if t <= 0.0:
        return 0.0
    wc, beta = bath.omega_c, bath.beta
    x = wc * t

    def f(w):
        return _lorentz(w, wc) * _coth_excess(w, beta)

    upper = quad.cutoff_multiplier * wc
    if x <= 2.0:
        body = _quad(lambda w: f(w) * math.sin(w * t / 2.0) ** 2, 0.0, upper, quad, "decoherence integral")
        mean = _quad(f, upper, np.inf, quad, "decoherence tail")
        osc = _quad(f, upper, np.inf, quad, "decoherence tail (cos)", scale=mean, weight="cos", wvar=t)
        regular = body + 0.5 * (mean - osc)
    else:
        total = _quad(f, 0.0, np.inf, quad, "decoherence integral (mean)")
        osc = _quad(f, 0.0, np.inf, quad, "decoherence integral (cos)", scale=total, weight="cos", wvar=t)
        regular = 0.5 * (total - osc)
    return regular


def decoherence_regular_limit(bath: BathParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``t -> inf`` value of :func:`decoherence_regular`."""
    wc, beta = bath.omega_c, bath.beta
    return 0.5 * _quad(lambda w: _lorentz(w, wc) * _coth_excess(w, beta), 0.0, np.inf, quad,
                       "decoherence integral (mean)")


def lamb_integral_closed(t: float, bath: BathParams) -> float:
    """Closed form ``gamma (pi/2) (1 - exp(-omega_c t))`` of :func:`lamb_integral`."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return bath.gamma * math.pi / 2.0 * -math.expm1(-bath.omega_c * t)


def lamb_integral(t: float, bath: BathParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_0^inf J(w) w^-2 sin(w t) dw``, using the Dirichlet integral for the 1/w part."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if t == 0.0:
        return 0.0
    wc = bath.omega_c
    rest = _quad(lambda w: w / (wc * wc + w * w), 0.0, np.inf, quad, "Lamb integral",
                 scale=math.pi / 2.0, weight="sin", wvar=t)
    return bath.gamma * (math.pi / 2.0 - rest)


def dephasing_gamma(t: float, lambda_a: float, lambda_b: float, bath: BathParams,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Decay exponent ``2 (l_a - l_b)^2 int J w^-2 sin^2(w t/2) coth(beta w/2) dw``."""
    d = lambda_a - lambda_b
    if d == 0.0:
        return 0.0
    return 2.0 * d * d * decoherence_integral(t, bath, quad)


def dephasing_lamb(t: float, lambda_a: float, lambda_b: float, bath: BathParams,
                   quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Phase ``(l_a^2 - l_b^2) int J w^-2 sin(w t) dw``."""
    d = lambda_a * lambda_a - lambda_b * lambda_b
    if d == 0.0:
        return 0.0
    return d * lamb_integral(t, bath, quad)


class RateTable:
    """Memo of Gamma^{+/-} over the Bohr frequencies of one model.

    Built once, then read-only; safe to share across threads.
    """

    def __init__(self, bath: BathParams, quad: QuadratureSpec = DEFAULT_QUAD,
                 include_lamb_shift: bool = True):
        self.bath = bath
        self.quad = quad
        self.include_lamb_shift = include_lamb_shift
        self._cache: dict[tuple[float, int], complex] = {}

    def __call__(self, x: float, sign) -> complex:
        key = (float(x) + 0.0, _sign(sign))
        if key not in self._cache:
            self._cache[key] = gamma_plus_minus(key[0], key[1], self.bath, self.quad, self.include_lamb_shift)
        return self._cache[key]

    def matrix(self, bohr: np.ndarray, sign) -> np.ndarray:
        out = np.empty(bohr.shape, dtype=complex)
        for idx, x in np.ndenumerate(bohr):
            out[idx] = self(x, sign)
        return out
