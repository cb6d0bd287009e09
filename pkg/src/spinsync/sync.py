"""Synchronization analytics on the local spin signals <sigma_1^x>(t), <sigma_2^x>(t)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import partial
from typing import Literal

import numpy as np

from .bath import DEFAULT_QUAD, BathParams, QuadratureSpec
from .model import ModelParams, build_model
from .operators import DensityMatrix
from .redfield import (DefectiveSpectrumError, PositivityWarning, Trajectory, build_generator, propagate,
                       select_slow_pair, spectrum)
from .sweep import GridMap, grid_map, run_grid

MIN_SAMPLES = 10


@dataclass(frozen=True)
class SyncConfig:
    """Windowed-correlation settings; times are in units of 1/omega1.

    ``rule="sustained"`` takes t_synch as the start of the final run of windows
    with ``|C| >= threshold`` that lasts to the horizon (at least ``persistence``
    windows long).  ``rule="first"`` takes the earliest run of ``persistence``
    consecutive windows.
    """

    window: float = 6.0
    stride: float = 4.0
    dt: float = 0.02
    threshold: float = 0.92
    persistence: int = 3
    horizon: float = 500.0
    rule: Literal["sustained", "first"] = "sustained"

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.stride <= 0:
            raise ValueError("dt and stride must be positive")
        if self.window < MIN_SAMPLES * self.dt:
            raise ValueError(f"window must span at least {MIN_SAMPLES} samples")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")
        if self.horizon <= self.window:
            raise ValueError("horizon must exceed the window")
        if self.persistence < 1:
            raise ValueError("persistence must be >= 1")
        if self.rule not in ("sustained", "first"):
            raise ValueError(f"unknown rule {self.rule!r}")

    def times(self) -> np.ndarray:
        n = int(round(self.horizon / self.dt))
        return np.arange(n + 1) * self.dt


def correlation_coefficient(f, fp, dt: float = 1.0) -> float | None:
    """Pearson correlation of two uniformly sampled series, trapezoidal time averages.

    Returns ``None`` when a series has no variation in the window.
    """
    f = np.asarray(f, dtype=float)
    fp = np.asarray(fp, dtype=float)
    if f.shape != fp.shape or f.ndim != 1:
        raise ValueError("series must be 1-D and of equal length")
    if f.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {f.size}")
    span = dt * (f.size - 1)

    def avg(y):
        return np.trapezoid(y, dx=dt) / span

    df = f - avg(f)
    dfp = fp - avg(fp)
    var_f = avg(df * df)
    var_fp = avg(dfp * dfp)
    scale = max(np.max(np.abs(f)), np.max(np.abs(fp)), 1e-300)
    if var_f <= (1e-13 * scale) ** 2 or var_fp <= (1e-13 * scale) ** 2:
        return None
    c = avg(df * dfp) / math.sqrt(var_f * var_fp)
    return float(min(1.0, max(-1.0, c)))


def _uniform_step(times: np.ndarray) -> float:
    steps = np.diff(times)
    dt = float(steps.mean())
    if np.max(np.abs(steps - dt)) > 1e-9 * max(1.0, dt):
        raise ValueError("windowed correlation needs a uniform time grid")
    return dt


def windowed_correlation(times, f, fp, window: float, stride: float) -> tuple[np.ndarray, np.ndarray]:
    """``C(t, window)`` at ``t = t0, t0 + stride, ...``; undefined windows are NaN."""
    times = np.asarray(times, dtype=float)
    dt = _uniform_step(times)
    n = int(round(window / dt))
    k = int(round(stride / dt))
    starts, values = [], []
    i = 0
    while i + n < times.size:
        c = correlation_coefficient(f[i:i + n + 1], fp[i:i + n + 1], dt)
        starts.append(times[i])
        values.append(np.nan if c is None else c)
        i += k
    return np.array(starts), np.array(values)


@dataclass(frozen=True)
class SyncReport:
    c_times: np.ndarray
    c_values: np.ndarray
    t_synch: float | None
    sign: int
    skipped: int
    omega_sync: float | None = None
    mode_frequency_check: float | None = None

    @property
    def reached(self) -> bool:
        return self.t_synch is not None


def _locate(values: np.ndarray, threshold: float, persistence: int, rule: str) -> int | None:
    ok = np.abs(np.nan_to_num(values, nan=0.0)) >= threshold
    if rule == "first":
        run = 0
        for i, flag in enumerate(ok):
            run = run + 1 if flag else 0
            if run >= persistence:
                return i - persistence + 1
        return None
    if ok.size == 0 or not ok[-1]:
        return None
    i = ok.size - 1
    while i > 0 and ok[i - 1]:
        i -= 1
    return i if ok.size - i >= persistence else None


def sync_time(traj: Trajectory, cfg: SyncConfig = SyncConfig()) -> SyncReport:
    """t_synch of ``<sigma_1^x>``, ``<sigma_2^x>`` under ``cfg``; ``None`` if not reached by the horizon."""
    mask = traj.times <= cfg.horizon + 1e-9
    starts, values = windowed_correlation(traj.times[mask], traj.sigma1x[mask], traj.sigma2x[mask],
                                          cfg.window, cfg.stride)
    i = _locate(values, cfg.threshold, cfg.persistence, cfg.rule)
    t_synch = None if i is None else float(starts[i])
    sign = 0 if i is None else int(np.sign(values[i]))
    return SyncReport(starts, values, t_synch, sign, int(np.sum(np.isnan(values))))


@dataclass(frozen=True)
class FrequencyEstimate:
    omega: float
    error: float
    cycles: int
    t_start: float
    t_end: float

    def __iter__(self):
        return iter((self.omega, self.error))


def _upward_crossings(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    idx = np.nonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    return t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])


def sync_frequency(traj: Trajectory, t_from: float, cycles: int = 50,
                   observable: str = "sigma1x") -> FrequencyEstimate:
    """Oscillation frequency from ``cycles`` successive upward zero crossings.

    A running mean over one period removes the (slowly relaxing) offset first.
    Crossing times are located to within one sampling step ``dt``; the error bar
    is half the resulting frequency bound, ``omega dt / (2 span)``.
    """
    if cycles < 10:
        raise ValueError("need at least 10 cycles")
    mask = traj.times >= t_from
    t = traj.times[mask]
    y = np.asarray(traj.observable(observable))[mask]
    if t.size < 4:
        raise ValueError("no samples after t_from")
    dt = _uniform_step(t)
    spec = np.abs(np.fft.rfft((y - y.mean()) * np.hanning(y.size)))
    freqs = 2 * np.pi * np.fft.rfftfreq(y.size, dt)
    peak = freqs[1 + int(np.argmax(spec[1:]))]
    n = max(3, int(round(2 * np.pi / peak / dt)))
    kernel = np.ones(n) / n
    base = np.convolve(y, kernel, mode="valid")
    half = (n - 1) // 2
    t_c = t[half:half + base.size]
    y_c = y[half:half + base.size] - base
    crossings = _upward_crossings(t_c, y_c)
    if crossings.size < cycles + 1:
        raise ValueError(f"only {max(crossings.size - 1, 0)} full cycles after t={t_from}, need {cycles}")
    span = crossings[cycles] - crossings[0]
    omega = 2 * np.pi * cycles / span
    return FrequencyEstimate(omega, 0.5 * omega * dt / span, cycles, float(crossings[0]), float(crossings[cycles]))


@dataclass(frozen=True)
class SyncCell:
    """One (delta, g) cell: synchronization outcome plus the slow-mode pair of its generator."""

    t_synch: float | None
    sign: int
    min_eig: float
    gap: float
    im_lambda1: float

    @property
    def reached(self) -> bool:
        return self.t_synch is not None


def _sync_cell(delta: float, g: float, bath: BathParams, cfg: SyncConfig, initial: DensityMatrix,
               quad: QuadratureSpec, include_lamb_shift: bool) -> SyncCell:
    model = build_model(ModelParams(omega2=1.0 + delta, g=g))
    gen = build_generator(model, bath, quad, include_lamb_shift)
    spec = spectrum(gen)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        traj = propagate(gen, initial, cfg.times(), spec=spec)
    rep = sync_time(traj, cfg)
    try:
        pair = select_slow_pair(spec, initial)
        gap, freq = pair.gap, pair.frequency1
    except (DefectiveSpectrumError, ValueError):
        gap = freq = float("nan")
    return SyncCell(rep.t_synch, rep.sign, float(traj.min_eig.min()), gap, freq)


def sync_map(delta_grid, g_grid, bath: BathParams, cfg: SyncConfig, initial: DensityMatrix,
             quad: QuadratureSpec = DEFAULT_QUAD, include_lamb_shift: bool = True, workers: int = 1) -> GridMap:
    """t_synch over a (delta, g) grid; cells that never synchronize hold ``nan``.

    ``cells[k].value`` keeps the full :class:`SyncCell` (gap, slow frequency, positivity).
    """
    fn = partial(_sync_cell, bath=bath, cfg=cfg, initial=initial, quad=quad, include_lamb_shift=include_lamb_shift)
    cells = run_grid(fn, delta_grid, g_grid, workers)
    return grid_map(cells, delta_grid, g_grid, lambda c: np.nan if c.t_synch is None else c.t_synch)


def sync_report_with_spectrum(traj: Trajectory, cfg: SyncConfig, slow_frequency: float, t_from: float,
                              cycles: int = 50) -> SyncReport:
    """``sync_time`` plus the measured frequency and its distance to a mode frequency."""
    rep = sync_time(traj, cfg)
    est = sync_frequency(traj, t_from, cycles)
    return SyncReport(rep.c_times, rep.c_values, rep.t_synch, rep.sign, rep.skipped, est.omega,
                      abs(est.omega - slow_frequency))
