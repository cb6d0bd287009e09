"""Experiment routines behind the command line: each returns a header and rows.

Routines only compute; writing files and the manifest is the caller's job.
Trajectories report their worst eigenvalue to a ``PositivityLog`` so the caller
can enforce the hard cap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .config import RunConfig
from .correlations import (CorrelationValues, concurrence, correlation_trace, discord_and_classical,
                           eof_from_concurrence)
from .dephasing import DephasingChannel
from .model import ModelParams, build_model
from .operators import DensityMatrix, pauli
from .redfield import (PositivityWarning, Trajectory, build_generator, mode_contributions, propagate, spectrum)
from .sweep import CellResult, run_grid
from .sync import SyncConfig, sync_map, sync_time, windowed_correlation

Rows = list[list]


@dataclass
class PositivityLog:
    worst: float = 0.0
    where: str = ""
    n_warned: int = 0
    warn_tol: float = 1e-7

    def record(self, min_eig: float, label: str) -> None:
        if min_eig < -self.warn_tol:
            self.n_warned += 1
        if min_eig < self.worst:
            self.worst, self.where = float(min_eig), label

    def summary(self) -> dict:
        return {"worst_min_eigenvalue": self.worst, "at": self.where, "runs_below_warn_tol": self.n_warned,
                "warn_tol": self.warn_tol}


@dataclass
class Table:
    header: list[str]
    rows: Rows
    cells: list[CellResult] = field(default_factory=list)


def with_model(cfg: RunConfig, delta: float | None = None, g: float | None = None) -> RunConfig:
    m = cfg.model
    return replace(cfg, model=ModelParams(omega2=m.omega1 + (m.detuning if delta is None else delta),
                                          g=m.g if g is None else g))


def trajectory(cfg: RunConfig, times, initial: DensityMatrix | None = None) -> Trajectory:
    """Evolve the configured initial state with the configured engine."""
    initial = cfg.initial.density() if initial is None else initial
    model = build_model(cfg.model)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        if cfg.resolved_engine() == "dephasing-exact":
            d = cfg.dephasing
            ch = DephasingChannel(model, cfg.bath, cfg.quadrature, d.spectral_weight, d.interpolate, d.grid_step,
                                  cfg.include_lamb_shift)
            return ch.trajectory(initial, times)
        gen = build_generator(model, cfg.bath, cfg.quadrature, cfg.include_lamb_shift)
        return propagate(gen, initial, times, method=cfg.evolve.method, positivity_tol=cfg.positivity.warn_tol)


def _grid(t_max: float, dt: float) -> np.ndarray:
    n = int(round(t_max / dt))
    return np.arange(n + 1) * dt


def evolve_table(cfg: RunConfig, log: PositivityLog) -> Table:
    traj = trajectory(cfg, _grid(cfg.evolve.t_max, cfg.evolve.dt))
    log.record(float(traj.min_eig.min()), f"evolve delta={cfg.model.detuning:g} g={cfg.model.g:g}")
    cols = (traj.times, traj.sigma1x, traj.sigma2x, traj.sigma1z, traj.sigma2z, traj.min_eig, traj.trace_err)
    return Table(["t", "sigma1x", "sigma2x", "sigma1z", "sigma2z", "min_eig", "trace_err"],
                 [list(r) for r in zip(*cols)])


def sync_series_table(cfg: RunConfig, log: PositivityLog) -> Table:
    """Windowed correlation ``C(t)`` of the sigma^x signals plus the derived t_synch."""
    sc = cfg.sync
    traj = trajectory(cfg, sc.times())
    log.record(float(traj.min_eig.min()), f"sync delta={cfg.model.detuning:g} g={cfg.model.g:g}")
    starts, values = windowed_correlation(traj.times, traj.sigma1x, traj.sigma2x, sc.window, sc.stride)
    rep = sync_time(traj, sc)
    rows = [[t, c, int(rep.t_synch is not None and t >= rep.t_synch)] for t, c in zip(starts, values)]
    return Table(["t", "C", "synchronized"], rows)


def sync_map_table(cfg: RunConfig, log: PositivityLog, workers: int = 1) -> Table:
    sc = cfg.sync
    gm = sync_map(cfg.sweep.delta.grid(), cfg.sweep.g.grid(), cfg.bath, sc, cfg.initial.density(),
                  cfg.quadrature, cfg.include_lamb_shift, workers)
    rows = []
    for cell in gm.cells:
        if cell.ok:
            v = cell.value
            log.record(v.min_eig, f"sync-map delta={cell.delta:g} g={cell.g:g}")
            t = sc.horizon if v.t_synch is None else v.t_synch
            rows.append([cell.delta, cell.g, t, int(v.reached), v.sign, v.gap, v.im_lambda1, "ok"])
        else:
            rows.append([cell.delta, cell.g, math.nan, 0, 0, math.nan, math.nan, "failed"])
    return Table(["delta", "g", "t_synch", "reached", "sign", "gap", "im_lambda1", "status"], rows, list(gm.cells))


def spectrum_table(cfg: RunConfig, log: PositivityLog) -> Table:
    model = build_model(cfg.model)
    spec = spectrum(build_generator(model, cfg.bath, cfg.quadrature, cfg.include_lamb_shift))
    rho0 = cfg.initial.density()
    if spec.defective:
        wx1 = wx2 = np.full(16, math.nan)
    else:
        wx1 = np.abs(mode_contributions(spec, pauli("x", 1), rho0))
        wx2 = np.abs(mode_contributions(spec, pauli("x", 2), rho0))
    weight = np.maximum(wx1, wx2)
    order = sorted(range(16), key=lambda k: (-np.nan_to_num(weight[k], nan=-1.0), k))
    rank = {k: i + 1 for i, k in enumerate(order)}
    real = spec.is_real()
    rows = [[lam.real, lam.imag, int(real[k]), wx1[k], wx2[k], rank[k], int(spec.defective)]
            for k, lam in enumerate(spec.eigenvalues)]
    return Table(["re", "im", "is_real_mode", "weight_sigma1x", "weight_sigma2x", "rank", "defective"], rows)


_CV_FIELDS = ["concurrence", "entanglement_of_formation", "mutual_information", "classical", "discord",
              "theta", "phi"]


def _cv_row(cv: CorrelationValues) -> list:
    return [getattr(cv, f) for f in _CV_FIELDS]


def correlations_table(cfg: RunConfig, log: PositivityLog) -> Table:
    cc = cfg.correlations
    times = cc.eval_times()
    deltas = cc.deltas if cc.deltas is not None else (cfg.model.detuning,)
    rows = []
    for d in deltas:
        c = with_model(cfg, delta=float(d))
        traj = trajectory(c, times)
        log.record(float(traj.min_eig.min()), f"correlations delta={float(d):g} g={c.model.g:g}")
        vals = correlation_trace(traj.states, cc.measured_party, cc.grid, cc.clamp_tol)
        rows += [[float(d), t, *_cv_row(v)] for t, v in zip(traj.times, vals)]
    return Table(["delta", "t", *_CV_FIELDS], rows)


def _state_at(cfg: RunConfig, t: float) -> tuple[np.ndarray, float]:
    times = np.array([0.0, t]) if t > 0 else np.array([0.0])
    traj = trajectory(cfg, times)
    return traj.states[-1], float(traj.min_eig.min())


def _ef_cell(delta: float, g: float, cfg: RunConfig, t: float) -> tuple[float, float, float]:
    rho, mn = _state_at(with_model(cfg, delta, g), t)
    c = concurrence(rho, cfg.correlations.clamp_tol)
    return c, eof_from_concurrence(c), mn


def entanglement_map_table(cfg: RunConfig, log: PositivityLog, t: float, workers: int = 1) -> Table:
    """Concurrence and E_F at time ``t`` over the sweep grid."""
    fn = partial(_ef_cell, cfg=cfg, t=t)
    cells = run_grid(fn, cfg.sweep.delta.grid(), cfg.sweep.g.grid(), workers)
    rows = []
    for cell in cells:
        if cell.ok:
            c, ef, mn = cell.value
            log.record(mn, f"E_F map delta={cell.delta:g} g={cell.g:g}")
            rows.append([cell.delta, cell.g, t, c, ef, "ok"])
        else:
            rows.append([cell.delta, cell.g, t, math.nan, math.nan, "failed"])
    return Table(["delta", "g", "t", "concurrence", "entanglement_of_formation", "status"], rows, cells)


def _long_time_cell(delta: float, g: float, cfg: RunConfig, t: float) -> tuple[CorrelationValues, float]:
    rho, mn = _state_at(with_model(cfg, delta, g), t)
    cc = cfg.correlations
    return discord_and_classical(rho, cc.measured_party, cc.grid, tol=cc.clamp_tol), mn


def long_time_table(cfg: RunConfig, log: PositivityLog, t: float, workers: int = 1) -> Table:
    """Correlation measures at one (late) time over the sweep grid."""
    fn = partial(_long_time_cell, cfg=cfg, t=t)
    cells = run_grid(fn, cfg.sweep.delta.grid(), cfg.sweep.g.grid(), workers)
    rows = []
    for cell in cells:
        if cell.ok:
            cv, mn = cell.value
            log.record(mn, f"long-time delta={cell.delta:g} g={cell.g:g}")
            rows.append([cell.delta, cell.g, t, *_cv_row(cv), "ok"])
        else:
            rows.append([cell.delta, cell.g, t, *[math.nan] * len(_CV_FIELDS), "failed"])
    return Table(["delta", "g", "t", *_CV_FIELDS, "status"], rows, cells)


def _discord_sync_cell(delta: float, g: float, cfg: RunConfig, t: float) -> tuple[CorrelationValues, float | None, float]:
    c = with_model(cfg, delta, g)
    sc: SyncConfig = cfg.sync
    times = sc.times()
    traj = trajectory(c, times)
    rep = sync_time(traj, sc)
    # the discord time need not lie inside the sync horizon
    rho, mn = _state_at(c, t)
    cc = cfg.correlations
    cv = discord_and_classical(rho, cc.measured_party, cc.grid, tol=cc.clamp_tol)
    return cv, rep.t_synch, min(mn, float(traj.min_eig.min()))


def discord_sync_table(cfg: RunConfig, log: PositivityLog, t: float, workers: int = 1) -> Table:
    """Discord at time ``t`` next to t_synch, over the sweep grid."""
    fn = partial(_discord_sync_cell, cfg=cfg, t=t)
    cells = run_grid(fn, cfg.sweep.delta.grid(), cfg.sweep.g.grid(), workers)
    rows = []
    for cell in cells:
        if cell.ok:
            cv, ts, mn = cell.value
            log.record(mn, f"discord-sync delta={cell.delta:g} g={cell.g:g}")
            rows.append([cell.delta, cell.g, cv.discord, cv.classical,
                         cfg.sync.horizon if ts is None else ts, int(ts is not None), "ok"])
        else:
            rows.append([cell.delta, cell.g, math.nan, math.nan, math.nan, 0, "failed"])
    return Table(["delta", "g", f"discord_t{t:g}", f"classical_t{t:g}", "t_synch", "reached", "status"],
                 rows, cells)
