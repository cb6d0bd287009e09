"""Deterministic (detuning, anisotropy) grid evaluation with an optional process pool."""

from __future__ import annotations

import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class CellResult:
    delta: float
    g: float
    value: Any
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_cell(args):
    fn, delta, g = args
    try:
        return CellResult(delta, g, fn(delta, g))
    except Exception as exc:  # per-cell failures are recorded, not fatal
        msg = "".join(traceback.format_exception_only(type(exc), exc)).strip()
        return CellResult(delta, g, None, msg)


def run_grid(fn: Callable[[float, float], Any], delta_grid: Sequence[float], g_grid: Sequence[float],
             workers: int = 1) -> list[CellResult]:
    """Evaluate ``fn(delta, g)`` on every cell, delta-major (row-major) order.

    ``fn`` must be picklable when ``workers > 1``.  Results are ordered by grid
    index regardless of scheduling.
    """
    delta_grid = [float(d) for d in np.atleast_1d(delta_grid)]
    g_grid = [float(g) for g in np.atleast_1d(g_grid)]
    if not delta_grid or not g_grid:
        raise ValueError("grids must be non-empty")
    tasks = [(fn, d, g) for d in delta_grid for g in g_grid]
    if workers <= 1 or len(tasks) == 1:
        return [_run_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass(frozen=True)
class GridMap:
    """Grid results; ``values[i, j]`` belongs to ``delta[i]``, ``g[j]`` (NaN where a cell failed)."""

    delta: np.ndarray
    g: np.ndarray
    values: np.ndarray
    cells: tuple[CellResult, ...]

    @property
    def failures(self) -> list[CellResult]:
        return [c for c in self.cells if not c.ok]


def grid_map(cells: Sequence[CellResult], delta_grid, g_grid, extract: Callable[[Any], float]) -> GridMap:
    delta = np.asarray(delta_grid, dtype=float).reshape(-1)
    g = np.asarray(g_grid, dtype=float).reshape(-1)
    vals = np.full((delta.size, g.size), np.nan)
    for n, cell in enumerate(cells):
        if cell.ok:
            vals[divmod(n, g.size)] = extract(cell.value)
    return GridMap(delta, g, vals, tuple(cells))
