"""Error norms, order estimates and steady-state residuals."""

import math
from dataclasses import dataclass

import numpy as np

from ..grids import OverlappingField


@dataclass(frozen=True)
class ErrorReport:
    """Per-component errors; ``l1`` is normalised by the domain measure."""

    l1: tuple
    linf: tuple
    n_cells: object
    components: tuple = ("w", "hu")

    def as_rows(self):
        return [(name, a, b) for name, a, b in zip(self.components, self.l1, self.linf)]


def component_names(n):
    return ("w", "hu", "hv")[:n]


def _interior(values, grid):
    if isinstance(values, OverlappingField):
        return values.primal[grid.primal_interior()]
    values = np.asarray(values, dtype=float)
    if values.shape[:-1] == grid.shape:
        return values[grid.primal_interior()]
    return values


def error_norms(values, reference, grid):
    """L1 (``sum |diff| * cell / |domain|``) and Linf errors on the primal interior.

    ``values`` and ``reference`` may be fields, full arrays with ghosts or
    interior arrays; they must describe the same grid.
    """
    a = _interior(values, grid)
    b = _interior(reference, grid)
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch: {a.shape} vs {b.shape}")
    diff = np.abs(a - b)
    cell_axes = tuple(range(diff.ndim - 1))
    l1 = np.sum(diff, axis=cell_axes) * grid.cell_measure / grid.measure
    linf = np.max(diff, axis=cell_axes)
    n = grid.n_cells if grid.dim == 1 else (grid.nx, grid.ny)
    return ErrorReport(tuple(float(v) for v in l1), tuple(float(v) for v in linf), n,
                       component_names(diff.shape[-1]))


def agglomerate(values, factor):
    """Exact averages of groups of ``factor`` cells (per axis) of interior arrays."""
    if factor == 1:
        return np.asarray(values)
    v = np.asarray(values, dtype=float)
    if v.ndim == 2:
        n = v.shape[0] // factor
        return v[:n * factor].reshape(n, factor, -1).mean(axis=1)
    nx, ny = v.shape[0] // factor, v.shape[1] // factor
    return v[:nx * factor, :ny * factor].reshape(nx, factor, ny, factor, -1).mean(axis=(1, 3))


def _norm(v, kind):
    cell_axes = tuple(range(v.ndim - 1))
    if kind == "l1":
        return np.mean(np.abs(v), axis=cell_axes)
    if kind == "linf":
        return np.max(np.abs(v), axis=cell_axes)
    raise ValueError(f"unknown norm {kind!r}")


def aitken_order(coarse, mid, fine, norm="l1"):
    """Observed order from three interior solutions refined by factors of two.

    The finer solutions are agglomerated onto the coarse cells before
    differencing. Returns one order per component; ``nan`` where the
    denominator vanishes.
    """
    c = np.asarray(coarse, dtype=float)
    m = agglomerate(mid, 2)
    f = agglomerate(fine, 4)
    num = _norm(m - c, norm)
    den = _norm(f - m, norm)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.log2(num / den)
    return np.where((den > 0) & (num > 0), r, math.nan)


def steady_state_residual(previous, current, dt, grid=None):
    """Linf of the change between two snapshots divided by ``dt``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if grid is not None:
        interior = grid.primal_interior()
        a, b = previous.primal[interior], current.primal[interior]
    else:
        a, b = previous.primal, current.primal
    return float(np.max(np.abs(b - a)) / dt)
