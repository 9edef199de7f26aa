"""CSV solution files and plain-text error/order tables."""

import os
import tempfile

import numpy as np

from .swe_model import RegularizedBathymetry1D, RegularizedBathymetry2D, regularize_bathymetry

HEADER_1D = ("x", "h", "hu", "u", "w", "B")
HEADER_2D = ("x", "y", "h", "hu", "hv", "w", "B")


def _atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _fmt(v):
    return format(float(v), ".17g")


def _bottom_at_centres(bathymetry, grid):
    if not isinstance(bathymetry, (RegularizedBathymetry1D, RegularizedBathymetry2D)):
        bathymetry = regularize_bathymetry(bathymetry, grid)
    if isinstance(bathymetry, RegularizedBathymetry1D):
        return bathymetry.primal_averages
    return bathymetry.primal_center_values


def solution_table(field, grid, bathymetry):
    """Header and rows (one per interior primal cell, index order)."""
    interior = grid.primal_interior()
    B = _bottom_at_centres(bathymetry, grid)[interior]
    u = field.primal[interior]
    h = u[..., 0] - B
    if grid.dim == 1:
        x = grid.primal_centers()[interior]
        cols = [x, h, u[:, 1], u[:, 1] / h, u[:, 0], B]
        return HEADER_1D, np.stack(cols, axis=-1)
    X, Y = (c[interior] for c in grid.primal_centers())
    cols = [X, Y, h, u[..., 1], u[..., 2], u[..., 0], B]
    return HEADER_2D, np.stack([c.ravel() for c in cols], axis=-1)


def write_solution(field, grid, bathymetry, path):
    header, rows = solution_table(field, grid, bathymetry)
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def read_solution(path):
    """Column name -> array mapping of a file written by :func:`write_solution`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        data = np.zeros((0, len(header)))
    return {name: data[:, k] for k, name in enumerate(header)}


def format_error_report(report):
    lines = [f"grid {report.n_cells}" if report is not None else "grid",
             f"{'':<6}{'L1-error':>24}{'Linf-error':>24}"]
    if report is None:
        return "\n".join(lines[1:]) + "\n"
    for name, l1, linf in report.as_rows():
        lines.append(f"{name:<6}{l1:>24.16e}{linf:>24.16e}")
    return "\n".join(lines) + "\n"


def order_rows(solutions, components=("w", "hu")):
    """Rows ``(n_coarse, n_fine, {comp: (d1, dinf, r1, rinf)})`` for successive grid pairs.

    ``solutions`` are interior primal arrays on grids refined by two. ``d1``
    and ``dinf`` measure the pair's difference on the coarse cells; the order
    uses that pair and the next finer one, so the finest pair has none.
    """
    from .bench.metrics import agglomerate, aitken_order

    rows = []
    n = len(solutions)
    for k in range(n - 1):
        coarse, fine = solutions[k], solutions[k + 1]
        d = np.abs(agglomerate(fine, 2) - coarse)
        if k + 2 < n:
            r1 = aitken_order(coarse, fine, solutions[k + 2], "l1")
            rinf = aitken_order(coarse, fine, solutions[k + 2], "linf")
        else:
            r1 = rinf = np.full(d.shape[-1], np.nan)
        entry = {name: (float(np.mean(d[:, j])), float(np.max(d[:, j])), float(r1[j]), float(rinf[j]))
                 for j, name in enumerate(components)}
        rows.append((len(coarse), len(fine), entry))
    return rows


def format_order_table(rows, components=("w", "hu")):
    head = f"{'cells':>8}"
    for name in components:
        head += f"{name + ' L1-diff':>16}{name + ' L1-order':>14}{name + ' Linf-diff':>16}{name + ' Linf-order':>16}"
    lines = [head]
    for nc, nf, entry in rows:
        line = f"{nc:>8}"
        for name in components:
            d1, dinf, r1, rinf = entry[name]
            line += f"{d1:>16.6e}{_order(r1):>14}{dinf:>16.6e}{_order(rinf):>16}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def _order(r):
    return "-" if r != r else f"{r:.4f}"


def write_report(report, path, components=("w", "hu")):
    """Write an :class:`ErrorReport`, an order-row list, or ``None`` (header only)."""
    if isinstance(report, list):
        text = format_order_table(report, components)
    else:
        text = format_error_report(report)
    _atomic_write(path, text)
    return path
