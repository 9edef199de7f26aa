"""Unlimited degree-2 central reconstruction in Taylor form.

Coefficients are stored as scaled derivatives at the cell centre,
``c_m = phi^(m)(x_c) / m!``, so a 1-D piece reads
``c_0 + c_1 (x - x_c) + c_2 (x - x_c)^2``. In 2-D the coefficient axis is
ordered ``(00, 10, 01, 20, 11, 02)`` with
``c_jk = d^j/dx^j d^k/dy^k phi / (j! k!)``.

Coefficient arrays carry the cell axes first, then the state component, then
the coefficient: ``(n, nc, 3)`` in 1-D and ``(nx, ny, nc, 6)`` in 2-D.
Outermost ghost cells lack a full stencil and are reconstructed as constants.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MONOMIALS_2D = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


@dataclass(frozen=True)
class TaylorPoly:
    """Single-cell polynomial; ``coeffs`` has shape ``(nc, 3)`` or ``(nc, 6)``."""

    center: object
    coeffs: np.ndarray

    @property
    def dim(self):
        return 1 if self.coeffs.shape[-1] == 3 else 2

    def __call__(self, point):
        return eval_poly(self, point)


def _moment(m, a, b):
    """Average of ``s**m`` over ``[a, b]``."""
    if b == a:
        return a ** m
    return (b ** (m + 1) - a ** (m + 1)) / ((m + 1) * (b - a))


def eval_poly(poly, point):
    c = poly.coeffs
    if poly.dim == 1:
        s = point - poly.center
        return c[..., 0] + s * (c[..., 1] + s * c[..., 2])
    sx = point[0] - poly.center[0]
    sy = point[1] - poly.center[1]
    return evaluate_2d(c, sx, sy)


def cell_average_of_poly(poly, region):
    """Exact average of ``poly`` over an interval ``(a, b)`` or rectangle ``((a, b), (c, d))``."""
    c = poly.coeffs
    if poly.dim == 1:
        a, b = region[0] - poly.center, region[1] - poly.center
        return c[..., 0] + c[..., 1] * _moment(1, a, b) + c[..., 2] * _moment(2, a, b)
    (a, b), (e, f) = region
    cx, cy = poly.center
    return average_rect_2d(c, (a - cx, b - cx), (e - cy, f - cy))


def evaluate_1d(coeffs, s):
    return coeffs[..., 0] + s * (coeffs[..., 1] + s * coeffs[..., 2])


def average_1d(coeffs, a, b):
    """Average over the local interval ``[a, b]`` (offsets from the centre)."""
    return coeffs[..., 0] + coeffs[..., 1] * _moment(1, a, b) + coeffs[..., 2] * _moment(2, a, b)


def evaluate_2d(coeffs, sx, sy):
    c = coeffs
    return (c[..., 0] + c[..., 1] * sx + c[..., 2] * sy
            + c[..., 3] * sx * sx + c[..., 4] * sx * sy + c[..., 5] * sy * sy)


def average_rect_2d(coeffs, xr, yr):
    """Average over the local rectangle ``xr x yr``."""
    c = coeffs
    mx1, mx2 = _moment(1, *xr), _moment(2, *xr)
    my1, my2 = _moment(1, *yr), _moment(2, *yr)
    return (c[..., 0] + c[..., 1] * mx1 + c[..., 2] * my1
            + c[..., 3] * mx2 + c[..., 4] * mx1 * my1 + c[..., 5] * my2)


def gradient_2d(coeffs):
    """Coefficients of d/dx and d/dy as 2-D Taylor arrays (degree 1, padded)."""
    c = coeffs
    zero = np.zeros_like(c[..., 0])
    ddx = np.stack([c[..., 1], 2 * c[..., 3], c[..., 4], zero, zero, zero], axis=-1)
    ddy = np.stack([c[..., 2], c[..., 4], 2 * c[..., 5], zero, zero, zero], axis=-1)
    return ddx, ddy


def _reconstruct_1d(avg, dx):
    out = np.zeros(avg.shape + (3,))
    out[..., 0] = avg
    um, u0, up = avg[:-2], avg[1:-1], avg[2:]
    c2 = (up - 2.0 * u0 + um) / (2.0 * dx * dx)
    out[1:-1, ..., 1] = (up - um) / (2.0 * dx)
    out[1:-1, ..., 2] = c2
    out[1:-1, ..., 0] = u0 - c2 * dx * dx / 12.0
    return out


@lru_cache(maxsize=None)
def _lsq_operator_2d():
    """Map from the 8 neighbour differences to scaled (c10, c01, c20, c11, c02)."""
    rows = []
    for k in (-1, 0, 1):
        for l in (-1, 0, 1):
            if k == 0 and l == 0:
                continue
            rows.append([k, l, k * k, k * l, l * l])
    return np.linalg.pinv(np.array(rows, dtype=float))


def _reconstruct_2d(avg, dx, dy):
    out = np.zeros(avg.shape + (6,))
    out[..., 0] = avg
    centre = avg[1:-1, 1:-1]
    diffs = []
    nx, ny = avg.shape[:2]
    for k in (-1, 0, 1):
        for l in (-1, 0, 1):
            if k == 0 and l == 0:
                continue
            diffs.append(avg[1 + k:nx - 1 + k, 1 + l:ny - 1 + l] - centre)
    d = np.stack(diffs, axis=-1)
    a = d @ _lsq_operator_2d().T
    inner = out[1:-1, 1:-1]
    inner[..., 1] = a[..., 0] / dx
    inner[..., 2] = a[..., 1] / dy
    inner[..., 3] = a[..., 2] / (dx * dx)
    inner[..., 4] = a[..., 3] / (dx * dy)
    inner[..., 5] = a[..., 4] / (dy * dy)
    inner[..., 0] = centre - inner[..., 3] * dx * dx / 12.0 - inner[..., 5] * dy * dy / 12.0
    return out


def central_reconstruct(averages, spacing):
    """Degree-2 Taylor coefficients from cell averages on one grid.

    1-D: the unique quadratic matching the averages of the left, home and
    right cells. 2-D: least-squares fit on the 3x3 stencil with the home-cell
    average imposed exactly.
    """
    averages = np.asarray(averages, dtype=float)
    if np.ndim(spacing) == 0:
        return _reconstruct_1d(averages, float(spacing))
    dx, dy = spacing
    return _reconstruct_2d(averages, float(dx), float(dy))


def poly_at(coeffs, centers, index):
    """Extract the single-cell :class:`TaylorPoly` at ``index``."""
    if isinstance(centers, tuple):
        xc, yc = centers
        return TaylorPoly((float(xc[index]), float(yc[index])), coeffs[index])
    return TaylorPoly(float(centers[index]), coeffs[index])
