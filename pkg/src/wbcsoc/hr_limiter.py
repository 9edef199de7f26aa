"""Pointwise hierarchical reconstruction (HR) with remainder correction.

Each degree-2 piece on one grid is limited against the pieces of the
overlapping grid whose centres sit on its boundary: in 1-D the two dual cells
centred at the cell edges, in 2-D the four cells centred at the corners.

Stages run from the highest derivative down. At stage 2 the first derivative
is linear, so its gradient is limited directly. At stage 1 the quadratic
remainder, built from the already limited second-order coefficients, is
subtracted from the cell average and neighbour point values before a new
slope is chosen. The remainder may be replaced by its bounded correction
``a s^2 / (1 + sqrt|a| |s| + |a| s^2)``. Finally the constant term restores
the original cell average.
"""

from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_legendre


@dataclass(frozen=True)
class SmoothnessFlags:
    smooth: np.ndarray
    threshold: float


def minmod(a, b):
    """Smaller-magnitude argument when signs agree, else zero."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    same = np.sign(a) == np.sign(b)
    return np.where(same, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def minmod_linear(avg_center, point_left, point_right, dx):
    """Slope of a limited linear function from a cell average and two edge values."""
    half = 0.5 * dx
    s_minus = (avg_center - point_left) / half
    s_plus = (point_right - avg_center) / half
    return minmod(s_minus, s_plus)


def _correct_product(alpha, p):
    aa = np.abs(alpha) * np.abs(p)
    return alpha * p / (1.0 + np.sqrt(aa) + aa)


def remainder_correct(alpha, offset):
    """Bounded replacement of the quadratic remainder ``alpha * offset**2``."""
    offset = np.asarray(offset, dtype=float)
    return _correct_product(alpha, offset * offset)


def _remainder_1d(c2, s, correct):
    if correct:
        return remainder_correct(c2, s)
    return c2 * s * s


def hr_limit_1d(center, left, right, dx, remainder_correction=True):
    """Limit Taylor coefficients ``center`` (``(..., 3)``) against edge-centred neighbours."""
    half = 0.5 * dx
    c0, c1, c2 = center[..., 0], center[..., 1], center[..., 2]
    avg = c0 + c2 * dx * dx / 12.0

    c2_new = 0.5 * minmod_linear(c1, left[..., 1], right[..., 1], dx)

    nodes, weights = gauss_legendre(3)
    if remainder_correction:
        r_avg = sum(w * remainder_correct(c2_new, (x - 0.5) * dx) for x, w in zip(nodes, weights))
    else:
        r_avg = c2_new * dx * dx / 12.0
    r_left = _remainder_1d(c2_new, -half, remainder_correction)
    r_right = _remainder_1d(c2_new, half, remainder_correction)
    c1_new = minmod_linear(avg - r_avg, left[..., 0] - r_left, right[..., 0] - r_right, dx)

    out = np.empty_like(center)
    out[..., 0] = avg - c2_new * dx * dx / 12.0
    out[..., 1] = c1_new
    out[..., 2] = c2_new
    return out


def _remainder_2d(c20, c11, c02, sx, sy, correct):
    if correct:
        return (remainder_correct(c20, sx) + remainder_correct(c02, sy)
                + _correct_product(c11, sx * sy))
    return c20 * sx * sx + c11 * sx * sy + c02 * sy * sy


def _limit_linear_2d(avg, sw, se, nw, ne, dx, dy):
    """Limited x- and y-slopes from an average and four corner values."""
    sx = minmod_linear(avg, 0.5 * (sw + nw), 0.5 * (se + ne), dx)
    sy = minmod_linear(avg, 0.5 * (sw + se), 0.5 * (nw + ne), dy)
    return sx, sy


def hr_limit_2d(center, corners, dx, dy, remainder_correction=True):
    """2-D analogue of :func:`hr_limit_1d`; ``corners`` is ``(sw, se, nw, ne)``."""
    sw, se, nw, ne = corners
    hx, hy = 0.5 * dx, 0.5 * dy
    c = center
    avg = c[..., 0] + c[..., 3] * dx * dx / 12.0 + c[..., 5] * dy * dy / 12.0

    # stage 2: gradients of the two first-derivative polynomials
    sxx, sxy = _limit_linear_2d(c[..., 1], sw[..., 1], se[..., 1], nw[..., 1], ne[..., 1], dx, dy)
    syx, syy = _limit_linear_2d(c[..., 2], sw[..., 2], se[..., 2], nw[..., 2], ne[..., 2], dx, dy)
    c20 = 0.5 * sxx
    c02 = 0.5 * syy
    c11 = minmod(sxy, syx)

    # stage 1
    nodes, weights = gauss_legendre(3)
    if remainder_correction:
        r_avg = 0.0
        for xa, wa in zip(nodes, weights):
            for ya, wb in zip(nodes, weights):
                r_avg = r_avg + wa * wb * _remainder_2d(c20, c11, c02, (xa - 0.5) * dx,
                                                       (ya - 0.5) * dy, True)
    else:
        r_avg = c20 * dx * dx / 12.0 + c02 * dy * dy / 12.0

    def corner_value(nb, sx, sy):
        return nb[..., 0] - _remainder_2d(c20, c11, c02, sx * hx, sy * hy, remainder_correction)

    c10, c01 = _limit_linear_2d(avg - r_avg, corner_value(sw, -1, -1), corner_value(se, 1, -1),
                                corner_value(nw, -1, 1), corner_value(ne, 1, 1), dx, dy)
    out = np.empty_like(center)
    out[..., 0] = avg - c20 * dx * dx / 12.0 - c02 * dy * dy / 12.0
    out[..., 1] = c10
    out[..., 2] = c01
    out[..., 3] = c20
    out[..., 4] = c11
    out[..., 5] = c02
    return out


def hr_limit_cell(poly, neighbours, spacing, remainder_correction=True):
    """Limit one :class:`~wbcsoc.reconstruction.TaylorPoly`.

    ``neighbours`` is ``(left, right)`` in 1-D or ``(sw, se, nw, ne)`` in 2-D,
    each a TaylorPoly centred on the corresponding edge or corner.
    """
    from .reconstruction import TaylorPoly

    if poly.dim == 1:
        left, right = neighbours
        c = hr_limit_1d(poly.coeffs, left.coeffs, right.coeffs, float(spacing), remainder_correction)
    else:
        dx, dy = spacing
        c = hr_limit_2d(poly.coeffs, [n.coeffs for n in neighbours], dx, dy, remainder_correction)
    return TaylorPoly(poly.center, c)


def smoothness_detect(averages, spacing, threshold=1.0):
    """Flag cells whose centred second differences are below ``threshold * dx * (1 + |u|)``.

    A cell counts as smooth only if every component passes. Cells without a
    full stencil are flagged smooth.
    """
    u = np.asarray(averages, dtype=float)
    smooth = np.ones(u.shape[:-1], dtype=bool)
    steps = (spacing,) if np.ndim(spacing) == 0 else tuple(spacing)
    for axis, h in enumerate(steps):
        n = u.shape[axis]
        sl = [slice(None)] * u.ndim
        centre = list(sl)
        centre[axis] = slice(1, n - 1)
        lo = list(sl)
        lo[axis] = slice(0, n - 2)
        hi = list(sl)
        hi[axis] = slice(2, n)
        uc = u[tuple(centre)]
        d2 = u[tuple(hi)] - 2.0 * uc + u[tuple(lo)]
        ok = np.all(np.abs(d2) <= threshold * h * (1.0 + np.abs(uc)), axis=-1)
        smooth[tuple(centre[:-1])] &= ok
    return SmoothnessFlags(smooth, float(threshold))


def hr_limit_field(primal, dual, primal_flags, dual_flags, spacing, remainder_correction=True):
    """Limit every non-smooth cell of both grids against the other grid.

    ``primal`` and ``dual`` are unlimited coefficient arrays; flags may be
    :class:`SmoothnessFlags`, boolean arrays or ``None`` (limit everywhere).
    Rim cells without overlapping neighbours are passed through.
    """

    def mask(flags, shape):
        if flags is None:
            return np.zeros(shape, dtype=bool)
        return getattr(flags, "smooth", flags)

    cell_shape = primal.shape[:-2]
    p_rough = ~mask(primal_flags, cell_shape)
    d_rough = ~mask(dual_flags, cell_shape)
    lp = primal.copy()
    ld = dual.copy()
    if np.ndim(spacing) == 0:
        dx = float(spacing)
        i = np.nonzero(p_rough[1:])[0] + 1
        lp[i] = hr_limit_1d(primal[i], dual[i - 1], dual[i], dx, remainder_correction)
        i = np.nonzero(d_rough[:-1])[0]
        ld[i] = hr_limit_1d(dual[i], primal[i], primal[i + 1], dx, remainder_correction)
        return lp, ld
    dx, dy = spacing
    i, j = np.nonzero(p_rough[1:, 1:])
    i, j = i + 1, j + 1
    lp[i, j] = hr_limit_2d(primal[i, j], (dual[i - 1, j - 1], dual[i, j - 1], dual[i - 1, j], dual[i, j]),
                           dx, dy, remainder_correction)
    i, j = np.nonzero(d_rough[:-1, :-1])
    ld[i, j] = hr_limit_2d(dual[i, j], (primal[i, j], primal[i + 1, j], primal[i, j + 1], primal[i + 1, j + 1]),
                           dx, dy, remainder_correction)
    return lp, ld
