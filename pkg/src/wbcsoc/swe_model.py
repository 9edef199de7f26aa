"""Saint-Venant physics in equilibrium variables ``(w, hu[, hv])``.

The momentum flux carries the constant-subtraction term ``g (wbar - w) B``
and the matching source is ``g (wbar - w) B_x``, with ``wbar`` the global mean
surface level. Both vanish identically at a lake at rest, which is what makes
the central scheme well balanced.
"""

from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_legendre

G_DEFAULT = 9.812


@dataclass(frozen=True)
class ModelParams:
    g: float = G_DEFAULT
    manning: float = 0.0
    h_min: float = 1e-8

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("g must be positive")
        if self.manning < 0:
            raise ValueError("Manning coefficient must be non-negative")
        if not self.h_min > 0:
            raise ValueError("h_min must be positive")


class DryStateError(RuntimeError):
    """Water depth dropped below ``h_min`` where velocities are needed."""

    def __init__(self, message, index=None, location=None):
        super().__init__(message)
        self.index = index
        self.location = location


def check_depth(h, params, where="", coords=None):
    h = np.asarray(h)
    bad = ~(h >= params.h_min)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        loc = None
        if coords is not None:
            loc = np.asarray(coords)[idx[:np.ndim(coords)]]
        msg = f"dry state (h={float(h[idx]):.3e} < {params.h_min:g}) at index {idx}"
        if where:
            msg += f" in {where}"
        if loc is not None:
            msg += f", x={loc}"
        raise DryStateError(msg, index=idx, location=loc)


# ---------------------------------------------------------------- bathymetry

@dataclass(frozen=True)
class Bathymetry:
    """Bottom elevation ``B`` as an analytic function.

    ``jumps`` lists x-locations of discontinuities (1-D only); at those points
    the regularized node value is the mean of the two one-sided limits.
    """

    func: object
    jumps: tuple = ()
    name: str = ""

    def __call__(self, *coords):
        return np.asarray(self.func(*coords), dtype=float) + np.zeros(np.shape(coords[0]))

    def interface_value(self, x):
        x = np.asarray(x, dtype=float)
        out = self(x)
        for xj in self.jumps:
            eps = 1e-9 * max(1.0, abs(xj))
            hit = np.abs(x - xj) <= eps
            if np.any(hit):
                lo = self(np.full(int(hit.sum()), xj - 1e3 * eps))
                hi = self(np.full(int(hit.sum()), xj + 1e3 * eps))
                out[hit] = 0.5 * (lo + hi)
        return out


def _interp_node(nodes, cell, s, dx):
    """Linear B at offset ``s`` from the centre of primal cell ``cell``."""
    left = nodes[cell]
    right = nodes[cell + 1]
    return 0.5 * (left + right) + (right - left) * s / dx, (right - left) / dx


@dataclass(frozen=True)
class RegularizedBathymetry1D:
    """Continuous piecewise-linear ``B~`` with nodes on the primal cell edges.

    ``nodes`` has one value per primal edge, ghost cells included, plus one
    extra edge past the right end so dual cells can reach their right
    neighbour.
    """

    nodes: np.ndarray
    dx: float
    x0: float

    def sample(self, cell, s):
        """``(B, B_x)`` at offset ``s`` from the centre of primal ``cell``."""
        value, slope = _interp_node(self.nodes, cell, s, self.dx)
        return value, slope + np.zeros_like(value)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        cell = np.clip(np.floor((x - self.x0) / self.dx).astype(int), 0, len(self.nodes) - 2)
        s = x - (self.x0 + (cell + 0.5) * self.dx)
        return self.sample(cell, s)[0]

    @property
    def primal_center_values(self):
        n = len(self.nodes) - 2
        return 0.5 * (self.nodes[:n] + self.nodes[1:n + 1])

    @property
    def dual_center_values(self):
        return self.nodes[1:-1]

    @property
    def primal_averages(self):
        return self.primal_center_values

    @property
    def dual_averages(self):
        bc = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        return 0.25 * (bc[:-1] + 2.0 * self.nodes[1:-1] + bc[1:])


@dataclass(frozen=True)
class RegularizedBathymetry2D:
    """Bilinear ``B~`` per primal cell from corner values.

    ``corners[i, j]`` is the south-west corner of primal cell ``(i, j)``; one
    extra row and column past the upper ends are stored.
    """

    corners: np.ndarray
    dx: float
    dy: float

    def sample(self, ci, cj, sx, sy):
        """``(B, B_x, B_y)`` at offset ``(sx, sy)`` from the centre of primal ``(ci, cj)``."""
        c = self.corners
        sw, se = c[ci, cj], c[ci + 1, cj]
        nw, ne = c[ci, cj + 1], c[ci + 1, cj + 1]
        a = sx / self.dx + 0.5
        b = sy / self.dy + 0.5
        value = (1 - a) * (1 - b) * sw + a * (1 - b) * se + (1 - a) * b * nw + a * b * ne
        bx = ((1 - b) * (se - sw) + b * (ne - nw)) / self.dx
        by = ((1 - a) * (nw - sw) + a * (ne - se)) / self.dy
        return value, bx, by

    @property
    def primal_center_values(self):
        c = self.corners[:-1, :-1]
        return 0.25 * (c[:-1, :-1] + c[1:, :-1] + c[:-1, 1:] + c[1:, 1:])

    @property
    def dual_center_values(self):
        return self.corners[1:-1, 1:-1]


def regularize_bathymetry(bathymetry, grid):
    """Piecewise-linear (1-D) or bilinear (2-D) regularization on ``grid``."""
    if grid.dim == 1:
        edges = np.append(grid.edges(), grid.edges()[-1] + grid.dx)
        nodes = bathymetry.interface_value(edges)
        return RegularizedBathymetry1D(nodes, grid.dx, float(edges[0]))
    xe = np.append(grid.edge_axis(0), grid.edge_axis(0)[-1] + grid.dx)
    ye = np.append(grid.edge_axis(1), grid.edge_axis(1)[-1] + grid.dy)
    X, Y = np.meshgrid(xe, ye, indexing="ij")
    return RegularizedBathymetry2D(bathymetry(X, Y), grid.dx, grid.dy)


# ---------------------------------------------------------------- fluxes and sources

def flux_wb_1d(w, hu, B, wbar, params):
    """Well-balanced flux ``(hu, hu^2/(w-B) + g (wbar-w) B + g w^2 / 2)``."""
    h = w - B
    check_depth(h, params, "flux")
    g = params.g
    return np.stack([hu + 0.0 * w, hu * hu / h + g * (wbar - w) * B + 0.5 * g * w * w], axis=-1)


def flux_plain_1d(h, hu, params):
    """Flux of the original system in ``(h, hu)``."""
    check_depth(h, params, "flux")
    return np.stack([hu + 0.0 * h, hu * hu / h + 0.5 * params.g * h * h], axis=-1)


def flux_wb_2d(w, hu, hv, B, wbar, params, direction="x"):
    h = w - B
    check_depth(h, params, "flux")
    g = params.g
    if direction == "x":
        return np.stack([hu + 0.0 * w, hu * hu / h + g * (wbar - w) * B + 0.5 * g * w * w,
                         hu * hv / h], axis=-1)
    if direction == "y":
        return np.stack([hv + 0.0 * w, hu * hv / h,
                         hv * hv / h + g * (wbar - w) * B + 0.5 * g * w * w], axis=-1)
    raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")


def manning_source(w, hu, B, params):
    """Friction ``(0, -g M^2 hu |hu| / h^(7/3))`` at points."""
    h = w - B
    check_depth(h, params, "friction")
    m2 = np.asarray(params.manning, dtype=float) ** 2
    mom = -params.g * m2 * hu * np.abs(hu) / h ** (7.0 / 3.0)
    return np.stack([np.zeros_like(mom), mom], axis=-1)


def source_wb_1d(segments, wbar, params, cell_length):
    """Cell average of ``(0, g (wbar - w~) B~_x)`` over a cell made of polynomial segments.

    ``segments`` is a sequence of ``(poly, a, b, slope)``: a TaylorPoly in
    ``(w, hu)``, the absolute interval it covers and the constant ``B~_x`` on
    it. Friction, when ``bathymetry`` is attached as a fifth segment entry
    ``(..., B_at)``, is integrated with the same rule.
    """
    from .reconstruction import eval_poly

    nodes, weights = gauss_legendre(3)
    total = np.zeros(2)
    for seg in segments:
        poly, a, b, slope = seg[:4]
        b_at = seg[4] if len(seg) > 4 else None
        for t, wt in zip(nodes, weights):
            x = a + (b - a) * t
            w, hu = eval_poly(poly, x)
            total[1] += wt * (b - a) * params.g * (wbar - w) * slope
            if b_at is not None and params.manning:
                total += wt * (b - a) * manning_source(w, hu, b_at(x), params)
    return total / cell_length


def source_wb_2d(poly, bathymetry_at, region, wbar, params):
    """Cell average of ``(0, g (wbar - w~) B~_x, g (wbar - w~) B~_y)`` over ``region``.

    ``bathymetry_at(x, y)`` returns ``(B, B_x, B_y)``; 3x3 tensor Gauss.
    """
    from .reconstruction import eval_poly

    (a, b), (c, d) = region
    nodes, weights = gauss_legendre(3)
    total = np.zeros(3)
    for tx, wx in zip(nodes, weights):
        for ty, wy in zip(nodes, weights):
            x = a + (b - a) * tx
            y = c + (d - c) * ty
            w = eval_poly(poly, (x, y))[0]
            _, bx, by = bathymetry_at(x, y)
            total[1] += wx * wy * params.g * (wbar - w) * bx
            total[2] += wx * wy * params.g * (wbar - w) * by
    return total


# ---------------------------------------------------------------- derived quantities

def global_mean_w(field, grid):
    """Mean water surface over the primal interior."""
    return float(np.mean(field.primal[grid.primal_interior()][..., 0]))


def max_wave_speed(w, hu, B, params, hv=None):
    """``max(|u| + sqrt(g h))``; in 2-D returns ``(a_x, a_y)``."""
    h = np.asarray(w) - np.asarray(B)
    check_depth(h, params, "wave speed")
    c = np.sqrt(params.g * h)
    ax = float(np.max(np.abs(hu / h) + c))
    if hv is None:
        return ax
    return ax, float(np.max(np.abs(hv / h) + c))


def froude(w, hu, B, params):
    h = np.asarray(w) - np.asarray(B)
    check_depth(h, params, "Froude number")
    return (hu / h) / np.sqrt(params.g * h)
