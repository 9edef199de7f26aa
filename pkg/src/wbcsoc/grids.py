"""Overlapping uniform grids, staggered cell-average storage and ghost cells.

Index conventions (per axis, ``g`` ghost layers, ``n`` interior cells):

* primal cell ``p`` is centred at ``x_min + (p - g + 1/2) dx``; interior
  primal cells are ``g .. g + n - 1``.
* dual cell ``q`` is centred at ``x_min + (q - g + 1) dx``, i.e. on the right
  edge of primal cell ``q``; it spans the centres of primal cells ``q`` and
  ``q + 1``.

With periodic boundaries the dual grid has ``n`` interior cells. Otherwise the
two dual cells straddling the domain ends are ghosts, leaving ``n - 1``
interior dual cells.
"""

from dataclasses import dataclass, field

import numpy as np

from .quadrature import gauss_legendre

ABSORBING = "absorbing"
PERIODIC = "periodic"
DIRICHLET = "dirichlet"
EXTRAPOLATE = "extrapolate"


class ConfigurationError(ValueError):
    """Raised for inconsistent grid, boundary or solver settings."""


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int
    n_ghost: int = 2
    dx: float = field(init=False)

    def __post_init__(self):
        if self.n_cells < 4:
            raise ConfigurationError(f"need at least 4 cells, got {self.n_cells}")
        if self.n_ghost < 2:
            raise ConfigurationError(f"need at least 2 ghost layers, got {self.n_ghost}")
        if not self.x_max > self.x_min:
            raise ConfigurationError(f"degenerate domain [{self.x_min}, {self.x_max}]")
        object.__setattr__(self, "dx", (self.x_max - self.x_min) / self.n_cells)

    dim = 1

    @property
    def n_total(self):
        return self.n_cells + 2 * self.n_ghost

    @property
    def shape(self):
        return (self.n_total,)

    @property
    def spacing(self):
        return self.dx

    @property
    def length(self):
        return self.x_max - self.x_min

    @property
    def measure(self):
        return self.length

    @property
    def cell_measure(self):
        return self.dx

    def primal_centers(self):
        k = np.arange(self.n_total) - self.n_ghost
        return self.x_min + (k + 0.5) * self.dx

    def dual_centers(self):
        k = np.arange(self.n_total) - self.n_ghost
        return self.x_min + (k + 1.0) * self.dx

    def edges(self):
        """Primal cell edges, ``n_total + 1`` values including ghost cells."""
        k = np.arange(self.n_total + 1) - self.n_ghost
        return self.x_min + k * self.dx

    def primal_interior(self):
        g = self.n_ghost
        return (slice(g, g + self.n_cells),)

    def dual_interior(self, periodic=False):
        g = self.n_ghost
        stop = g + self.n_cells if periodic else g + self.n_cells - 1
        return (slice(g, stop),)


@dataclass(frozen=True)
class Grid2D:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    n_ghost: int = 2
    dx: float = field(init=False)
    dy: float = field(init=False)

    def __post_init__(self):
        if min(self.nx, self.ny) < 4:
            raise ConfigurationError(f"need at least 4 cells per axis, got {self.nx}x{self.ny}")
        if self.n_ghost < 2:
            raise ConfigurationError(f"need at least 2 ghost layers, got {self.n_ghost}")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ConfigurationError("degenerate domain")
        object.__setattr__(self, "dx", (self.x_max - self.x_min) / self.nx)
        object.__setattr__(self, "dy", (self.y_max - self.y_min) / self.ny)

    dim = 2

    @property
    def shape(self):
        return (self.nx + 2 * self.n_ghost, self.ny + 2 * self.n_ghost)

    @property
    def spacing(self):
        return (self.dx, self.dy)

    @property
    def measure(self):
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def cell_measure(self):
        return self.dx * self.dy

    def _axis(self, axis):
        if axis == 0:
            return self.x_min, self.dx, self.nx
        return self.y_min, self.dy, self.ny

    def primal_axis(self, axis):
        lo, h, n = self._axis(axis)
        return lo + (np.arange(n + 2 * self.n_ghost) - self.n_ghost + 0.5) * h

    def dual_axis(self, axis):
        lo, h, n = self._axis(axis)
        return lo + (np.arange(n + 2 * self.n_ghost) - self.n_ghost + 1.0) * h

    def edge_axis(self, axis):
        lo, h, n = self._axis(axis)
        return lo + (np.arange(n + 2 * self.n_ghost + 1) - self.n_ghost) * h

    def primal_centers(self):
        return np.meshgrid(self.primal_axis(0), self.primal_axis(1), indexing="ij")

    def dual_centers(self):
        return np.meshgrid(self.dual_axis(0), self.dual_axis(1), indexing="ij")

    def primal_interior(self):
        g = self.n_ghost
        return (slice(g, g + self.nx), slice(g, g + self.ny))

    def dual_interior(self, periodic=(False, False)):
        g = self.n_ghost
        px, py = periodic
        return (slice(g, g + self.nx - (0 if px else 1)),
                slice(g, g + self.ny - (0 if py else 1)))


def build_grids(domain, n_cells, n_ghost=2):
    """Build a 1-D grid from ``(a, b), n`` or a 2-D grid from ``((a, b), (c, d)), (nx, ny)``."""
    domain = tuple(domain)
    if np.ndim(domain[0]) == 0:
        if np.ndim(n_cells) != 0:
            raise ConfigurationError("1-D domain needs a scalar cell count")
        return Grid1D(float(domain[0]), float(domain[1]), int(n_cells), n_ghost)
    (a, b), (c, d) = domain
    nx, ny = n_cells
    return Grid2D(float(a), float(b), float(c), float(d), int(nx), int(ny), n_ghost)


@dataclass(frozen=True)
class OverlappingField:
    """Cell averages on the primal and dual grids.

    Both arrays carry ghost cells and a trailing component axis: ``(w, hu)``
    in 1-D, ``(w, hu, hv)`` in 2-D.
    """

    primal: np.ndarray
    dual: np.ndarray

    @property
    def n_components(self):
        return self.primal.shape[-1]

    def __add__(self, other):
        return OverlappingField(self.primal + other.primal, self.dual + other.dual)

    def __mul__(self, scalar):
        return OverlappingField(scalar * self.primal, scalar * self.dual)

    __rmul__ = __mul__

    def copy(self):
        return OverlappingField(self.primal.copy(), self.dual.copy())

    def is_finite(self):
        return bool(np.all(np.isfinite(self.primal)) and np.all(np.isfinite(self.dual)))


@dataclass(frozen=True)
class SideCondition:
    """Boundary condition on one side of the domain.

    For ``dirichlet`` sides ``values`` holds one entry per component: a float,
    a callable of time, or ``"extrapolate"`` (copy of the nearest interior
    average, same as absorbing).
    """

    kind: str = ABSORBING
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in (ABSORBING, PERIODIC, DIRICHLET):
            raise ConfigurationError(f"unknown boundary kind {self.kind!r}")

    def prescribed(self, t, n_components):
        out = {}
        if self.kind != DIRICHLET:
            return out
        if len(self.values) > n_components:
            raise ConfigurationError("more Dirichlet values than state components")
        for k, v in enumerate(self.values):
            if v is None or (isinstance(v, str) and v == EXTRAPOLATE):
                continue
            out[k] = float(v(t)) if callable(v) else float(v)
        return out


@dataclass(frozen=True)
class BoundarySpec:
    left: SideCondition = SideCondition()
    right: SideCondition = SideCondition()
    bottom: SideCondition = None
    top: SideCondition = None

    def __post_init__(self):
        pairs = [(self.left, self.right)]
        if self.bottom is not None or self.top is not None:
            if self.bottom is None or self.top is None:
                raise ConfigurationError("2-D boundary needs both bottom and top")
            pairs.append((self.bottom, self.top))
        for lo, hi in pairs:
            if (lo.kind == PERIODIC) != (hi.kind == PERIODIC):
                raise ConfigurationError("periodic must be set on both opposing sides")

    @classmethod
    def absorbing(cls, dim=1):
        if dim == 1:
            return cls()
        return cls(SideCondition(), SideCondition(), SideCondition(), SideCondition())

    @classmethod
    def periodic(cls, dim=1):
        p = SideCondition(PERIODIC)
        if dim == 1:
            return cls(p, p)
        return cls(p, p, p, p)

    @property
    def dim(self):
        return 1 if self.bottom is None else 2

    def periodic_axes(self):
        axes = [self.left.kind == PERIODIC]
        if self.dim == 2:
            axes.append(self.bottom.kind == PERIODIC)
        return tuple(axes)


def _index(axis, idx, ndim):
    s = [slice(None)] * ndim
    s[axis] = idx
    return tuple(s)


def _fill_axis(primal, dual, axis, n, g, lo, hi, t):
    """Fill ghosts along one axis, in place."""
    nd = primal.ndim
    nc = primal.shape[-1]
    if lo.kind == PERIODIC:
        for arr in (primal, dual):
            arr[_index(axis, slice(0, g), nd)] = arr[_index(axis, slice(n, n + g), nd)]
            arr[_index(axis, slice(n + g, n + 2 * g), nd)] = arr[_index(axis, slice(g, 2 * g), nd)]
        return
    # primal: ghosts outside [g, n+g)
    # dual: ghosts are [0, g) and [n+g-1, n+2g), the latter includes the straddling cell
    for arr, lo_src, hi_start, hi_src in ((primal, g, n + g, n + g - 1),
                                          (dual, g, n + g - 1, n + g - 2)):
        arr[_index(axis, slice(0, lo_src), nd)] = arr[_index(axis, slice(lo_src, lo_src + 1), nd)]
        arr[_index(axis, slice(hi_start, None), nd)] = arr[_index(axis, slice(hi_src, hi_src + 1), nd)]
        for side, region in ((lo, slice(0, lo_src)), (hi, slice(hi_start, None))):
            for k, value in side.prescribed(t, nc).items():
                idx = list(_index(axis, region, nd))
                idx[-1] = k
                arr[tuple(idx)] = value


def apply_boundary(field, grid, spec, t=0.0):
    """Return a copy of ``field`` with ghost averages on both grids filled."""
    if spec.dim != grid.dim:
        raise ConfigurationError("boundary spec dimension does not match grid")
    primal = field.primal.copy()
    dual = field.dual.copy()
    g = grid.n_ghost
    if grid.dim == 1:
        _fill_axis(primal, dual, 0, grid.n_cells, g, spec.left, spec.right, t)
    else:
        _fill_axis(primal, dual, 0, grid.nx, g, spec.left, spec.right, t)
        _fill_axis(primal, dual, 1, grid.ny, g, spec.bottom, spec.top, t)
    return OverlappingField(primal, dual)


def _stack(values):
    return np.stack([np.asarray(v, dtype=float) for v in values], axis=-1)


def cell_averages(initial, grid, n_quad=3):
    """Cell averages of analytic data on both grids, ghosts included.

    ``initial`` maps coordinates to a tuple of component arrays. Each cell is
    split at the centre (quarters in 2-D) so that jumps located on the other
    grid's cell edges are integrated exactly; each piece uses an ``n_quad``
    Gauss rule per axis.
    """
    nodes, weights = gauss_legendre(n_quad)
    # sub-cell nodes on [-1/2, 1/2] as two halves
    sub = np.concatenate([-0.5 + 0.5 * nodes, 0.5 * nodes])
    sub_w = np.concatenate([weights, weights]) * 0.5
    if grid.dim == 1:
        out = []
        for centres in (grid.primal_centers(), grid.dual_centers()):
            x = centres[:, None] + grid.dx * sub[None, :]
            vals = _stack(initial(x))
            out.append(np.einsum("nqc,q->nc", vals, sub_w))
        return OverlappingField(*out)
    out = []
    for xc, yc in (grid.primal_centers(), grid.dual_centers()):
        x = xc[..., None, None] + grid.dx * sub[:, None]
        y = yc[..., None, None] + grid.dy * sub[None, :]
        x, y = np.broadcast_arrays(x, y)
        vals = _stack(initial(x, y))
        out.append(np.einsum("ijabc,a,b->ijc", vals, sub_w, sub_w))
    return OverlappingField(*out)
