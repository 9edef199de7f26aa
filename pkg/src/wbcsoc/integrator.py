"""Semi-discrete central scheme on overlapping cells and its SSP-RK3 driver.

Each grid's averages relax toward the average of the other grid's
reconstruction over the same cell and are driven by flux differences taken
at the other grid's cell centres, plus the cell integral of the source::

    dV/dt = (avg_D(U~) - V) / dtau - (f(U~(x_{i+1})) - f(U~(x_i))) / dx + avg_D(S(U~))

and symmetrically for the primal averages. In 2-D the flux difference is the
boundary line integral over the dual (or primal) cell and the other two terms
are area averages.

A target cell is covered by halves (quadrants in 2-D) of two (four) cells of
the other grid, so every quantity is first computed per "other" cell and
piece, then assembled with shifted slices.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grids import ConfigurationError, OverlappingField, apply_boundary
from .hr_limiter import hr_limit_field, smoothness_detect
from .quadrature import gauss_legendre
from .reconstruction import average_1d, average_rect_2d, central_reconstruct, evaluate_1d, evaluate_2d
from .swe_model import (ModelParams, RegularizedBathymetry1D, RegularizedBathymetry2D, check_depth,
                        flux_plain_1d, flux_wb_1d, flux_wb_2d, global_mean_w, manning_source,
                        max_wave_speed, regularize_bathymetry)


class SolverError(RuntimeError):
    """The time loop produced non-finite values."""


@dataclass(frozen=True)
class SchemeConfig:
    """Discretization switches.

    ``detector_threshold=None`` limits every cell; ``limiter="none"`` skips HR.
    """

    limiter: str = "hr"
    detector_threshold: float = 1.0
    remainder_correction: bool = True
    well_balanced: bool = True

    def __post_init__(self):
        if self.limiter not in ("hr", "none"):
            raise ConfigurationError(f"limiter must be 'hr' or 'none', got {self.limiter!r}")


@dataclass(frozen=True)
class TimeControls:
    cfl: float = 0.4
    t_final: float = 0.0
    t: float = 0.0
    dt: float = math.nan
    dtau: float = math.nan

    @property
    def theta(self):
        return self.dt / self.dtau


@dataclass(frozen=True)
class SemiDiscreteRHS(OverlappingField):
    """Rates of change on both grids; ghost entries are zero.

    ``boundary_mass_rate`` is the rate of change of the mean of the two
    grids' total ``w`` mass, assembled from boundary data only.
    """

    boundary_mass_rate: float = 0.0


@dataclass(frozen=True)
class StepRecord:
    step: int
    t: float
    dt: float
    a: float
    total_w_mass: float
    max_hu: float


@dataclass
class AdvanceResult:
    field: OverlappingField
    t: float
    log: list
    net_boundary_inflow: float = 0.0
    snapshots: dict = field(default_factory=dict)


# ---------------------------------------------------------------- time stepping

def choose_step(a, spacing, controls):
    """Fill ``dt``/``dtau`` from the wave speed ``a`` (tuple ``(a_x, a_y)`` in 2-D)."""
    if np.ndim(spacing) == 0:
        dx = float(spacing)
        if a > 0:
            dtau = 0.5 * dx / a
            dt = controls.cfl * dx / a
        else:
            dtau = dt = dx
    else:
        dx, dy = spacing
        ax, ay = a
        rate = ax / dx + ay / dy
        if rate > 0:
            dtau = 0.5 / rate
            dt = controls.cfl / rate
        else:
            dtau = dt = min(dx, dy)
    remaining = controls.t_final - controls.t
    if dt > remaining:
        dt = remaining
    ctrl = replace(controls, dt=dt, dtau=dtau)
    if not ctrl.theta <= 1.0 + 1e-12:
        raise ConfigurationError(f"theta = dt/dtau = {ctrl.theta:.3f} exceeds 1 (cfl={controls.cfl})")
    return ctrl


def ssp_rk3_step(u, rhs, dt, t=0.0):
    """Three-stage SSP Runge-Kutta step; ``rhs(u, t)`` returns the rate."""
    u1 = u + dt * rhs(u, t)
    u2 = 0.75 * u + 0.25 * (u1 + dt * rhs(u1, t + dt))
    return (1.0 / 3.0) * u + (2.0 / 3.0) * (u2 + dt * rhs(u2, t + 0.5 * dt))


# SSP-RK3 as a Butcher tableau has weights (1/6, 1/6, 2/3)
_RK3_WEIGHTS = (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0)


# ---------------------------------------------------------------- shared machinery

class _CSOCBase:
    dim = None

    def __init__(self, grid, bathymetry, boundary, params=None, scheme=None):
        if grid.dim != self.dim or boundary.dim != self.dim:
            raise ConfigurationError("grid, boundary and solver dimensions differ")
        self.grid = grid
        self.boundary = boundary
        self.params = params or ModelParams()
        self.scheme = scheme or SchemeConfig()
        self.periodic = boundary.periodic_axes()
        self.primal_interior = grid.primal_interior()
        self.dual_interior = grid.dual_interior(self.periodic if self.dim == 2 else self.periodic[0])

    def fill(self, field, t):
        return apply_boundary(field, self.grid, self.boundary, t)

    def global_mean_w(self, field):
        return global_mean_w(field, self.grid)

    def masses(self, field):
        """Total ``w`` on the primal and dual interiors."""
        m = self.grid.cell_measure
        return (float(np.sum(field.primal[self.primal_interior][..., 0]) * m),
                float(np.sum(field.dual[self.dual_interior][..., 0]) * m))

    def total_mass(self, field):
        mp, md = self.masses(field)
        return 0.5 * (mp + md)

    def _reconstruct(self, U, V):
        sp = self.grid.spacing
        cP = central_reconstruct(U, sp)
        cQ = central_reconstruct(V, sp)
        if self.scheme.limiter == "hr":
            thr = self.scheme.detector_threshold
            if thr is None:
                fp = fq = None
            else:
                fp = smoothness_detect(U, sp, thr)
                fq = smoothness_detect(V, sp, thr)
            cP, cQ = hr_limit_field(cP, cQ, fp, fq, sp, self.scheme.remainder_correction)
        return cP, cQ

    def _finish(self, rate_U, rate_V, bmr):
        out_U = np.zeros_like(rate_U)
        out_V = np.zeros_like(rate_V)
        out_U[self.primal_interior] = rate_U[self.primal_interior]
        out_V[self.dual_interior] = rate_V[self.dual_interior]
        return SemiDiscreteRHS(out_U, out_V, bmr)


# ---------------------------------------------------------------- 1-D

class CSOC1D(_CSOCBase):
    """Well-balanced central scheme on overlapping cells, one space dimension."""

    dim = 1

    def __init__(self, grid, bathymetry, boundary, params=None, scheme=None):
        super().__init__(grid, bathymetry, boundary, params, scheme)
        if isinstance(bathymetry, RegularizedBathymetry1D):
            self.btilde = bathymetry
        else:
            self.btilde = regularize_bathymetry(bathymetry, grid)
        bt = self.btilde
        n = grid.n_total
        h = 0.5 * grid.dx
        cells = np.arange(n)[:, None]
        nodes, weights = gauss_legendre(3)
        self._w = weights
        self._sR = h * nodes
        self._sL = -h + h * nodes
        self.b_center = {"primal": bt.primal_center_values, "dual": bt.dual_center_values}
        self.b_average = {"primal": bt.primal_averages, "dual": bt.dual_averages}
        # B~ and B~_x at half-cell Gauss nodes of each grid's cells
        # right-half nodes first, then left-half nodes
        self._b_half = {
            "primal": tuple(np.concatenate(p, axis=1) for p in
                            zip(bt.sample(cells, self._sR), bt.sample(cells, self._sL))),
            "dual": tuple(np.concatenate(p, axis=1) for p in
                          zip(bt.sample(cells + 1, self._sR - h), bt.sample(cells, self._sL + h))),
        }
        eye = np.eye(3)
        # columns: centre value, right/left half averages, the six Gauss-node values
        self._basis = np.stack([evaluate_1d(eye, 0.0), average_1d(eye, 0.0, h), average_1d(eye, -h, 0.0)]
                               + [evaluate_1d(eye, s) for s in np.concatenate([self._sR, self._sL])], axis=-1)
        self.x = {"primal": grid.primal_centers(), "dual": grid.dual_centers()}

    # variables used for reconstruction: (w, hu) or, without well-balancing, (h, hu)
    def _to_recon(self, field):
        U, V = field.primal, field.dual
        if self.scheme.well_balanced:
            return U, V
        U = U.copy()
        V = V.copy()
        U[:, 0] -= self.b_average["primal"]
        V[:, 0] -= self.b_average["dual"]
        return U, V

    def _flux(self, vals, B, wbar):
        if self.scheme.well_balanced:
            return flux_wb_1d(vals[..., 0], vals[..., 1], B, wbar, self.params)
        return flux_plain_1d(vals[..., 0], vals[..., 1], self.params)

    def _source_density(self, vals, B, Bx, wbar):
        p = self.params
        if self.scheme.well_balanced:
            w = vals[..., 0]
            h = w - B
            mom = p.g * (wbar - w) * Bx
        else:
            h = vals[..., 0]
            mom = -p.g * h * Bx
        if p.manning:
            mom = mom + manning_source(h, vals[..., 1], 0.0, p)[..., 1]
        return mom

    def _pieces(self, coeffs, which, wbar):
        h = 0.5 * self.grid.dx
        v = coeffs @ self._basis
        F = self._flux(v[..., 0], self.b_center[which], wbar)
        B, Bx = self._b_half[which]
        dens = self._source_density(np.moveaxis(v[..., 3:], -1, -2), B, Bx, wbar)
        return F, v[..., 1], v[..., 2], h * (dens[:, :3] @ self._w), h * (dens[:, 3:] @ self._w)

    def limited_reconstruction(self, field):
        """Limited Taylor coefficients in reconstruction variables, ghosts filled."""
        U, V = self._to_recon(field)
        return self._reconstruct(U, V)

    def rhs(self, field, t, dtau, wbar):
        field = self.fill(field, t)
        U, V = self._to_recon(field)
        cP, cQ = self._reconstruct(U, V)
        dx = self.grid.dx
        FP, RP, LP, SRP, SLP = self._pieces(cP, "primal", wbar)
        FQ, RQ, LQ, SRQ, SLQ = self._pieces(cQ, "dual", wbar)

        rate_V = np.zeros_like(V)
        rate_U = np.zeros_like(U)
        src_V = np.zeros_like(V)
        src_U = np.zeros_like(U)
        src_V[:-1, 1] = (SRP[:-1] + SLP[1:]) / dx
        src_U[1:, 1] = (SRQ[:-1] + SLQ[1:]) / dx
        rate_V[:-1] = (0.5 * (RP[:-1] + LP[1:]) - V[:-1]) / dtau - (FP[1:] - FP[:-1]) / dx + src_V[:-1]
        rate_U[1:] = (0.5 * (RQ[:-1] + LQ[1:]) - U[1:]) / dtau - (FQ[1:] - FQ[:-1]) / dx + src_U[1:]

        bmr = 0.0
        if not self.periodic[0]:
            g, N = self.grid.n_ghost, self.grid.n_cells
            flux = -(FQ[N + g - 1, 0] - FQ[g - 1, 0]) - (FP[N + g - 1, 0] - FP[g, 0])
            relax = (0.5 * dx / dtau) * (RQ[g - 1, 0] + LQ[N + g - 1, 0] - LP[g, 0] - RP[N + g - 1, 0])
            bmr = 0.5 * (flux + relax)
        return self._finish(rate_U, rate_V, bmr)

    def interior_arrays(self, field):
        """Interior primal and dual averages with matching ``B~`` averages."""
        return ((field.primal[self.primal_interior], self.b_average["primal"][self.primal_interior]),
                (field.dual[self.dual_interior], self.b_average["dual"][self.dual_interior]))

    def wave_speed(self, field):
        a = 0.0
        for avg, B in self.interior_arrays(field):
            a = max(a, max_wave_speed(avg[:, 0], avg[:, 1], B, self.params))
        return a


# ---------------------------------------------------------------- 2-D

_QUADS = {"NE": (1, 1), "NW": (-1, 1), "SE": (1, -1), "SW": (-1, -1)}
_HALVES = {"N": (0, 1), "S": (0, -1), "E": (1, 0), "W": (-1, 0)}


class CSOC2D(_CSOCBase):
    """Two-dimensional version on overlapping rectangles.

    Dual cells are centred on primal corners. Quadrant source integrals are
    exact for the bilinear ``B~`` and quadratic ``w~`` (3x3 Gauss), absorbed
    into precomputed moment weights; edge fluxes use 2-point Gauss per half
    edge.
    """

    dim = 2

    def __init__(self, grid, bathymetry, boundary, params=None, scheme=None):
        super().__init__(grid, bathymetry, boundary, params, scheme)
        if not self.scheme.well_balanced:
            raise ConfigurationError("the non-well-balanced baseline is only available in 1-D")
        if self.params.manning:
            raise ConfigurationError("Manning friction is only available in 1-D")
        if isinstance(bathymetry, RegularizedBathymetry2D):
            self.btilde = bathymetry
        else:
            self.btilde = regularize_bathymetry(bathymetry, grid)
        self._precompute()

    def _sample(self, which, I, J, sx, sy, qx, qy):
        """B~ samples at local offsets ``(sx, sy)`` of cells of ``which``.

        ``qx``/``qy`` give the side (+1/-1) of the other-grid piece, used to
        pick the primal cell that holds the points of a dual cell.
        """
        hx, hy = 0.5 * self.grid.dx, 0.5 * self.grid.dy
        if which == "primal":
            return self.btilde.sample(I, J, sx, sy)
        ci = I + (1 if qx > 0 else 0)
        cj = J + (1 if qy > 0 else 0)
        return self.btilde.sample(ci, cj, sx - qx * hx, sy - qy * hy)

    def _precompute(self):
        grid = self.grid
        hx, hy = 0.5 * grid.dx, 0.5 * grid.dy
        nx, ny = grid.shape
        I = np.arange(nx)[:, None, None]
        J = np.arange(ny)[None, :, None]
        n3, w3 = gauss_legendre(3)
        n2, w2 = gauss_legendre(2)
        self._w2 = w2
        self._moments = {}
        for which in ("primal", "dual"):
            for q, (qx, qy) in _QUADS.items():
                sx = (qx * hx * n3)[:, None] * np.ones(3)[None, :]
                sy = np.ones(3)[:, None] * (qy * hy * n3)[None, :]
                ww = (w3[:, None] * w3[None, :]).ravel()
                sx, sy = sx.ravel(), sy.ravel()
                _, bx, by = self._sample(which, I, J, sx, sy, qx, qy)
                mono = np.stack([np.ones_like(sx), sx, sy, sx * sx, sx * sy, sy * sy], axis=-1)
                self._moments[which, q] = (np.einsum("ijk,k,km->ijm", bx, ww, mono),
                                           np.einsum("ijk,k,km->ijm", by, ww, mono))
        self._edge = {}
        for e, (ex, ey) in _HALVES.items():
            if ex == 0:
                sx, sy = np.zeros(2), ey * hy * n2
            else:
                sx, sy = ex * hx * n2, np.zeros(2)
            self._edge["primal", e] = (sx, sy, self.btilde.sample(I, J, sx, sy)[0])
            # dual half edges lie on primal edge lines; pick the primal cell below/left
            if ex == 0:
                B = self.btilde.sample(I, J + (1 if ey > 0 else 0), sx + hx, sy - ey * hy)[0]
            else:
                B = self.btilde.sample(I + (1 if ex > 0 else 0), J, sx - ex * hx, sy + hy)[0]
            self._edge["dual", e] = (sx, sy, B)
        eye = np.eye(6)
        self._quad_basis = np.stack(
            [average_rect_2d(eye, (0.0, hx) if qx > 0 else (-hx, 0.0), (0.0, hy) if qy > 0 else (-hy, 0.0))
             for qx, qy in _QUADS.values()], axis=-1)
        self._edge_basis = np.stack([evaluate_2d(eye, sx, sy) for e in _HALVES
                                     for sx, sy in zip(*self._edge["primal", e][:2])], axis=-1)
        self.b_center = {"primal": self.btilde.primal_center_values,
                         "dual": self.btilde.dual_center_values}
        self._boundary_masks()

    def _boundary_masks(self):
        """Pieces lying on the primal/dual interior boundaries, for the mass budget."""
        grid = self.grid
        self._mass_masks = None
        if any(self.periodic):
            return
        hx, hy = 0.5 * grid.dx, 0.5 * grid.dy
        a, b, c, d = grid.x_min, grid.x_max, grid.y_min, grid.y_max
        tx, ty = 0.25 * grid.dx, 0.25 * grid.dy
        centres = {"primal": grid.primal_centers(), "dual": grid.dual_centers()}
        region_lines = {"dual": (a, b, c, d), "primal": (a + hx, b - hx, c + hy, d - hy)}
        masks = {}
        for which, (X, Y) in centres.items():
            lo_x, hi_x, lo_y, hi_y = region_lines[which]
            for e, (ex, ey) in _HALVES.items():
                if ex == 0:
                    my = Y + 0.5 * ey * hy
                    inside = (my > lo_y) & (my < hi_y)
                    sign = np.where(np.abs(X - hi_x) < tx, 1.0, 0.0) - np.where(np.abs(X - lo_x) < tx, 1.0, 0.0)
                else:
                    mx = X + 0.5 * ex * hx
                    inside = (mx > lo_x) & (mx < hi_x)
                    sign = np.where(np.abs(Y - hi_y) < ty, 1.0, 0.0) - np.where(np.abs(Y - lo_y) < ty, 1.0, 0.0)
                masks["edge", which, e] = sign * inside
            for q, (qx, qy) in _QUADS.items():
                mx = X + 0.5 * qx * hx
                my = Y + 0.5 * qy * hy
                in_omega = (mx > a) & (mx < b) & (my > c) & (my < d)
                in_inner = (mx > a + hx) & (mx < b - hx) & (my > c + hy) & (my < d - hy)
                masks["quad", which, q] = (in_omega & ~in_inner).astype(float)
        self._mass_masks = masks

    def _pieces(self, coeffs, which, wbar):
        hx, hy = 0.5 * self.grid.dx, 0.5 * self.grid.dy
        g = self.params.g
        area = hx * hy
        # monomial weights are laid out as columns, so one matmul covers every piece
        qa = coeffs @ self._quad_basis
        pv = coeffs @ self._edge_basis
        wc = coeffs[..., 0, :]
        quad_avg = {}
        quad_src = {}
        for n, q in enumerate(_QUADS):
            quad_avg[q] = qa[..., n]
            kx, ky = self._moments[which, q]
            quad_src[q] = (g * area * (wbar * kx[..., 0] - np.einsum("ijm,ijm->ij", wc, kx)),
                           g * area * (wbar * ky[..., 0] - np.einsum("ijm,ijm->ij", wc, ky)))
        edge = {}
        for n, (e, (ex, ey)) in enumerate(_HALVES.items()):
            B = self._edge[which, e][2]
            direction = "x" if ex == 0 else "y"
            acc = 0.0
            for k in range(2):
                vals = pv[..., 2 * n + k]
                f = flux_wb_2d(vals[..., 0], vals[..., 1], vals[..., 2], B[..., k], wbar,
                               self.params, direction)
                acc = acc + self._w2[k] * f
            edge[e] = (hy if ex == 0 else hx) * acc
        return quad_avg, quad_src, edge

    def limited_reconstruction(self, field):
        return self._reconstruct(field.primal, field.dual)

    def _assemble(self, pieces):
        """Relaxation, flux and source terms for target cells covered by four other cells."""
        quad_avg, quad_src, edge = pieces
        dxdy = self.grid.dx * self.grid.dy
        SW = (slice(None, -1), slice(None, -1))
        SE = (slice(1, None), slice(None, -1))
        NW = (slice(None, -1), slice(1, None))
        NE = (slice(1, None), slice(1, None))
        relax = 0.25 * (quad_avg["NE"][SW] + quad_avg["NW"][SE] + quad_avg["SE"][NW] + quad_avg["SW"][NE])
        right = edge["N"][SE] + edge["S"][NE]
        left = edge["N"][SW] + edge["S"][NW]
        top = edge["W"][NE] + edge["E"][NW]
        bottom = edge["E"][SW] + edge["W"][SE]
        flux = (right - left + top - bottom) / dxdy
        src = np.zeros_like(relax)
        for k in (0, 1):
            src[..., k + 1] = (quad_src["NE"][k][SW] + quad_src["NW"][k][SE]
                               + quad_src["SE"][k][NW] + quad_src["SW"][k][NE]) / dxdy
        return relax, flux, src

    def rhs(self, field, t, dtau, wbar):
        field = self.fill(field, t)
        U, V = field.primal, field.dual
        cP, cQ = self._reconstruct(U, V)
        pp = self._pieces(cP, "primal", wbar)
        pq = self._pieces(cQ, "dual", wbar)
        rate_U = np.zeros_like(U)
        rate_V = np.zeros_like(V)
        relax, flux, src = self._assemble(pp)
        rate_V[:-1, :-1] = (relax - V[:-1, :-1]) / dtau - flux + src
        relax, flux, src = self._assemble(pq)
        rate_U[1:, 1:] = (relax - U[1:, 1:]) / dtau - flux + src

        bmr = 0.0
        if self._mass_masks is not None:
            m = self._mass_masks
            hx, hy = 0.5 * self.grid.dx, 0.5 * self.grid.dy
            outflow = 0.0
            strip = 0.0
            for which, pieces, sign in (("dual", pq, 1.0), ("primal", pp, -1.0)):
                quad_avg, _, edge = pieces
                for e in _HALVES:
                    outflow += float(np.sum(m["edge", which, e] * edge[e][..., 0]))
                for q in _QUADS:
                    strip += sign * float(np.sum(m["quad", which, q] * quad_avg[q][..., 0]))
            bmr = 0.5 * (-outflow + hx * hy * strip / dtau)
        return self._finish(rate_U, rate_V, bmr)

    def interior_arrays(self, field):
        return ((field.primal[self.primal_interior], self.b_center["primal"][self.primal_interior]),
                (field.dual[self.dual_interior], self.b_center["dual"][self.dual_interior]))

    def wave_speed(self, field):
        ax = ay = 0.0
        for avg, B in self.interior_arrays(field):
            sx, sy = max_wave_speed(avg[..., 0], avg[..., 1], B, self.params, hv=avg[..., 2])
            ax, ay = max(ax, sx), max(ay, sy)
        return ax, ay


def make_solver(grid, bathymetry, boundary, params=None, scheme=None):
    cls = CSOC1D if grid.dim == 1 else CSOC2D
    return cls(grid, bathymetry, boundary, params, scheme)


def compute_rhs(field, grid, bathymetry, params, controls, boundary, t=0.0, scheme=None, wbar=None):
    """One-shot semi-discrete rate; ``wbar`` defaults to the current global mean."""
    solver = make_solver(grid, bathymetry, boundary, params, scheme)
    if wbar is None:
        wbar = solver.global_mean_w(solver.fill(field, t))
    return solver.rhs(field, t, controls.dtau, wbar)


def advance_to(solver, field, t_final, t0=0.0, cfl=0.4, snapshot_times=(), observer=None):
    """March from ``t0`` to ``t_final`` with SSP-RK3, landing exactly on snapshot times.

    ``wbar`` and ``dt``/``dtau`` are fixed at the start of each step. The
    returned ``net_boundary_inflow`` integrates the boundary mass rate with
    the Runge-Kutta weights, so ``total_mass(t) - total_mass(t0)`` equals it
    to round-off.
    """
    t = float(t0)
    f = solver.fill(field, t)
    targets = sorted({float(s) for s in snapshot_times if t0 <= s <= t_final} | {float(t_final)})
    snapshots = {}
    if targets and targets[0] == t:
        snapshots[t] = f
        targets = targets[1:]
    log = []
    inflow = 0.0
    step = 0
    spacing = solver.grid.spacing
    for target in targets:
        while t < target:
            wbar = solver.global_mean_w(f)
            a = solver.wave_speed(f)
            if not np.all(np.isfinite(a)):
                raise SolverError(f"non-finite wave speed before step {step + 1} (t={t:.6g})")
            ctrl = choose_step(a, spacing, TimeControls(cfl=cfl, t_final=target, t=t))
            rates = []

            def L(u, ts):
                r = solver.rhs(u, ts, ctrl.dtau, wbar)
                rates.append(r.boundary_mass_rate)
                return r

            new = ssp_rk3_step(f, L, ctrl.dt, t)
            inflow += ctrl.dt * sum(wk * rk for wk, rk in zip(_RK3_WEIGHTS, rates))
            t = target if ctrl.dt >= target - t else t + ctrl.dt
            step += 1
            if not new.is_finite():
                raise SolverError(f"non-finite state after step {step} (t={t:.6g})")
            f = solver.fill(new, t)
            interior = f.primal[solver.primal_interior]
            log.append(StepRecord(step, t, ctrl.dt, float(np.max(a)), solver.total_mass(f),
                                  float(np.max(np.abs(interior[..., 1:])))))
            if observer is not None:
                observer(step, t, f)
        snapshots[target] = f
    return AdvanceResult(f, t, log, inflow, snapshots)


def fully_discrete_update(solver, field, dt, dtau, wbar, t=0.0):
    """Reference forward-Euler update written cell by cell (1-D, well-balanced).

    Uses the single-cell polynomial API instead of the vectorized assembly;
    kept as a test oracle for the semi-discrete operator.
    """
    from .reconstruction import cell_average_of_poly, eval_poly, poly_at
    from .swe_model import source_wb_1d

    if solver.dim != 1 or not solver.scheme.well_balanced:
        raise ConfigurationError("reference update covers the 1-D well-balanced scheme only")
    grid = solver.grid
    f = solver.fill(field, t)
    cP, cQ = solver.limited_reconstruction(f)
    xp, xq = solver.x["primal"], solver.x["dual"]
    bt = solver.btilde
    dx, theta, ratio = grid.dx, dt / dtau, dt / grid.dx
    params = solver.params
    newP = f.primal.copy()
    newQ = f.dual.copy()

    def b_at(x):
        return float(bt(x))

    def update(target_x, old, left, right, b_left, b_right, slopes):
        a, b = target_x - 0.5 * dx, target_x + 0.5 * dx
        avg = 0.5 * cell_average_of_poly(left, (a, target_x)) + 0.5 * cell_average_of_poly(right, (target_x, b))
        fl = flux_wb_1d(*eval_poly(left, left.center), b_left, wbar, params)
        fr = flux_wb_1d(*eval_poly(right, right.center), b_right, wbar, params)
        src = source_wb_1d([(left, a, target_x, slopes[0], b_at), (right, target_x, b, slopes[1], b_at)],
                           wbar, params, dx)
        return theta * avg + (1 - theta) * old - ratio * (fr - fl) + dt * src

    nodes = bt.nodes
    slope_p = (nodes[1:] - nodes[:-1]) / dx
    for q in np.arange(grid.n_total)[solver.dual_interior]:
        left, right = poly_at(cP, xp, q), poly_at(cP, xp, q + 1)
        newQ[q] = update(xq[q], f.dual[q], left, right, bt.primal_center_values[q],
                         bt.primal_center_values[q + 1], (slope_p[q], slope_p[q + 1]))
    for p in np.arange(grid.n_total)[solver.primal_interior]:
        left, right = poly_at(cQ, xq, p - 1), poly_at(cQ, xq, p)
        newP[p] = update(xp[p], f.primal[p], left, right, bt.dual_center_values[p - 1],
                         bt.dual_center_values[p], (slope_p[p], slope_p[p]))
    return OverlappingField(newP, newQ)
