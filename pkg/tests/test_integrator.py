import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wbcsoc.bench.scenarios import gaussian_2d, gaussian_bump, step_bottom
from wbcsoc.grids import BoundarySpec, ConfigurationError, OverlappingField, build_grids, cell_averages
from wbcsoc.integrator import (CSOC1D, CSOC2D, SchemeConfig, SolverError, TimeControls, advance_to, choose_step,
                               compute_rhs, fully_discrete_update, make_solver, ssp_rk3_step)
from wbcsoc.quadrature import interval_nodes
from wbcsoc.swe_model import Bathymetry, ModelParams, regularize_bathymetry

G = 9.812


# ---------------------------------------------------------------- step size

def test_choose_step_example():
    c = choose_step(1.0, 0.1, TimeControls(cfl=0.4, t_final=1.0))
    assert c.dtau == pytest.approx(0.05) and c.dt == pytest.approx(0.04) and c.theta == pytest.approx(0.8)


def test_choose_step_half_cfl_is_full_staggered_step():
    c = choose_step(2.0, 0.1, TimeControls(cfl=0.5, t_final=1.0))
    assert c.theta == pytest.approx(1.0)


def test_choose_step_clips_to_final_time():
    c = choose_step(1.0, 0.1, TimeControls(cfl=0.4, t_final=1.0, t=0.98))
    assert c.dt == pytest.approx(0.02) and c.theta == pytest.approx(0.4)


def test_choose_step_static_flow():
    c = choose_step(0.0, 0.1, TimeControls(t_final=5.0))
    assert c.dt == c.dtau == 0.1


def test_choose_step_rejects_theta_above_one():
    with pytest.raises(ConfigurationError):
        choose_step(1.0, 0.1, TimeControls(cfl=0.6, t_final=1.0))


@settings(max_examples=50)
@given(st.floats(0.01, 20), st.floats(0.0, 20), st.floats(1e-3, 1), st.floats(1e-3, 1), st.floats(0.05, 0.5))
def test_choose_step_2d_contract(ax, ay, dx, dy, cfl):
    c = choose_step((ax, ay), (dx, dy), TimeControls(cfl=cfl, t_final=1e9))
    assert c.dtau * (ax / dx + ay / dy) == pytest.approx(0.5)
    assert 0 < c.theta <= 1.0 + 1e-12


@settings(max_examples=50)
@given(st.floats(0.01, 50), st.floats(1e-4, 1), st.floats(0.05, 0.5))
def test_choose_step_1d_contract(a, dx, cfl):
    c = choose_step(a, dx, TimeControls(cfl=cfl, t_final=1e9))
    assert a * c.dtau / dx <= 0.5 + 1e-15
    assert 0 < c.theta <= 1.0 + 1e-12


# ---------------------------------------------------------------- SSP-RK3

def test_rk3_zero_rate_is_identity():
    u = np.array([1.0, -2.0])
    np.testing.assert_array_equal(ssp_rk3_step(u, lambda v, t: 0.0 * v, 0.3), u)


def test_rk3_constant_rate():
    u = np.array([1.0, -2.0])
    np.testing.assert_allclose(ssp_rk3_step(u, lambda v, t: np.array([3.0, 1.0]), 0.5), u + 0.5 * np.array([3, 1]),
                               rtol=1e-15)


@settings(max_examples=100)
@given(st.floats(-5, 5), st.floats(1e-3, 1.0), st.floats(-10, 10))
def test_rk3_linear_ode_cubic_taylor(lam, dt, u0):
    z = lam * dt
    got = ssp_rk3_step(np.array([u0]), lambda u, t: lam * u, dt)[0]
    assert got == pytest.approx(u0 * (1 + z + z * z / 2 + z ** 3 / 6), rel=1e-13, abs=1e-13)


def test_rk3_stage_times():
    times = []
    ssp_rk3_step(np.zeros(1), lambda u, t: times.append(t) or 0.0 * u, 0.2, t=1.0)
    assert times == pytest.approx([1.0, 1.2, 1.1])


# ---------------------------------------------------------------- semi-discrete operator

def _lake(level, grid):
    if grid.dim == 1:
        return cell_averages(lambda x: (np.full_like(x, level), 0 * x), grid)
    return cell_averages(lambda x, y: (np.full_like(x, level), 0 * x, 0 * x), grid)


@pytest.mark.parametrize("bottom", [gaussian_bump(), step_bottom()], ids=["bump", "step"])
@pytest.mark.parametrize("scheme", [SchemeConfig(), SchemeConfig(detector_threshold=None), SchemeConfig(limiter="none"),
                                    SchemeConfig(remainder_correction=False, detector_threshold=None)])
@pytest.mark.parametrize("manning", [0.0, 0.1])
def test_lake_at_rest_rhs_vanishes_1d(bottom, scheme, manning):
    grid = build_grids((0.0, 10.0), 50)
    f = _lake(10.0, grid)
    r = compute_rhs(f, grid, bottom, ModelParams(manning=manning), TimeControls(dtau=0.01), BoundarySpec.absorbing(),
                    scheme=scheme)
    assert np.max(np.abs(r.primal)) <= 1e-12
    assert np.max(np.abs(r.dual)) <= 1e-12


def test_lake_at_rest_rhs_vanishes_2d():
    grid = build_grids(((0.0, 1.0), (0.0, 1.0)), (16, 12))
    f = _lake(1.0, grid)
    for scheme in (SchemeConfig(), SchemeConfig(detector_threshold=None)):
        r = compute_rhs(f, grid, gaussian_2d(), ModelParams(), TimeControls(dtau=0.01), BoundarySpec.absorbing(2),
                        scheme=scheme)
        assert np.max(np.abs(r.primal)) <= 1e-12
        assert np.max(np.abs(r.dual)) <= 1e-12


def test_constant_state_flat_bottom_rhs_vanishes():
    grid = build_grids((0.0, 1.0), 20)
    f = cell_averages(lambda x: (np.full_like(x, 2.0), np.full_like(x, 0.7)), grid)
    flat = Bathymetry(lambda x: 0 * x)
    for bc in (BoundarySpec.absorbing(), BoundarySpec.periodic()):
        r = compute_rhs(f, grid, flat, ModelParams(), TimeControls(dtau=0.01), bc)
        assert np.max(np.abs(r.primal)) <= 1e-12 and np.max(np.abs(r.dual)) <= 1e-12
    grid2 = build_grids(((0.0, 1.0), (0.0, 1.0)), (8, 8))
    f2 = cell_averages(lambda x, y: (np.full_like(x, 2.0), np.full_like(x, 0.7), np.full_like(x, -0.3)), grid2)
    r = compute_rhs(f2, grid2, Bathymetry(lambda x, y: 0 * x), ModelParams(), TimeControls(dtau=0.01),
                    BoundarySpec.periodic(2))
    assert np.max(np.abs(r.primal)) <= 1e-12 and np.max(np.abs(r.dual)) <= 1e-12


def test_non_well_balanced_baseline_moves_lake():
    grid = build_grids((0.0, 10.0), 50)
    r = compute_rhs(_lake(10.0, grid), grid, gaussian_bump(), ModelParams(), TimeControls(dtau=0.01),
                    BoundarySpec.absorbing(), scheme=SchemeConfig(well_balanced=False, limiter="none"))
    assert np.max(np.abs(r.primal[..., 1])) > 1e-6


def test_2d_rejects_unsupported_modes():
    grid = build_grids(((0.0, 1.0), (0.0, 1.0)), (8, 8))
    with pytest.raises(ConfigurationError):
        CSOC2D(grid, gaussian_2d(), BoundarySpec.absorbing(2), scheme=SchemeConfig(well_balanced=False))
    with pytest.raises(ConfigurationError):
        CSOC2D(grid, gaussian_2d(), BoundarySpec.absorbing(2), ModelParams(manning=0.1))
    with pytest.raises(ConfigurationError):
        CSOC1D(grid, gaussian_2d(), BoundarySpec.absorbing(2))


def _sine_state(x):
    return 3.0 + 0.5 * np.sin(2 * np.pi * x), 1.0 + 0.3 * np.cos(2 * np.pi * x)


def _exact_rate_1d(centres, dx, b, bx, split):
    """Cell-average rate of the original system for the smooth state ``_sine_state``.

    ``split`` integrates the source separately on the two cell halves, where
    ``bx`` may jump at the cell centre.
    """

    def flux(x):
        w, q = _sine_state(x)
        h = w - b(x)
        return np.stack([q, q * q / h + 0.5 * G * h * h], -1)

    xl, xr = centres - 0.5 * dx, centres + 0.5 * dx
    out = -(flux(xr) - flux(xl)) / dx
    pieces = ((xl, centres), (centres, xr)) if split else ((xl, xr),)
    for a, c in pieces:
        xs, ws = interval_nodes(a[:, None], c[:, None], 5)
        density = -G * (_sine_state(xs)[0] - b(xs)) * bx(xs)
        out[:, 1] += (density * ws).sum(1) / len(pieces)
    return out


def _rhs_error(n, bottom=None):
    grid = build_grids((0.0, 1.0), n)
    if bottom is None:
        btilde = regularize_bathymetry(Bathymetry(lambda x: 0 * x), grid)
    else:
        btilde = regularize_bathymetry(bottom, grid)
    cell = lambda x: np.clip(np.floor((x - btilde.x0) / btilde.dx).astype(int), 0, len(btilde.nodes) - 2)
    bx = lambda x: (btilde.nodes[cell(x) + 1] - btilde.nodes[cell(x)]) / btilde.dx
    solver = make_solver(grid, btilde, BoundarySpec.periodic(), scheme=SchemeConfig(limiter="none"))
    f = solver.fill(cell_averages(_sine_state, grid), 0.0)
    ctrl = choose_step(solver.wave_speed(f), grid.dx, TimeControls(t_final=1.0))
    r = solver.rhs(f, 0.0, ctrl.dtau, solver.global_mean_w(f))
    I, J = grid.primal_interior(), grid.dual_interior(True)
    # B~ has kinks at primal edges: split cells there (primal cells have none inside)
    ep = np.max(np.abs(r.primal[I] - _exact_rate_1d(grid.primal_centers()[I], grid.dx, btilde, bx, False)))
    eq = np.max(np.abs(r.dual[J] - _exact_rate_1d(grid.dual_centers()[J], grid.dx, btilde, bx, True)))
    return max(ep, eq)


@pytest.mark.parametrize("bottom", [None, Bathymetry(lambda x: np.sin(np.pi * x) ** 2)], ids=["flat", "sin2"])
def test_rhs_third_order_consistency(bottom):
    errs = np.array([_rhs_error(n, bottom) for n in (50, 100, 200)])
    orders = np.log2(errs[:-1] / errs[1:])
    assert np.all(orders >= 2.8), orders


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(-3.0, 3.0))
def test_wbar_shift_leaves_rhs_unchanged(seed, shift):
    rng = np.random.default_rng(seed)
    grid = build_grids((0.0, 1.0), 16)
    bath = Bathymetry(lambda x: 0.3 * np.sin(5 * x) + np.where(x > 0.5, 0.2, 0.0), jumps=(0.5,))
    solver = CSOC1D(grid, bath, BoundarySpec.absorbing(), scheme=SchemeConfig(detector_threshold=None))
    n = grid.n_total
    f = solver.fill(OverlappingField(np.stack([2 + 0.3 * rng.random(n), rng.standard_normal(n)], -1),
                                     np.stack([2 + 0.3 * rng.random(n), rng.standard_normal(n)], -1)), 0.0)
    wbar = solver.global_mean_w(f)
    a = solver.rhs(f, 0.0, 0.01, wbar)
    b = solver.rhs(f, 0.0, 0.01, wbar + shift)
    np.testing.assert_allclose(b.primal, a.primal, rtol=0, atol=1e-10)
    np.testing.assert_allclose(b.dual, a.dual, rtol=0, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([0.0, 0.05]), st.booleans())
def test_euler_theta_one_matches_fully_discrete(seed, manning, limit_all):
    rng = np.random.default_rng(seed)
    grid = build_grids((0.0, 1.0), 12)
    bath = Bathymetry(lambda x: 0.3 * np.sin(5 * x) + np.where(x > 0.5, 0.2, 0.0), jumps=(0.5,))
    scheme = SchemeConfig(detector_threshold=None if limit_all else 1.0)
    solver = CSOC1D(grid, bath, BoundarySpec.absorbing(), ModelParams(manning=manning), scheme)
    n = grid.n_total
    f = solver.fill(OverlappingField(np.stack([2 + 0.3 * rng.random(n), rng.standard_normal(n)], -1),
                                     np.stack([2 + 0.3 * rng.random(n), rng.standard_normal(n)], -1)), 0.0)
    wbar = solver.global_mean_w(f)
    step = 0.01
    euler = f + step * solver.rhs(f, 0.0, step, wbar)
    ref = fully_discrete_update(solver, f, step, step, wbar)
    np.testing.assert_allclose(euler.primal[solver.primal_interior], ref.primal[solver.primal_interior], atol=1e-12)
    np.testing.assert_allclose(euler.dual[solver.dual_interior], ref.dual[solver.dual_interior], atol=1e-12)


# ---------------------------------------------------------------- time loop

def test_advance_zero_time_is_identity():
    grid = build_grids((0.0, 1.0), 10)
    solver = make_solver(grid, Bathymetry(lambda x: 0 * x), BoundarySpec.periodic())
    f = solver.fill(cell_averages(_sine_state, grid), 0.0)
    res = advance_to(solver, f, 0.0)
    np.testing.assert_array_equal(res.field.primal, f.primal)
    assert res.log == [] and res.t == 0.0


def test_lake_at_rest_time_loop_stable():
    grid = build_grids((0.0, 10.0), 100)
    solver = make_solver(grid, step_bottom(), BoundarySpec.absorbing(), scheme=SchemeConfig(detector_threshold=None))
    f = solver.fill(_lake(10.0, grid), 0.0)
    wbars = []
    res = advance_to(solver, f, 0.1, observer=lambda k, t, u: wbars.append(solver.global_mean_w(u)))
    I = grid.primal_interior()
    assert np.max(np.abs(res.field.primal[I][:, 0] - 10.0)) <= 1e-12
    assert np.max(np.abs(res.field.primal[I][:, 1])) <= 1e-12
    assert max(wbars) - min(wbars) <= 1e-13


def test_snapshots_hit_requested_times():
    grid = build_grids((0.0, 1.0), 20)
    solver = make_solver(grid, Bathymetry(lambda x: 0 * x), BoundarySpec.periodic())
    f = solver.fill(cell_averages(_sine_state, grid), 0.0)
    res = advance_to(solver, f, 0.05, snapshot_times=(0.0, 0.013, 0.05, 0.2))
    assert sorted(res.snapshots) == [0.0, 0.013, 0.05]
    assert res.t == 0.05
    ts = [rec.t for rec in res.log]
    assert 0.013 in ts and ts[-1] == 0.05
    assert all(rec.dt > 0 and math.isfinite(rec.a) for rec in res.log)
    assert [rec.step for rec in res.log] == list(range(1, len(res.log) + 1))


def test_periodic_mass_conserved_each_grid():
    grid = build_grids((0.0, 1.0), 40)
    solver = make_solver(grid, Bathymetry(lambda x: 0.2 * np.sin(2 * np.pi * x) ** 2), BoundarySpec.periodic())
    f = solver.fill(cell_averages(_sine_state, grid), 0.0)
    res = advance_to(solver, f, 0.05)
    for m0, m1 in zip(solver.masses(f), solver.masses(res.field)):
        assert abs(m1 - m0) <= 1e-12 * abs(m0)


def test_periodic_mass_conserved_2d():
    grid = build_grids(((0.0, 1.0), (0.0, 1.0)), (12, 10))
    solver = make_solver(grid, gaussian_2d(), BoundarySpec.periodic(2))
    init = lambda x, y: (1.0 + 0.05 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y), 0.1 + 0 * x, -0.05 + 0 * x)
    f = solver.fill(cell_averages(init, grid), 0.0)
    res = advance_to(solver, f, 0.02, cfl=0.45)
    for m0, m1 in zip(solver.masses(f), solver.masses(res.field)):
        assert abs(m1 - m0) <= 1e-12 * abs(m0)


def test_open_boundary_mass_budget_1d():
    grid = build_grids((0.0, 2.0), 60)
    solver = make_solver(grid, Bathymetry(lambda x: 0.2 * np.exp(-10 * (x - 1) ** 2)), BoundarySpec.absorbing())
    f = solver.fill(cell_averages(lambda x: (1.0 + 0.1 * np.exp(-40 * (x - 1.5) ** 2), 0.3 + 0 * x), grid), 0.0)
    res = advance_to(solver, f, 0.3)
    drift = solver.total_mass(res.field) - solver.total_mass(f) - res.net_boundary_inflow
    assert abs(drift) <= 1e-12 * solver.total_mass(f)
    assert abs(res.net_boundary_inflow) > 1e-6


def test_open_boundary_mass_budget_2d():
    grid = build_grids(((0.0, 1.0), (0.0, 1.0)), (14, 12))
    solver = make_solver(grid, gaussian_2d(), BoundarySpec.absorbing(2))
    init = lambda x, y: (1.0 + 0.05 * np.exp(-30 * ((x - 0.3) ** 2 + (y - 0.6) ** 2)), 0.2 + 0 * x, 0.1 + 0 * x)
    f = solver.fill(cell_averages(init, grid), 0.0)
    res = advance_to(solver, f, 0.05, cfl=0.45)
    drift = solver.total_mass(res.field) - solver.total_mass(f) - res.net_boundary_inflow
    assert abs(drift) <= 1e-12 * solver.total_mass(f)


def test_non_finite_state_raises():
    grid = build_grids((0.0, 1.0), 10)
    solver = make_solver(grid, Bathymetry(lambda x: 0 * x), BoundarySpec.periodic())
    f = solver.fill(cell_averages(_sine_state, grid), 0.0)
    f.primal[4, 1] = np.inf
    with pytest.raises(SolverError):
        with np.errstate(all="ignore"):
            advance_to(solver, f, 0.01)


def test_dry_state_propagates():
    from wbcsoc.swe_model import DryStateError

    grid = build_grids((0.0, 1.0), 10)
    solver = make_solver(grid, Bathymetry(lambda x: 0 * x), BoundarySpec.periodic())
    f = solver.fill(cell_averages(lambda x: (np.where(x < 0.5, 1.0, -1.0), 0 * x), grid), 0.0)
    with pytest.raises(DryStateError):
        advance_to(solver, f, 0.01)
