import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wbcsoc.grids import build_grids, cell_averages
from wbcsoc.reconstruction import (MONOMIALS_2D, TaylorPoly, average_1d, average_rect_2d, cell_average_of_poly,
                                   central_reconstruct, eval_poly, evaluate_2d, poly_at)

coef = st.floats(-5.0, 5.0, allow_nan=False)


def _averages_1d(grid, a0, a1, a2):
    # exact averages of a0 + a1 x + a2 x^2
    x, dx = grid.primal_centers(), grid.dx
    return a0 + a1 * x + a2 * (x * x + dx * dx / 12.0)


def test_constant_reproduced():
    c = central_reconstruct(np.full((12, 2), 3.0), 0.1)
    assert np.all(c[..., 0] == 3.0)
    assert np.all(c[..., 1:] == 0.0)


def test_x_squared_on_tenth_grid():
    grid = build_grids((0.0, 1.0), 10)
    avg = _averages_1d(grid, 0.0, 0.0, 1.0)[:, None]
    c = central_reconstruct(avg, grid.dx)[1:-1, 0]
    x = grid.primal_centers()[1:-1]
    np.testing.assert_allclose(2 * c[:, 2], 2.0, atol=1e-10)
    np.testing.assert_allclose(c[:, 1], 2 * x, atol=1e-12)
    np.testing.assert_allclose(c[:, 0], x * x, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(coef, coef, coef, st.integers(5, 40))
def test_exact_on_quadratics_1d(a0, a1, a2, n):
    grid = build_grids((-1.0, 2.0), n)
    avg = _averages_1d(grid, a0, a1, a2)[:, None]
    c = central_reconstruct(avg, grid.dx)[1:-1, 0]
    x = grid.primal_centers()[1:-1]
    scale = 1.0 + abs(a0) + abs(a1) + abs(a2)
    np.testing.assert_allclose(c[:, 0], a0 + a1 * x + a2 * x * x, atol=1e-12 * scale)
    np.testing.assert_allclose(c[:, 1], a1 + 2 * a2 * x, atol=1e-10 * scale / grid.dx)
    np.testing.assert_allclose(c[:, 2], a2, atol=1e-9 * scale / grid.dx ** 2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=5, max_size=40), st.floats(1e-3, 10.0))
def test_home_cell_conservation_1d(values, dx):
    avg = np.asarray(values)[:, None]
    c = central_reconstruct(avg, dx)
    back = average_1d(c, -0.5 * dx, 0.5 * dx)
    # rounding comes from c0 = avg - c2 dx^2/12 and back again
    scale = np.abs(avg) + np.abs(c[..., 2]) * dx * dx / 12.0
    assert np.all(np.abs(back - avg) <= 10 * np.spacing(np.maximum(scale, 1e-300)))


@settings(max_examples=30, deadline=None)
@given(st.lists(coef, min_size=6, max_size=6), st.integers(4, 9), st.integers(4, 9))
def test_exact_on_quadratics_2d(cs, nx, ny):
    grid = build_grids(((0.0, 1.0), (-1.0, 1.0)), (nx, ny))
    X, Y = grid.primal_centers()
    dx, dy = grid.spacing
    a = np.asarray(cs)
    avg = (a[0] + a[1] * X + a[2] * Y + a[3] * (X * X + dx * dx / 12) + a[4] * X * Y
           + a[5] * (Y * Y + dy * dy / 12))
    c = central_reconstruct(avg[..., None], grid.spacing)[1:-1, 1:-1, 0]
    Xi, Yi = X[1:-1, 1:-1], Y[1:-1, 1:-1]
    expect = [a[0] + a[1] * Xi + a[2] * Yi + a[3] * Xi ** 2 + a[4] * Xi * Yi + a[5] * Yi ** 2,
              a[1] + 2 * a[3] * Xi + a[4] * Yi, a[2] + a[4] * Xi + 2 * a[5] * Yi,
              a[3] + 0 * Xi, a[4] + 0 * Xi, a[5] + 0 * Xi]
    scale = 1.0 + np.abs(a).sum()
    for k, e in enumerate(expect):
        tol = 1e-11 * scale / (min(dx, dy) ** sum(MONOMIALS_2D[k]))
        np.testing.assert_allclose(c[..., k], e, atol=tol)


def test_home_cell_conservation_2d():
    rng = np.random.default_rng(5)
    avg = rng.normal(size=(9, 8, 3)) * 100
    c = central_reconstruct(avg, (0.1, 0.3))
    back = average_rect_2d(c, (-0.05, 0.05), (-0.15, 0.15))
    np.testing.assert_allclose(back, avg, rtol=0, atol=1e-12)


def test_third_order_pointwise_convergence():
    errs = []
    for n in (40, 80, 160, 320):
        grid = build_grids((0.0, 1.0), n)
        f = cell_averages(lambda x: (np.sin(2 * np.pi * x), 0 * x), grid)
        c = central_reconstruct(f.primal[:, :1], grid.dx)[1:-1, 0]
        x = grid.primal_centers()[1:-1]
        s = 0.3 * grid.dx
        errs.append(np.max(np.abs(c[:, 0] + s * c[:, 1] + s * s * c[:, 2] - np.sin(2 * np.pi * (x + s)))))
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(slopes >= 2.7)


def test_eval_poly_examples():
    p = TaylorPoly(2.0, np.array([[1.0, 2.0, 0.0]]))
    assert eval_poly(p, 2.0)[0] == 1.0
    assert eval_poly(p, 2.5)[0] == 2.0
    q = TaylorPoly((0.0, 0.0), np.array([[0.0, 0.0, 0.0, 0.0, 3.0, 0.0]]))
    assert q((1.0, 1.0))[0] == 3.0
    assert evaluate_2d(q.coeffs, 1.0, 1.0)[0] == 3.0


def test_cell_average_of_poly_examples():
    h = 0.3
    const = TaylorPoly(1.0, np.array([[4.0, 0.0, 0.0]]))
    assert cell_average_of_poly(const, (-7.0, 3.0))[0] == 4.0
    sq = TaylorPoly(1.0, np.array([[0.0, 0.0, 1.0]]))
    assert cell_average_of_poly(sq, (1.0, 1.0 + h))[0] == pytest.approx(h * h / 3)
    rect = TaylorPoly((0.0, 0.0), np.array([[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]]))
    assert cell_average_of_poly(rect, ((0.0, 1.0), (0.0, 2.0)))[0] == pytest.approx(0.5)


def test_dual_average_from_two_halves():
    grid = build_grids((0.0, 1.0), 10)
    avg = _averages_1d(grid, 1.0, -2.0, 3.0)[:, None]
    c = central_reconstruct(avg, grid.dx)
    xp, xq = grid.primal_centers(), grid.dual_centers()
    q = 5
    left, right = poly_at(c, xp, q), poly_at(c, xp, q + 1)
    val = 0.5 * cell_average_of_poly(left, (xq[q] - grid.dx / 2, xq[q])) \
        + 0.5 * cell_average_of_poly(right, (xq[q], xq[q] + grid.dx / 2))
    x, dx = xq[q], grid.dx
    assert val[0] == pytest.approx(1.0 - 2.0 * x + 3.0 * (x * x + dx * dx / 12), abs=1e-13)
