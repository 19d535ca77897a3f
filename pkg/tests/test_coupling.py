import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cglbranch.coupling import (check_hypothesis_H4, closed_form_moment, nonlinear_moment, quartic_1d,
                                quartic_product, quartic_product_quadrature, quartic_table, quartic_tensor)
from cglbranch.errors import QuadratureGuardError
from cglbranch.quadrature import QuadratureGrid, default_nodes, gauss_legendre, power_derivatives
from cglbranch.spectral import BoxDomain, group_with_rational, nth_group

PERMUTED = [(1, 2, 3, 4), (2, 3, 4, 1), (3, 4, 1, 2), (4, 1, 2, 3)]


def test_quartic_1d_closed_values():
    L = 2.7
    for k in range(1, 6):
        assert quartic_1d(k, k, k, k, L) == pytest.approx(3 * L / 8)
        for j in range(1, 6):
            if j != k:
                assert quartic_1d(k, k, j, j, L) == pytest.approx(L / 4)
    assert quartic_1d(1, 2, 3, 4, math.pi) == pytest.approx(math.pi / 8)


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[st.integers(1, 9)] * 4))
def test_quartic_1d_matches_quadrature(ks):
    x, w = gauss_legendre(64, 1.3)
    f = np.prod([np.sin(k * np.pi * x / 1.3) for k in ks], axis=0)
    assert quartic_1d(*ks, 1.3) == pytest.approx(float(f @ w), abs=1e-13)


def test_quartic_product_values(interval, square):
    assert quartic_product([(1,)] * 4, interval) == pytest.approx(3 / (2 * math.pi))
    val = quartic_product([(1, 2), (2, 1), (1, 2), (2, 1)], square, normalized=False)
    assert val == pytest.approx((math.pi / 4) ** 2)


def test_permuted_four_cube_modes():
    box = BoxDomain.cube(4)
    exact = quartic_product(PERMUTED, box, normalized=False)
    assert exact == pytest.approx((math.pi / 8) ** 4, rel=1e-15)
    quad = quartic_product_quadrature(PERMUTED, box, normalized=False)
    assert abs(quad - exact) < 1e-10


def test_h4_checker():
    g = group_with_rational(BoxDomain.cube(4), 30)
    rep = check_hypothesis_H4(g)
    assert not rep.holds
    tuples = {frozenset(v[:4]) for v in rep.violations}
    assert frozenset(PERMUTED) in tuples
    assert check_hypothesis_H4(nth_group(BoxDomain.cube(3), 2)).holds
    assert check_hypothesis_H4(nth_group(BoxDomain.cube(2), 2)).holds


def test_quartic_table(square_group, cube_group):
    t = quartic_table(square_group)
    assert t.A == pytest.approx(9 / (4 * math.pi**2))
    assert t.B == pytest.approx(1 / math.pi**2)
    assert t.A > t.B > 0 and t.cross_ok
    assert quartic_table(cube_group).cross_ok
    assert not quartic_table(group_with_rational(BoxDomain.cube(4), 30)).cross_ok


def test_quadrature_weights_sum(square):
    grid = QuadratureGrid(BoxDomain.cube(3), 12)
    assert grid.weights.sum() == pytest.approx(math.pi**3, rel=1e-12)
    for ax in grid.axes:
        assert ax.min() > 0 and ax.max() < math.pi


def test_swap_symmetric_moment_vanishes(square_group):
    assert abs(nonlinear_moment([1, 1], [1, -1], 2, square_group)) < 1e-13


def test_single_mode_moment(square_group):
    A = 9 * math.pi**2 / 64 * (2 / math.pi) ** 4
    assert nonlinear_moment([1, 0], [1, 0], 2, square_group).real == pytest.approx(A, rel=1e-12)


def test_closed_form_matches_quadrature_random(square_group, cube_group, rng):
    for group in (square_group, cube_group):
        for _ in range(25):
            c = rng.normal(size=group.p) + 1j * rng.normal(size=group.p)
            t = rng.normal(size=group.p) + 1j * rng.normal(size=group.p)
            exact = closed_form_moment(c, t, group)
            quad = nonlinear_moment(c, t, 2, group)
            assert abs(exact - quad) <= 1e-9 * abs(exact)


@pytest.mark.parametrize("sigma", [1, 2, 3, 4, 2.5])
def test_grid_convergence(square_group, sigma, rng):
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    t = rng.normal(size=2) + 1j * rng.normal(size=2)
    # passes the internal two-level guard (1e-9 relative)
    nonlinear_moment(c, t, sigma, square_group)


@pytest.mark.parametrize("sigma", [1, 2, 3])
def test_homogeneity(square_group, sigma, rng):
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    t = np.array([0.3, -1.1 + 0.2j])
    s = 1.7
    lhs = nonlinear_moment(s * c, t, sigma, square_group)
    rhs = s ** (sigma + 1) * nonlinear_moment(c, t, sigma, square_group)
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_guard_trips_on_coarse_grid(square):
    g = nth_group(square, 30)
    grid = QuadratureGrid(square, 4)
    with pytest.raises(QuadratureGuardError):
        nonlinear_moment(np.ones(g.p), np.ones(g.p), 2, g, grid=grid)


def test_default_node_rule_is_exact_for_trig_degree():
    for D in (4, 16, 48, 64):
        n = default_nodes(1, 2, D // 4)
        x, w = gauss_legendre(n, 1.0)
        for d in range(1, D + 1):
            assert abs(np.cos(d * np.pi * x) @ w - math.sin(d * math.pi) / (d * math.pi)) < 1e-13


def test_default_nodes_grow_with_frequency():
    assert default_nodes(2, 2, 1) == 64
    assert default_nodes(4, 2, 1) == 16
    assert default_nodes(2, 2, 100) >= 4 * 100 + 12
    assert default_nodes(2, 1, 1) == 4 * default_nodes(2, 2, 1)


def test_quartic_tensor_symmetry(cube_group):
    Q = quartic_tensor(cube_group)
    for perm in itertools.permutations(range(4)):
        assert np.array_equal(Q, Q.transpose(perm))


def test_power_derivatives_by_differences(rng):
    z = rng.normal(size=20) + 1j * rng.normal(size=20)
    for sigma in (1.0, 2.0, 3.0):
        dz, dzbar = power_derivatives(z, sigma)
        f = lambda w: np.abs(w) ** sigma * w
        h = 1e-6
        fx = (f(z + h) - f(z - h)) / (2 * h)
        fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
        assert np.allclose(dz, 0.5 * (fx - 1j * fy), atol=1e-7)
        assert np.allclose(dzbar, 0.5 * (fx + 1j * fy), atol=1e-7)
