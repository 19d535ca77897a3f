import math

import numpy as np
import pytest

from cglbranch.contour import cell_centered_axis, grid_csv, marching_squares, nodal_set, stitch, to_svg
from cglbranch.spectral import BoxDomain, eval_on_axes, group_for_modes


def test_cell_centered_axis_avoids_boundary():
    x = cell_centered_axis(math.pi, 10)
    assert x[0] > 0 and x[-1] < math.pi and np.allclose(np.diff(x), math.pi / 10)


def test_resolution_guard():
    with pytest.raises(ValueError):
        nodal_set(lambda X, Y: X - 1, (2.0, 2.0), 4)


def test_straight_line_exact():
    ns = nodal_set(lambda X, Y: X - Y, (1.0, 1.0), 20)
    assert ns.n_curves == 1
    pts = np.concatenate(ns.polylines)
    assert np.abs(pts[:, 0] - pts[:, 1]).max() < 1e-12


def test_circle_closed():
    ns = nodal_set(lambda X, Y: (X - 1) ** 2 + (Y - 1) ** 2 - 0.25, (2.0, 2.0), 80)
    assert ns.n_curves == 1
    line = ns.polylines[0]
    assert np.allclose(line[0], line[-1])
    r = np.hypot(line[:, 0] - 1, line[:, 1] - 1)
    assert np.abs(r - 0.5).max() < 2e-3


def test_square_antisymmetric_mode_is_diagonal():
    box = BoxDomain((1, 1), pi_units=True)
    g = group_for_modes([(1, 2), (2, 1)], box)

    def f(X, Y):
        axes = (X[:, 0], Y[0])
        return eval_on_axes((1, 2), box, axes) - eval_on_axes((2, 1), box, axes)

    ns = nodal_set(f, (math.pi, math.pi), 60)
    pts = np.concatenate(ns.polylines)
    assert np.abs(pts[:, 0] - pts[:, 1]).max() < 1e-9
    assert g.p == 2


def test_saddle_resolved_by_centre():
    f = np.array([[1.0, -1.0], [-1.0, 1.0]])
    segs = marching_squares(np.array([0.0, 1.0]), np.array([0.0, 1.0]), f)
    assert len(segs) == 2


def test_stitch_joins_segments():
    segs = [(np.array([0.0, 0.0]), np.array([1.0, 0.0])), (np.array([2.0, 0.0]), np.array([1.0, 0.0]))]
    lines = stitch(segs)
    assert len(lines) == 1 and len(lines[0]) == 3


def test_zero_field_gives_empty_svg():
    ns = nodal_set(lambda X, Y: 0 * X, (1.0, 1.0), 10)
    assert ns.n_curves == 0
    svg = to_svg(ns, (1.0, 1.0))
    assert "<polyline" not in svg and svg.startswith("<svg")


def test_outputs_deterministic():
    ns = nodal_set(lambda X, Y: np.sin(3 * X) * np.sin(2 * Y) + 0.1, (math.pi, math.pi), 24)
    assert to_svg(ns, (math.pi, math.pi)) == to_svg(ns, (math.pi, math.pi))
    csv = grid_csv(ns)
    assert csv.splitlines()[0] == "x,y,value" and len(csv.splitlines()) == 24 * 24 + 1


def test_square_symmetric_sum_is_antidiagonal():
    box = BoxDomain((1, 1), pi_units=True)

    def f(X, Y):
        axes = (X[:, 0], Y[0])
        return eval_on_axes((1, 2), box, axes) + eval_on_axes((2, 1), box, axes)

    ns = nodal_set(f, (math.pi, math.pi), 60)
    assert ns.n_curves == 1
    pts = ns.polylines[0]
    assert np.abs(pts[:, 0] + pts[:, 1] - math.pi).max() < 1e-9


def test_unit_square_third_eigenvalue_curve():
    """u_1 + u_2 for modes (1,3), (3,1) vanishes on sin^2(pi x) + sin^2(pi y) = 3/2."""
    box = BoxDomain((1, 1))

    def f(X, Y):
        axes = (X[:, 0], Y[0])
        return eval_on_axes((1, 3), box, axes) + eval_on_axes((3, 1), box, axes)

    ns = nodal_set(f, (1.0, 1.0), 100)
    assert ns.n_curves == 1
    line = ns.polylines[0]
    assert np.allclose(line[0], line[-1])
    level = np.sin(np.pi * line[:, 0]) ** 2 + np.sin(np.pi * line[:, 1]) ** 2
    assert np.abs(level - 1.5).max() < 1e-3
