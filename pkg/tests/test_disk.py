import math

import numpy as np
import pytest
import scipy.special

from cglbranch.disk import (SECOND_PAIR, DiskMode, bessel_j, bessel_zero, detect_continuum, disk_basis,
                            disk_eval_P2, fit_structural_constant, polar_grid, rotated_alpha,
                            second_eigenvalue, structural_form)

J11 = 3.8317059702075125


@pytest.mark.parametrize("order", [0, 1, 2, 5])
def test_bessel_against_scipy(order):
    x = np.linspace(0, 30, 601)
    assert np.abs(bessel_j(order, x) - scipy.special.jv(order, x)).max() < 1e-13


def test_bessel_zero():
    assert bessel_zero(1, 1) == pytest.approx(J11, abs=1e-13)
    assert bessel_zero(0, 1) == pytest.approx(2.404825557695773, abs=1e-13)
    assert second_eigenvalue() == pytest.approx(J11**2, rel=1e-14)


def test_mode_validation():
    with pytest.raises(ValueError):
        DiskMode(0, 1, "sin")
    with pytest.raises(ValueError):
        DiskMode(1, 0)


def test_modes_orthonormal():
    b = disk_basis((DiskMode(0, 1),) + SECOND_PAIR, 64, 64)
    gram = (b.values * b.weights) @ b.values.T
    assert np.allclose(gram, np.eye(3), atol=1e-12)


def test_polar_grid_area():
    R, T, W = polar_grid(32, 16)
    assert W.sum() == pytest.approx(math.pi, rel=1e-14)
    assert (W * R**2).sum() == pytest.approx(math.pi / 2, rel=1e-14)


def test_real_axis_vanishes():
    a = np.linspace(-2, 2, 41)
    assert np.abs(disk_eval_P2(a, radial=64, angular=64)).max() < 1e-12


def test_structural_form_fit(rng):
    alphas = rng.uniform(-2, 2, 30) + 1j * rng.uniform(-2, 2, 30)
    vals = disk_eval_P2(alphas, radial=64, angular=64)
    C = fit_structural_constant(alphas, vals)
    assert abs(C.imag) < 1e-12 and C.real == pytest.approx(0.246934, abs=1e-6)
    assert np.abs(vals - C * structural_form(alphas)).max() < 1e-10


def test_rotation_covariance(rng):
    alphas = rng.uniform(-1, 1, 10) + 1j * rng.uniform(-1, 1, 10)
    phi = 0.7
    a2, s = rotated_alpha(alphas, phi)
    lhs = disk_eval_P2(alphas, radial=64, angular=64)
    rhs = np.abs(s) ** 2 * s**2 * disk_eval_P2(a2, radial=64, angular=64)
    assert np.abs(lhs - rhs).max() < 1e-11


def test_radial_refinement_stable():
    a = np.array([0.3 + 0.8j, -1.2 + 0.1j])
    coarse = disk_eval_P2(a, radial=64, angular=64)
    fine = disk_eval_P2(a, radial=128, angular=64)
    assert np.abs(coarse - fine).max() < 1e-13


def test_detect_continuum():
    rep = detect_continuum(radial=64, angular=64)
    assert rep.continuum_detected
    assert rep.max_real_axis_P < 1e-10 and rep.max_structural_residual < 1e-9
    assert "inapplicable" in rep.conclusion
    assert set(rep.to_json()) >= {"continuum_detected", "C_re", "C_im", "conclusion"}
