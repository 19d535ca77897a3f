import math

import numpy as np
import pytest

from cglbranch.errors import ContinuationError, ConvergenceError, ResolventError
from cglbranch.galerkin import GalerkinSpace
from cglbranch.lyapunov_schmidt import (ReducedState, default_eps_max, hypothesis_scope, leading_lambda,
                                        make_sample, solve_reduced, solve_y, trace_branch, verify_branch_limit)
from cglbranch.reduced import AlphaVector, eval_P
from cglbranch.spectral import nth_group

SLOPE = 3 / (2 * math.pi)
SIMPLE = AlphaVector(1, ())


@pytest.fixture(scope="module")
def line_space(interval):
    return GalerkinSpace(nth_group(interval, 1), 24, 2)


@pytest.fixture(scope="module")
def square_space(square_group):
    return GalerkinSpace(square_group, 24, 2)


def test_solve_y_zero_data(line_space):
    y = solve_y(np.zeros(1), 1.0, line_space, 1.0)
    assert np.all(y == 0)


def test_solve_y_orthogonal_to_group(square_space):
    y = solve_y(np.array([0.05, 0.02j]), 5.0, square_space, 1.0)
    assert np.all(y[square_space.group_mask] == 0)
    assert np.linalg.norm(y) > 0


def test_solve_y_resolvent_guard(square_space):
    with pytest.raises(ResolventError):
        solve_y(np.array([0.01, 0]), 2.0, square_space, 1.0)


def test_solve_y_diverges_for_large_data(square_space):
    with pytest.raises(ConvergenceError):
        solve_y(np.array([30.0, 30.0]), 5.0, square_space, 1.0)


def test_y_scaling_slope(square_space):
    eps = np.logspace(-3, -1, 7)
    ys = [np.linalg.norm(solve_y(np.array([e, 1j * e]), 5.0, square_space, 1.0)) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(ys), 1)[0]
    assert slope >= 3 - 0.2


def test_y_lipschitz_in_data(square_space, rng):
    """||y(e) - y(e')|| <= K d^(sigma+1) |e - e'| with K stable as d shrinks."""
    ratios = []
    for d in (0.1, 0.05, 0.025):
        vals = []
        for _ in range(4):
            e1 = d * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)) / 2
            e2 = e1 + d * 0.1 * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
            lam1, lam2 = 5.0 + 0.01 * d, 5.0 - 0.01 * d
            dy = np.linalg.norm(solve_y(e1, lam1, square_space, 1.0) - solve_y(e2, lam2, square_space, 1.0))
            dist = np.linalg.norm(np.r_[e1 - e2, lam1 - lam2])
            vals.append(dy / (d ** 2 * dist))
        ratios.append(max(vals))
    assert ratios[-1] <= 1.5 * ratios[0]


def test_eps_zero_returns_seed(square_space):
    st = solve_reduced(0.0, AlphaVector(1, (1j,)), None, square_space, 1.0)
    assert st.lam == 5 and st.alpha.alpha == (1j,)


def test_lambda_expansion_interval(line_space):
    errs = []
    for eps in (0.05, 0.025, 0.0125):
        st = solve_reduced(eps, SIMPLE, None, line_space, 1.0)
        errs.append(abs((st.lam - 1) / eps**2 - SLOPE))
    assert errs[0] < 0.05 * SLOPE
    assert errs[0] > errs[1] > errs[2]


def test_complex_eta_gives_imaginary_shift(line_space):
    st = solve_reduced(0.02, SIMPLE, None, line_space, 1j)
    rate = (st.lam - 1) / 0.02**2
    assert rate.imag == pytest.approx(SLOPE, rel=1e-2) and abs(rate.real) < 1e-2 * SLOPE


def test_leading_lambda_prediction(square_space):
    a = AlphaVector(1, (1.0,))
    eps = 0.01
    st = solve_reduced(eps, a, None, square_space, 1.0)
    pred = leading_lambda(a, square_space, 1.0, eps)
    assert abs(st.lam - pred) < 1e-2 * abs(pred - 5)


def test_truncation_robustness(interval):
    g = nth_group(interval, 1)
    lams = [solve_reduced(0.05, SIMPLE, None, GalerkinSpace(g, K, 2), 1.0).lam for K in (24, 48)]
    assert abs(lams[0] - lams[1]) < 1e-8 * abs(lams[1])


def test_real_subflow(square_space):
    st = solve_reduced(0.02, AlphaVector(1, (-1.0,)), None, square_space, 1.0)
    assert abs(st.lam.imag) < 1e-12
    assert np.abs(st.y.imag).max() < 1e-12
    assert abs(complex(st.alpha.alpha[0]).imag) < 1e-12


def test_gauge_equivariance(square_space):
    st = solve_reduced(0.02, AlphaVector(1, (1j,)), None, square_space, 1.0)
    u = st.field(square_space)
    r0 = np.linalg.norm(square_space.residual(u, st.lam, 1.0))
    z = np.exp(0.7j)
    assert abs(np.linalg.norm(square_space.residual(z * u, st.lam, 1.0)) - r0) < 1e-12


def test_complex_branch_is_complex(square_space):
    samples = trace_branch(AlphaVector(1, (1j,)), 0.02, 4, square_space, 1.0)
    u = samples[-1].state.field(square_space)
    g = square_space.to_grid(u)
    # not a constant phase times a real function
    phase = g / np.where(np.abs(g) > 1e-12, np.abs(g), 1)
    assert np.ptp(np.angle(phase[np.abs(g) > 1e-3 * np.abs(g).max()])) > 0.5
    assert all(s.pde_residual < 1e-9 for s in samples)


@pytest.mark.parametrize("seed", [0, 1.0, -1.0, 1j, -1j])
def test_branch_limit_recovers_seed(square_space, square_group, seed):
    samples = trace_branch(AlphaVector(1, (seed,)), 0.02, 4, square_space, 1.0)
    assert len(samples) == 4 and all(s.pde_residual < 1e-9 for s in samples)
    rep = verify_branch_limit(samples, square_space)
    assert abs(rep.alpha.alpha[0] - seed) < 1e-4
    assert abs(eval_P(rep.alpha, 2, square_group)[0]) < 1e-8
    assert rep.rho_error < 1e-3
    limit = square_space.embed_group(rep.c * rep.alpha.coefficients())
    assert square_space.sup_norm(limit) == pytest.approx(1.0, abs=1e-4)
    assert rep.sup_norms == sorted(rep.sup_norms)


def test_trace_branch_partial_on_failure(square_space):
    with pytest.raises(ContinuationError) as info:
        trace_branch(AlphaVector(1, (1.0,)), 40.0, 4, square_space, 1.0, max_bisections=1)
    assert isinstance(info.value.samples, list)


def test_default_eps_max(square_space):
    assert default_eps_max(square_space) == pytest.approx(0.2 * math.sqrt(3))


def test_make_sample_fields(line_space):
    st = ReducedState(0.0, 1.0, SIMPLE, line_space.zeros(), 1.0, 2.0)
    s = make_sample(st, line_space)
    assert s.pde_residual == 0 and s.y_norm == 0


def test_hypothesis_scope():
    assert hypothesis_scope(2, 2) == {"branch_existence": True, "limit_characterization": True,
                                      "instability": True}
    s3 = hypothesis_scope(3, 3)
    assert s3["branch_existence"] and s3["limit_characterization"] and not s3["instability"]
    assert not hypothesis_scope(4, 3)["limit_characterization"]
