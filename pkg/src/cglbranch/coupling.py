"""Nonlinear coupling integrals over an eigenspace.

Quartic integrals of sine modes have an exact closed form: writing a product
of four sines as a sum of cosines, only frequency combinations that cancel
survive integration, each contributing ``+-L/8``. These feed the cubic
(``sigma = 2``) moments exactly; every other exponent goes through tensor
Gauss-Legendre quadrature with a two-level convergence guard.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, QuadratureGuardError
from .quadrature import (
    QuadratureGrid,
    SampledBasis,
    default_nodes,
    gauss_legendre,
    power_nonlinearity,
)
from .spectral import BoxDomain, EigenGroup, as_mode

GUARD_RTOL = 1e-9
ZERO_TOL = 1e-12


def quartic_1d(k: int, l: int, m: int, n: int, L: float) -> float:
    """Exact ``int_0^L sin(k pi x/L) sin(l pi x/L) sin(m pi x/L) sin(n pi x/L) dx``."""
    # sin a sin b = (cos(a-b) - cos(a+b)) / 2, and similarly for (m, n); the
    # cosine product splits into cos(X - Y) + cos(X + Y). Only zero
    # frequencies integrate to a nonzero value (L).
    total = 0
    for sb, sd in itertools.product((-1, 1), repeat=2):
        sign = (-sb) * (-sd)  # the a-b term carries +1, the a+b term -1
        x = k + sb * l
        y = m + sd * n
        total += sign * ((x - y == 0) + (x + y == 0))
    return total * L / 8.0


def quartic_product(modes: Sequence[Sequence[int]], box: BoxDomain, normalized: bool = True) -> float:
    """``int_box u_a u_b u_c u_d`` for four sine modes, axis by axis."""
    modes = [as_mode(m) for m in modes]
    if len(modes) != 4:
        raise ValueError("quartic_product needs exactly four modes")
    if any(len(m) != box.dim for m in modes):
        raise DomainError("mode dimension does not match the box")
    value = 1.0
    for axis, L in enumerate(box.lengths):
        value *= quartic_1d(*(m[axis] for m in modes), L)
    if normalized:
        value *= box.norm_constant() ** 4
    return value


def quartic_product_quadrature(modes: Sequence[Sequence[int]], box: BoxDomain,
                               nodes: int = 64, normalized: bool = True) -> float:
    """Quadrature oracle for :func:`quartic_product` (separable, per axis)."""
    value = 1.0
    for axis, L in enumerate(box.lengths):
        x, w = gauss_legendre(nodes, L)
        f = np.ones_like(x)
        for m in modes:
            f = f * np.sin(m[axis] * np.pi * x / L)
        value *= float(f @ w)
    if normalized:
        value *= box.norm_constant() ** 4
    return value


def quartic_tensor(group: EigenGroup) -> np.ndarray:
    """Full symmetric tensor ``Q[a,b,c,d] = int u_a u_b u_c u_d`` (normalized basis)."""
    p = group.p
    Q = np.zeros((p,) * 4)
    for idx in itertools.combinations_with_replacement(range(p), 4):
        val = quartic_product([group.modes[i] for i in idx], group.box)
        for perm in set(itertools.permutations(idx)):
            Q[perm] = val
    return Q


@dataclass(frozen=True)
class QuarticTable:
    """Diagonal (``A``) and paired (``B``) quartic integrals of a group."""

    A: float
    B: float
    cross_ok: bool


def quartic_table(group: EigenGroup) -> QuarticTable:
    """Summarize the quartic tensor as ``A = int u_m^4`` and ``B = int u_m^2 u_k^2``.

    ``cross_ok`` is True only when every other entry of the tensor vanishes
    and all diagonal (resp. paired) entries coincide, which is what the
    two-constant closed form of the cubic reduced system requires.
    """
    Q = quartic_tensor(group)
    p = group.p
    A_vals, B_vals, ok = [], [], True
    for idx in itertools.product(range(p), repeat=4):
        counts = sorted(np.bincount(idx, minlength=p).tolist(), reverse=True)
        if counts[0] == 4:
            A_vals.append(Q[idx])
        elif counts[:2] == [2, 2]:
            B_vals.append(Q[idx])
        elif abs(Q[idx]) > ZERO_TOL:
            ok = False
    A = float(A_vals[0])
    B = float(B_vals[0]) if B_vals else 0.0
    if not np.allclose(A_vals, A, rtol=1e-13, atol=0):
        ok = False
    if B_vals and not np.allclose(B_vals, B, rtol=1e-13, atol=0):
        ok = False
    return QuarticTable(A, B, ok)


class H4Report(NamedTuple):
    holds: bool
    violations: list


def check_hypothesis_H4(group: EigenGroup, box: BoxDomain | None = None) -> H4Report:
    """Check that quartic integrals of four distinct basis modes vanish.

    Vanishing does not depend on scaling, so the unnormalized exact value is
    tested. Violations are reported as ``(mode_a, mode_b, mode_c, mode_d, value)``.
    """
    box = box or group.box
    if group.p < 4:
        return H4Report(True, [])
    violations = []
    for quad in itertools.combinations(group.modes, 4):
        val = quartic_product(quad, box, normalized=False)
        if abs(val) >= ZERO_TOL:
            violations.append((*quad, val))
    return H4Report(not violations, violations)


def cubic_moments(coeffs: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """``int |u|^2 u u_d`` for ``u = sum c_j u_j`` from the quartic tensor."""
    c = np.asarray(coeffs, dtype=complex)
    return np.einsum("abcd,...a,...b,...c->...d", Q, c, c.conj(), c)


def basis_on_grid(group: EigenGroup, nodes: int | None = None, sigma: float = 2.0) -> SampledBasis:
    box = group.box
    n = nodes or default_nodes(box.dim, sigma, group.max_frequency)
    return QuadratureGrid(box, n).sample(group)


def _moment(basis: SampledBasis, coeffs, test, sigma):
    u = basis.field(np.asarray(coeffs, dtype=complex))
    v = basis.field(np.asarray(test, dtype=complex))
    return complex(basis.integrate(power_nonlinearity(u, sigma) * v))


def nonlinear_moment(coeffs, test, sigma: float, group: EigenGroup, box: BoxDomain | None = None,
                     grid: QuadratureGrid | None = None) -> complex:
    """``int |sum c_j u_j|^sigma (sum c_j u_j) (sum t_j u_j) dx`` by quadrature.

    The value is computed on ``grid`` and on the grid with twice the nodes per
    axis; a relative disagreement above ``1e-9`` raises
    :class:`QuadratureGuardError`.
    """
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    box = box or group.box
    if grid is None:
        grid = QuadratureGrid(box, default_nodes(box.dim, sigma, group.max_frequency))
    coarse = _moment(grid.sample(group), coeffs, test, sigma)
    fine = _moment(grid.refined().sample(group), coeffs, test, sigma)
    scale = max(abs(fine), np.linalg.norm(coeffs) ** (sigma + 1) * np.linalg.norm(test) * 1e-3, 1e-300)
    if abs(coarse - fine) > GUARD_RTOL * scale:
        raise QuadratureGuardError(
            f"moment not converged: {coarse} vs {fine} ({grid.nodes_per_axis} vs "
            f"{2 * grid.nodes_per_axis} nodes per axis)")
    return fine


def closed_form_moment(coeffs, test, group: EigenGroup) -> complex:
    """Exact cubic moment via the quartic tensor (``sigma = 2`` only)."""
    Q = quartic_tensor(group)
    return complex(cubic_moments(coeffs, Q) @ np.asarray(test, dtype=complex))
