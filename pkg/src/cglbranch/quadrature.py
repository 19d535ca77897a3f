"""Tensor Gauss-Legendre grids and basis sampling for box domains."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import BoxDomain, EigenGroup, eval_on_axes

# nodes per axis by dimension, before frequency-based enlargement
DEFAULT_NODES = {1: 64, 2: 64, 3: 32, 4: 16}


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, length: float) -> tuple[np.ndarray, np.ndarray]:
    """``n``-point Gauss-Legendre rule on ``(0, length)``."""
    x, w = _leggauss(n)
    return (x + 1.0) * (0.5 * length), w * (0.5 * length)


def default_nodes(dim: int, sigma: float = 2.0, max_frequency: int = 1) -> int:
    """Nodes per axis resolving ``|u|^sigma u * v`` for the given frequencies.

    The integrand of an even-``sigma`` moment is a trigonometric polynomial
    of degree ``D = (sigma + 2) * max_frequency`` per axis, and ``D + 12``
    Gauss-Legendre nodes integrate every ``cos(d pi x / L)``, ``d <= D``,
    to round-off. Non-even ``sigma`` leaves a non-smooth integrand at zeros
    of ``u``; the count is doubled, or quadrupled when ``sigma < 2``.
    """
    base = DEFAULT_NODES.get(dim, 12)
    degree = (math.ceil(sigma) + 2) * max_frequency
    needed = degree + 12
    n = max(base, needed)
    if not _is_even_integer(sigma):
        n *= 2 if sigma >= 2 else 4
    return n


def _is_even_integer(sigma: float) -> bool:
    return float(sigma).is_integer() and int(sigma) % 2 == 0


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor Gauss-Legendre rule on a box."""

    box: BoxDomain
    nodes_per_axis: int

    @property
    def axes(self) -> list[np.ndarray]:
        return [gauss_legendre(self.nodes_per_axis, L)[0] for L in self.box.lengths]

    @property
    def axis_weights(self) -> list[np.ndarray]:
        return [gauss_legendre(self.nodes_per_axis, L)[1] for L in self.box.lengths]

    @property
    def weights(self) -> np.ndarray:
        w = np.array(1.0)
        for wj in self.axis_weights:
            w = np.multiply.outer(w, wj)
        return w.ravel()

    @property
    def size(self) -> int:
        return self.nodes_per_axis**self.box.dim

    def refined(self) -> "QuadratureGrid":
        return QuadratureGrid(self.box, 2 * self.nodes_per_axis)

    def sample(self, group: EigenGroup) -> "SampledBasis":
        vals = np.stack([eval_on_axes(m, self.box, self.axes).ravel() for m in group.modes])
        return SampledBasis(vals, self.weights)


@dataclass(frozen=True)
class SampledBasis:
    """Real basis functions evaluated at quadrature nodes.

    ``values`` has shape ``(p, n_nodes)``; ``weights`` has shape ``(n_nodes,)``.
    Any domain (box or disk) reduces to this form for moment evaluation.
    """

    values: np.ndarray
    weights: np.ndarray

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def field(self, coeffs: np.ndarray) -> np.ndarray:
        """``sum_j c_j u_j`` at the nodes; ``coeffs`` may carry leading batch axes."""
        return np.asarray(coeffs) @ self.values

    def integrate(self, f: np.ndarray) -> np.ndarray:
        """Integral of ``f`` (last axis = nodes), real and imaginary parts separately."""
        f = np.asarray(f)
        if np.iscomplexobj(f):
            return f.real @ self.weights + 1j * (f.imag @ self.weights)
        return f @ self.weights

    def project(self, f: np.ndarray) -> np.ndarray:
        """``int f u_d`` for every basis function ``d``; shape ``(..., p)``."""
        wv = self.values * self.weights
        f = np.asarray(f)
        if np.iscomplexobj(f):
            return f.real @ wv.T + 1j * (f.imag @ wv.T)
        return f @ wv.T


def power_nonlinearity(u: np.ndarray, sigma: float) -> np.ndarray:
    """``|u|^sigma u``."""
    return np.abs(u) ** sigma * u


def power_derivatives(u: np.ndarray, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Wirtinger derivatives of ``z -> |z|^sigma z``.

    Returns ``(d/dz, d/dzbar) = ((sigma/2 + 1)|z|^sigma, (sigma/2)|z|^(sigma-2) z^2)``;
    the second factor is set to 0 at exact zeros, where it is bounded by
    ``|z|^sigma`` anyway.
    """
    r = np.abs(u)
    dz = (0.5 * sigma + 1.0) * r**sigma
    if _is_even_integer(sigma) and sigma >= 2:
        dzbar = 0.5 * sigma * r ** (sigma - 2) * u * u
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            dzbar = np.where(r > 0, 0.5 * sigma * r ** (sigma - 2) * u * u, 0.0)
    return dz, dzbar
