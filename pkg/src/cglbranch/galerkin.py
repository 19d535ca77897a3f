"""Sine-Galerkin truncation of a box with a DST-I collocation pair.

Coefficients live in a tensor of shape ``(K,) * dim`` indexed by
``k - 1``; entry ``a[k]`` multiplies the normalized eigenfunction of mode
``k``. Nonlinear terms are evaluated on the interior grid
``x_i = i L / (M + 1)`` and projected back with the discrete sine transform,
which is exact for trigonometric integrands of degree below ``2 (M + 1)``.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import DomainError
from .spectral import BoxDomain, EigenGroup


def collocation_size(cutoff: int, sigma: float) -> int:
    """Interior collocation points per axis for ``|u|^sigma u`` at cutoff ``K``."""
    if float(sigma).is_integer() and int(sigma) % 2 == 0:
        return (int(sigma) + 2) * cutoff // 2 + 1
    return 2 * (math.ceil(sigma) + 2) * cutoff


class GalerkinSpace:
    """Modes with ``max_j k_j <= cutoff``, split into the group ``V`` and its complement."""

    def __init__(self, group: EigenGroup, cutoff: int = 24, sigma: float = 2.0,
                 collocation: int | None = None):
        self.group = group
        self.box: BoxDomain = group.box
        self.cutoff = int(cutoff)
        if self.cutoff < group.max_frequency:
            raise DomainError(f"cutoff {cutoff} excludes group modes {group.modes}")
        self.sigma = float(sigma)
        self.M = collocation or max(collocation_size(self.cutoff, sigma), self.cutoff)
        dim = self.box.dim
        self.shape = (self.cutoff,) * dim
        k = np.indices(self.shape) + 1
        scale = self.box.eigen_scale
        q = np.array([float(v) for v in self.box.lengths_sq]).reshape((dim,) + (1,) * dim)
        self.eigenvalues = scale * np.sum(k.astype(float) ** 2 / q, axis=0)
        self.group_index = [tuple(kj - 1 for kj in m) for m in group.modes]
        self.group_mask = np.zeros(self.shape, dtype=bool)
        for idx in self.group_index:
            self.group_mask[idx] = True
        self.complement_mask = ~self.group_mask
        self._c = self.box.norm_constant()
        self._cell = float(np.prod(self.box.lengths / (self.M + 1)))

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def complement_modes(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) + 1 for v in idx) for idx in zip(*np.nonzero(self.complement_mask))]

    @cached_property
    def grid_axes(self) -> list[np.ndarray]:
        i = np.arange(1, self.M + 1)
        return [i * L / (self.M + 1) for L in self.box.lengths]

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)

    def embed_group(self, coeffs) -> np.ndarray:
        """Tensor with ``coeffs[j]`` on group mode ``j`` and zeros elsewhere."""
        a = self.zeros()
        for idx, c in zip(self.group_index, coeffs):
            a[idx] = c
        return a

    def group_coefficients(self, a: np.ndarray) -> np.ndarray:
        return np.array([a[idx] for idx in self.group_index])

    def to_grid(self, a: np.ndarray) -> np.ndarray:
        """Field values on the collocation grid (leading batch axes allowed)."""
        nb = a.ndim - self.dim
        pad = [(0, 0)] * nb + [(0, self.M - self.cutoff)] * self.dim
        axes = tuple(range(nb, a.ndim))
        full = np.pad(a, pad)
        return scipy.fft.dstn(full, type=1, axes=axes) * (self._c / 2**self.dim)

    def project(self, g: np.ndarray) -> np.ndarray:
        """Galerkin coefficients ``int g u_k`` for every truncation mode."""
        nb = g.ndim - self.dim
        axes = tuple(range(nb, g.ndim))
        full = scipy.fft.dstn(g, type=1, axes=axes) * (self._c * self._cell / 2**self.dim)
        sl = (slice(None),) * nb + (slice(0, self.cutoff),) * self.dim
        return full[sl]

    def nonlinear(self, a: np.ndarray) -> np.ndarray:
        """Coefficients of ``|u|^sigma u``."""
        u = self.to_grid(a)
        return self.project(np.abs(u) ** self.sigma * u)

    def sup_norm(self, a: np.ndarray) -> float:
        """Maximum of ``|u|`` over the collocation grid."""
        return float(np.max(np.abs(self.to_grid(a))))

    def residual(self, a: np.ndarray, lam: complex, eta: complex) -> np.ndarray:
        """Coefficients of ``lam u + Lap u - eta |u|^sigma u``."""
        return (lam - self.eigenvalues) * a - eta * self.nonlinear(a)

    def refined(self, factor: int = 2) -> "GalerkinSpace":
        return GalerkinSpace(self.group, self.cutoff * factor, self.sigma)

    def transfer(self, a: np.ndarray, other: "GalerkinSpace") -> np.ndarray:
        """Copy coefficients into another truncation (zero-padded or clipped)."""
        out = other.zeros()
        n = min(self.cutoff, other.cutoff)
        sl = (slice(0, n),) * self.dim
        out[sl] = a[sl]
        return out
