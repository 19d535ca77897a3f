"""The unit disk: Bessel eigenfunctions and the second-eigenvalue pair.

The second Dirichlet eigenvalue ``j_{1,1}^2`` has the eigenspace spanned by
``J_1(j r) cos(t)`` and ``J_1(j r) sin(t)``. Rotations act on it, so the
reduced map vanishes on the whole real axis and the real roots form a
continuum instead of isolated nondegenerate points.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
import scipy.optimize

from .quadrature import SampledBasis, gauss_legendre
from .reduced import DEGENERACY_THRESHOLD, ReducedSystem, normalized_det

SERIES_MAX = 4.0
DEFAULT_RADIAL = 128
DEFAULT_ANGULAR = 256


# -- Bessel functions ----------------------------------------------------------------

def _series(order: int, x: np.ndarray) -> np.ndarray:
    """Ascending series ``sum (-1)^k (x/2)^(2k+m) / (k! (k+m)!)``."""
    h = 0.5 * x
    term = h**order / math.factorial(order)
    total = term.copy()
    q = -h * h
    for k in range(1, 40):
        term = term * q / (k * (k + order))
        total += term
    return total


def _miller(order: int, x: np.ndarray) -> np.ndarray:
    """Backward recurrence from a high order, normalized by ``J_0 + 2 sum J_2k = 1``."""
    top = max(order, float(x.max()))
    N = 2 * int((top + 30 + 4 * math.sqrt(top)) / 2)
    nxt = np.zeros_like(x)
    cur = np.full_like(x, 1e-300)
    total = np.zeros_like(x)
    out = np.zeros_like(x)
    for k in range(N, 0, -1):
        prev = (2 * k / x) * cur - nxt  # J_{k-1}
        nxt, cur = cur, prev
        if k - 1 == order:
            out = cur.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            total += 2 * cur
        big = np.abs(cur) > 1e200
        if big.any():
            s = np.where(big, 1e-200, 1.0)
            cur *= s
            nxt *= s
            total *= s
            out *= s
    total += cur  # J_0
    return out / total


def bessel_j(order: int, x):
    """Bessel function of the first kind ``J_order(x)`` for ``x >= 0``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if (xa < 0).any():
        raise ValueError("x must be >= 0")
    out = np.empty_like(xa)
    small = xa <= SERIES_MAX
    if small.any():
        out[small] = _series(order, xa[small])
    if (~small).any():
        out[~small] = _miller(order, xa[~small])
    return out[0] if np.ndim(x) == 0 else out.reshape(np.shape(x))


@lru_cache(maxsize=32)
def bessel_zero(order: int, n: int) -> float:
    """``n``-th positive zero of ``J_order``, bracketed on a 0.1 grid and refined."""
    x = np.arange(0.1, 10.0 + 4 * n + order, 0.1)
    v = bessel_j(order, x)
    idx = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    a = idx[n - 1]
    return float(scipy.optimize.brentq(lambda t: bessel_j(order, t), x[a], x[a + 1], xtol=1e-15, rtol=1e-15))


@dataclass(frozen=True)
class DiskMode:
    angular_index: int
    radial_index: int
    parity: str = "cos"

    def __post_init__(self):
        if self.angular_index < 0 or self.radial_index < 1:
            raise ValueError("need m >= 0 and n >= 1")
        if self.parity not in ("cos", "sin") or (self.angular_index == 0 and self.parity == "sin"):
            raise ValueError(f"invalid parity {self.parity!r} for m={self.angular_index}")

    @property
    def bessel_zero(self) -> float:
        return bessel_zero(self.angular_index, self.radial_index)

    @property
    def eigenvalue(self) -> float:
        return self.bessel_zero**2

    def norm_constant(self) -> float:
        """``c`` with ``int_disk (c J_m(j r) trig(m t))^2 = 1``.

        Uses ``int_0^1 J_m(j r)^2 r dr = J_{m+1}(j)^2 / 2``.
        """
        j = self.bessel_zero
        radial = 0.5 * bessel_j(self.angular_index + 1, j) ** 2
        angular = 2 * math.pi if self.angular_index == 0 else math.pi
        return 1.0 / math.sqrt(radial * angular)

    def __call__(self, r, t):
        m = self.angular_index
        trig = np.cos(m * t) if self.parity == "cos" else np.sin(m * t)
        return self.norm_constant() * bessel_j(m, self.bessel_zero * np.asarray(r)) * trig


SECOND_PAIR = (DiskMode(1, 1, "cos"), DiskMode(1, 1, "sin"))


def second_eigenvalue() -> float:
    return SECOND_PAIR[0].eigenvalue


# -- polar quadrature ----------------------------------------------------------------

def polar_grid(radial: int = DEFAULT_RADIAL, angular: int = DEFAULT_ANGULAR):
    """Nodes ``(r, t)`` and weights of Gauss-Legendre (weight ``r``) x trapezoid."""
    r, wr = gauss_legendre(radial, 1.0)
    t = 2 * math.pi * np.arange(angular) / angular
    R, T = np.meshgrid(r, t, indexing="ij")
    W = np.outer(wr * r, np.full(angular, 2 * math.pi / angular))
    return R.ravel(), T.ravel(), W.ravel()


def disk_basis(modes=SECOND_PAIR, radial: int = DEFAULT_RADIAL, angular: int = DEFAULT_ANGULAR,
               rotation: float = 0.0) -> SampledBasis:
    """Sampled eigenfunctions; ``rotation`` turns the angular frame by that angle."""
    R, T, W = polar_grid(radial, angular)
    vals = np.stack([m(R, T - rotation) for m in modes])
    return SampledBasis(vals, W)


@lru_cache(maxsize=8)
def _system(sigma: float, radial: int, angular: int, rotation: float = 0.0) -> ReducedSystem:
    return ReducedSystem(None, sigma, lead=1, basis=disk_basis(SECOND_PAIR, radial, angular, rotation))


def disk_eval_P2(alpha, sigma: float = 2.0, radial: int = DEFAULT_RADIAL, angular: int = DEFAULT_ANGULAR,
                 rotation: float = 0.0):
    """``int |u|^sigma u (alpha u_1 - u_2)`` with ``u = u_1 + alpha u_2``; vectorized in ``alpha``."""
    sys = _system(float(sigma), radial, angular, rotation)
    a = np.asarray(alpha, dtype=complex)
    return sys.P(a[..., None])[..., 0] if a.ndim else complex(sys.P(np.array([a]))[0])


def structural_form(alpha):
    """``(alpha^2 - |alpha|^2) alpha + 2 i Im(alpha)``."""
    a = np.asarray(alpha, dtype=complex)
    return (a * a - np.abs(a) ** 2) * a + 2j * a.imag


def fit_structural_constant(alphas, values) -> complex:
    """Least-squares ``C`` in ``values ~ C * structural_form(alphas)``."""
    s = structural_form(alphas)
    return complex(np.vdot(s, values) / np.vdot(s, s))


@dataclass
class ContinuumReport:
    continuum_detected: bool
    C_re: float
    C_im: float
    max_structural_residual: float
    max_real_axis_P: float
    max_real_axis_det: float
    conclusion: str

    def to_json(self) -> dict:
        return asdict(self)


def detect_continuum(sigma: float = 2.0, n_real: int = 101, n_random: int = 50, seed: int = 0,
                     tol: float = 1e-10, radial: int = DEFAULT_RADIAL, angular: int = DEFAULT_ANGULAR
                     ) -> ContinuumReport:
    """Check that the whole real axis solves ``P_2 = 0`` with a singular Jacobian."""
    sys = _system(float(sigma), radial, angular)
    real = np.linspace(-2.0, 2.0, n_real)
    Preal = np.abs(sys.P(real[:, None].astype(complex)))[:, 0]
    dets = np.array([abs(normalized_det(sys.real_jacobian(np.array([a], dtype=complex))))
                     for a in real])
    rng = np.random.default_rng(seed)
    alphas = rng.uniform(-2, 2, n_random) + 1j * rng.uniform(-2, 2, n_random)
    vals = sys.P(alphas[:, None])[:, 0]
    C = fit_structural_constant(alphas, vals)
    resid = float(np.max(np.abs(vals - C * structural_form(alphas))) / abs(C))
    detected = bool(Preal.max() < tol and dets.max() < DEGENERACY_THRESHOLD)
    conclusion = ("continuum of real roots; isolated-branch theorem inapplicable" if detected
                  else "no continuum detected")
    return ContinuumReport(detected, C.real, C.imag, resid, float(Preal.max()), float(dets.max()), conclusion)


def rotated_alpha(alpha, phi: float):
    """Chart change induced by rotating the angular frame by ``phi``.

    With ``s = cos(phi) + alpha sin(phi)`` the same function reads
    ``s (u_1' + alpha' u_2')`` where ``alpha' = (alpha cos(phi) - sin(phi)) / s``,
    and ``P_2(alpha) = |s|^sigma s^2 P_2'(alpha')``.
    """
    a = np.asarray(alpha, dtype=complex)
    s = math.cos(phi) + a * math.sin(phi)
    return (a * math.cos(phi) - math.sin(phi)) / s, s
