"""Linear and nonlinear stability of bound states under the CGL flow.

A solution ``u`` of ``lam u + Lap u = eta |u|^sigma u`` with ``|eta| = 1``
gives the standing wave ``v = exp(i omega t) u`` of

    v_t = exp(i theta) Lap v + exp(i gamma) |v|^sigma v + k v

with ``k - i omega = exp(i theta) lam`` and ``exp(i gamma) = -exp(i theta) eta``.
The linearization about the wave couples ``v`` and ``conj(v)``, so the period
map is only R-linear and is assembled on stacked (Re, Im) coefficients.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConvergenceError
from .galerkin import GalerkinSpace
from .lyapunov_schmidt import BranchSample
from .quadrature import power_derivatives

log = logging.getLogger(__name__)

OMEGA_MIN = 1e-10
DEFAULT_STEPS = 2048

UNSTABLE = "unstable"
INCONCLUSIVE = "inconclusive"
OUTSIDE = "outside theorem: first eigenvalue"


@dataclass(frozen=True)
class CGLParams:
    theta: float
    gamma: float
    k: float
    sigma: float
    omega: float
    scale: float = 1.0  # bound-state amplitude factor making |eta| = 1

    def __post_init__(self):
        if not abs(self.theta) < math.pi / 2:
            raise ValueError("|theta| must be < pi/2")

    @property
    def period(self) -> float:
        if abs(self.omega) < OMEGA_MIN:
            return math.inf
        return 2 * math.pi / abs(self.omega)

    @property
    def lam(self) -> complex:
        """``exp(-i theta)(k - i omega)``."""
        return cmath.exp(-1j * self.theta) * complex(self.k, -self.omega)


def params_from_branch(lam: complex, eta: complex, theta: float, sigma: float = 2.0) -> CGLParams:
    """CGL coefficients for which the bound state rotates as a standing wave."""
    rot = cmath.exp(1j * theta) * complex(lam)
    eta = complex(eta)
    if eta == 0:
        raise ValueError("eta must be nonzero")
    gamma = theta + cmath.phase(-eta)
    return CGLParams(theta=theta, gamma=gamma, k=rot.real, sigma=sigma, omega=-rot.imag,
                     scale=abs(eta) ** (1.0 / sigma))


def linear_rates(params: CGLParams, space: GalerkinSpace) -> np.ndarray:
    """Diagonal of ``A = exp(i theta) Lap + k`` on the truncation: ``-exp(i theta) lam_j + k``."""
    return -cmath.exp(1j * params.theta) * space.eigenvalues + params.k


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    max_real: float


def linear_spectrum_A(params: CGLParams, space: GalerkinSpace) -> SpectrumReport:
    ev = np.sort_complex(linear_rates(params, space).ravel())[::-1]
    ev = ev[np.argsort(-ev.real, kind="stable")]
    return SpectrumReport(ev, float(ev.real.max()))


# -- exponential time differencing ---------------------------------------------------

class ETDRK4:
    """Cox-Matthews ETDRK4 for ``v' = a * v + N(v, t)`` with diagonal ``a``.

    The phi-function coefficients use contour averages, which avoids the
    cancellation of the direct formulas for small ``a h``.
    """

    def __init__(self, a: np.ndarray, h: float, contour_points: int = 32):
        self.h = h
        z = a * h
        self.E = np.exp(z)
        self.E2 = np.exp(z / 2)
        r = np.exp(2j * np.pi * (np.arange(1, contour_points + 1) - 0.5) / contour_points)
        zr = z[..., None] + r
        ez = np.exp(zr)
        self.Q = h * np.mean((np.exp(zr / 2) - 1) / zr, axis=-1)
        self.f1 = h * np.mean((-4 - zr + ez * (4 - 3 * zr + zr**2)) / zr**3, axis=-1)
        self.f2 = h * np.mean((2 + zr + ez * (zr - 2)) / zr**3, axis=-1)
        self.f3 = h * np.mean((-4 - 3 * zr - zr**2 + ez * (4 - zr)) / zr**3, axis=-1)
        real_a = np.isrealobj(a)
        if real_a:
            for name in ("Q", "f1", "f2", "f3"):
                setattr(self, name, getattr(self, name).real)

    def step(self, v, t, N):
        h = self.h
        Nv = N(v, t)
        a = self.E2 * v + self.Q * Nv
        Na = N(a, t + h / 2)
        b = self.E2 * v + self.Q * Na
        Nb = N(b, t + h / 2)
        c = self.E2 * a + self.Q * (2 * Nb - Nv)
        Nc = N(c, t + h)
        return self.E * v + self.f1 * Nv + 2 * self.f2 * (Na + Nb) + self.f3 * Nc


# -- linearized flow ---------------------------------------------------------------

def _bound_state(sample: BranchSample, params: CGLParams, space: GalerkinSpace) -> np.ndarray:
    return params.scale * sample.state.field(space)


class Linearization:
    """``B(t) v`` for the wave ``exp(i omega t) u`` on a Galerkin space."""

    def __init__(self, u_coeffs: np.ndarray, params: CGLParams, space: GalerkinSpace):
        self.space = space
        self.params = params
        dz, dzbar = power_derivatives(space.to_grid(u_coeffs), params.sigma)
        self.mod = np.exp(1j * params.gamma) * dz
        self.conj = np.exp(1j * params.gamma) * dzbar

    def apply(self, v: np.ndarray, t: float = 0.0) -> np.ndarray:
        vg = self.space.to_grid(v)
        phase = np.exp(2j * self.params.omega * t)
        return self.space.project(self.mod * vg + phase * self.conj * np.conj(vg))

    def apply_rotating(self, w: np.ndarray) -> np.ndarray:
        """Time-independent coupling in the frame co-rotating with the wave."""
        return self.apply(w, 0.0)


def realify_basis(space: GalerkinSpace) -> np.ndarray:
    """Initial data ``e_j`` and ``i e_j`` for every truncation mode, shape ``(2n, *shape)``."""
    n = space.size
    V = np.zeros((2 * n, n), dtype=complex)
    V[np.arange(n), np.arange(n)] = 1.0
    V[n + np.arange(n), np.arange(n)] = 1j
    return V.reshape((2 * n,) + space.shape)


def stack_real(v: np.ndarray, space: GalerkinSpace) -> np.ndarray:
    """Columns ``[Re v; Im v]`` for a batch of coefficient tensors."""
    flat = v.reshape(v.shape[0], space.size)
    return np.concatenate([flat.real, flat.imag], axis=1).T


@dataclass
class MonodromyResult:
    multipliers: np.ndarray
    max_modulus: float
    matrix_dim: int
    matrix: np.ndarray = field(repr=False)
    period: float = math.nan
    steps: int = 0
    autonomous: bool = False


def _result(U, period, steps, autonomous=False) -> MonodromyResult:
    mu = np.linalg.eigvals(U)
    mu = mu[np.argsort(-np.abs(mu), kind="stable")]
    return MonodromyResult(mu, float(np.abs(mu).max()), U.shape[0], U, period, steps, autonomous)


def propagate_linear(lin: Linearization, a: np.ndarray, V0: np.ndarray, t_end: float, steps: int) -> np.ndarray:
    h = t_end / steps
    scheme = ETDRK4(a, h)
    v = V0
    for n in range(steps):
        v = scheme.step(v, n * h, lambda x, t: lin.apply(x, t))
    return v


def monodromy(sample: BranchSample, params: CGLParams, space: GalerkinSpace, steps: int = DEFAULT_STEPS,
              check: bool = True, rtol: float = 1e-6) -> MonodromyResult:
    """Floquet multipliers of the linearized period map by ETDRK4 integration.

    With ``check`` the map is recomputed with half the step count; a relative
    change of ``max|mu|`` above ``rtol`` raises :class:`ConvergenceError`.
    """
    if abs(params.omega) < OMEGA_MIN:
        return autonomous_monodromy(sample, params, space)
    u = _bound_state(sample, params, space)
    lin = Linearization(u, params, space)
    a = linear_rates(params, space)
    V0 = realify_basis(space)
    T = params.period
    U = stack_real(propagate_linear(lin, a, V0, T, steps), space)
    res = _result(U, T, steps)
    if check:
        coarse = stack_real(propagate_linear(lin, a, V0, T, steps // 2), space)
        mc = float(np.abs(np.linalg.eigvals(coarse)).max())
        if abs(mc - res.max_modulus) > rtol * res.max_modulus:
            raise ConvergenceError(
                f"monodromy not converged in dt: {mc} vs {res.max_modulus} ({steps // 2} vs {steps} steps)")
    return res


def rotating_generator(sample: BranchSample, params: CGLParams, space: GalerkinSpace) -> np.ndarray:
    """Real matrix of ``w -> (A - i omega) w + B0 w`` in the co-rotating frame."""
    u = _bound_state(sample, params, space)
    lin = Linearization(u, params, space)
    a = linear_rates(params, space) - 1j * params.omega
    V0 = realify_basis(space)
    out = a * V0 + lin.apply(V0, 0.0)
    return stack_real(out, space)


def autonomous_monodromy(sample: BranchSample, params: CGLParams, space: GalerkinSpace) -> MonodromyResult:
    """Period map as ``expm(T * generator)``; the rotation returns to identity after one period.

    For ``omega = 0`` the state is stationary and the unit-time map is used.
    """
    M = rotating_generator(sample, params, space)
    T = params.period if abs(params.omega) >= OMEGA_MIN else 1.0
    U = scipy.linalg.expm(T * M)
    return _result(U, T, 0, autonomous=True)


def linear_propagator(params: CGLParams, space: GalerkinSpace, t: float) -> np.ndarray:
    """Real matrix of ``S(t) = exp(t A)``."""
    d = np.exp(t * linear_rates(params, space)).ravel()
    return np.block([[np.diag(d.real), -np.diag(d.imag)], [np.diag(d.imag), np.diag(d.real)]])


def perturbation_norm(result: MonodromyResult, params: CGLParams, space: GalerkinSpace) -> float:
    """``||U0 - S(T)||_2`` on the truncation."""
    return float(np.linalg.norm(result.matrix - linear_propagator(params, space, result.period), 2))


# -- nonlinear simulation ------------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray
    modal_norm: np.ndarray
    sup_norm: np.ndarray
    orbit_distance: np.ndarray
    final: np.ndarray = field(repr=False)
    fields: list = field(default_factory=list, repr=False)
    blowup: bool = False

    def growth_rate(self, window: tuple[float, float] | None = None) -> float:
        """Least-squares slope of ``log(orbit_distance)`` over ``window``."""
        t, d = self.times, self.orbit_distance
        if window is None:
            window = (0.5 * t[-1], t[-1])
        m = (t >= window[0]) & (t <= window[1]) & (d > 0)
        return float(np.polyfit(t[m], np.log(d[m]), 1)[0])


def orbit_distance(v: np.ndarray, u: np.ndarray) -> float:
    """``min_{|z|=1} ||v - z u||`` in L2 (coefficient norm)."""
    ip = np.vdot(u, v)
    z = ip / abs(ip) if abs(ip) > 0 else 1.0
    return float(np.linalg.norm(v - z * u))


def simulate_cgl(initial: np.ndarray, params: CGLParams, space: GalerkinSpace, t_end: float, dt: float,
                 reference: np.ndarray | None = None, nonlinear: bool = True, record_every: int = 1,
                 keep_fields: bool = False, ceiling: float = 1e6) -> Trajectory:
    """ETDRK4 integration of the truncated CGL equation.

    The linear part is propagated exactly. ``reference`` is the bound-state
    profile used for the gauge-orbit distance.
    """
    steps = max(1, int(round(t_end / dt)))
    h = t_end / steps
    a = linear_rates(params, space)
    scheme = ETDRK4(a, h)
    coef = np.exp(1j * params.gamma)
    s = params.sigma

    def N(v, t):
        if not nonlinear:
            return 0.0 * v
        g = space.to_grid(v)
        return coef * space.project(np.abs(g) ** s * g)

    v = np.array(initial, dtype=complex)
    times, norms, sups, dists, fields = [], [], [], [], []
    blowup = False

    def record(t, v):
        times.append(t)
        norms.append(float(np.linalg.norm(v)))
        sups.append(space.sup_norm(v))
        dists.append(orbit_distance(v, reference) if reference is not None else math.nan)
        if keep_fields:
            fields.append(v.copy())

    record(0.0, v)
    for n in range(steps):
        v = scheme.step(v, n * h, N)
        if (n + 1) % record_every == 0 or n + 1 == steps:
            record((n + 1) * h, v)
            if not np.isfinite(sups[-1]) or sups[-1] > ceiling:
                blowup = True
                log.warning("sup-norm exceeded %g at t=%g", ceiling, (n + 1) * h)
                break
    return Trajectory(np.array(times), np.array(norms), np.array(sups), np.array(dists), v, fields, blowup)


# -- verdict -----------------------------------------------------------------------

def is_first_eigenvalue(space: GalerkinSpace) -> bool:
    return math.isclose(space.group.eigenvalue, space.box.first_eigenvalue(), rel_tol=1e-12)


def instability_verdict(sample: BranchSample, params: CGLParams, space: GalerkinSpace,
                        perturbation: float = 1e-6, seed: int = 0, steps: int = DEFAULT_STEPS,
                        growth_windows: float = 9.0, details: dict | None = None) -> dict:
    """Combine the spectral, Floquet, and nonlinear signals into one report.

    At the first eigenvalue no instability is claimed and the verdict is
    ``OUTSIDE``. When ``details`` is a dict it receives the
    :class:`MonodromyResult` and the perturbed :class:`Trajectory`.
    """
    sigma = params.sigma
    u = _bound_state(sample, params, space)
    sup = space.sup_norm(u)
    band = (sigma + 1) * sup**sigma
    spec = linear_spectrum_A(params, space)
    report = {
        "eps": float(sample.eps),
        "lambda": [float(sample.lam.real), float(sample.lam.imag)],
        "first_eigenvalue": is_first_eigenvalue(space),
        "max_re_spectrum_A": spec.max_real,
        "perturbation_band": band,
    }
    if report["first_eigenvalue"]:
        report["verdict"] = OUTSIDE
        return report
    if abs(params.omega) < OMEGA_MIN:
        mono = autonomous_monodromy(sample, params, space)
    else:
        mono = monodromy(sample, params, space, steps=steps)
    predicted = math.log(mono.max_modulus) / mono.period
    rng = np.random.default_rng(seed)
    delta = rng.standard_normal(space.shape) + 1j * rng.standard_normal(space.shape)
    delta *= perturbation / np.linalg.norm(delta)
    t_end = min(growth_windows / predicted, 4 * mono.period) if predicted > 0 else mono.period
    dt = mono.period / steps if math.isfinite(mono.period) else t_end / steps
    traj = simulate_cgl(u + delta, params, space, t_end, dt, reference=u, record_every=8)
    measured = traj.growth_rate()
    report.update({
        "max_multiplier_modulus": mono.max_modulus,
        "period": mono.period,
        "floquet_rate": predicted,
        "measured_rate": measured,
        "rate_relative_error": abs(measured - predicted) / abs(predicted) if predicted else math.inf,
        "signals": {
            "spectrum": spec.max_real > band,
            "floquet": mono.max_modulus > 1 + 1e-6,
            "nonlinear": bool(traj.orbit_distance[-1] > 10 * traj.orbit_distance[0]),
        },
    })
    report["verdict"] = UNSTABLE if all(report["signals"].values()) else INCONCLUSIVE
    if details is not None:
        details.update(monodromy=mono, trajectory=traj)
    return report
