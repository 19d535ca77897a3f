"""Bifurcation branches of ``lam u + Lap u = eta |u|^sigma u`` by Lyapunov-Schmidt reduction.

A branch is sought as ``u = y + eps (u_lead + sum alpha_j u_j)`` with ``y``
orthogonal to the eigenspace ``V``. The complement equation

    y = (lam - L)^{-1} P [eta |u|^sigma u]        (L = -Lap on V-perp)

is solved by Picard iteration for given ``(eps, alpha, lam)``. The
eigenspace equations, scaled so they stay O(1) as ``eps -> 0``, read

    F_lead = lam - lam0 - eta eps^{-1} int |u|^sigma u u_lead = 0
    F_m    = eps^{-(sigma+1)} int |u|^sigma u (alpha_m u_lead - u_m) = 0

and reduce to ``lam = lam0`` and the reduced system ``P(alpha) = 0`` at
``eps = 0``. They are solved by Newton in ``(Re lam, Im lam, Re alpha, Im alpha)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuationError, ConvergenceError, ResolventError
from .galerkin import GalerkinSpace
from .reduced import AlphaVector, ReducedSystem, SeedSolution, to_complex, to_real

log = logging.getLogger(__name__)

PICARD_TOL = 1e-12
PICARD_MAX = 200
NEWTON_TOL = 1e-11
NEWTON_MAX = 30
RESOLVENT_MIN = 1e-8
BRANCH_TOL = 1e-9


@dataclass
class ReducedState:
    eps: float
    lam: complex
    alpha: AlphaVector
    y: np.ndarray = field(repr=False)
    eta: complex
    sigma: float

    def field(self, space: GalerkinSpace) -> np.ndarray:
        """Full coefficient tensor of ``u = y + eps u_A``."""
        return self.y + space.embed_group(self.eps * self.alpha.coefficients())


@dataclass
class BranchSample:
    state: ReducedState
    pde_residual: float
    y_norm: float

    @property
    def eps(self) -> float:
        return self.state.eps

    @property
    def lam(self) -> complex:
        return self.state.lam


def solve_y(eps_coeffs, lam: complex, space: GalerkinSpace, eta: complex, sigma: float | None = None,
            y0: np.ndarray | None = None, tol: float = PICARD_TOL) -> np.ndarray:
    """Fixed point of the complement equation for given group coefficients.

    ``eps_coeffs`` are the coefficients ``eps_j`` of the group basis. The
    iteration stops once successive iterates differ by less than ``tol``
    times the size of the group part, or stop improving at round-off.
    """
    if sigma is not None and float(sigma) != space.sigma:
        raise ValueError("sigma disagrees with the Galerkin space")
    gap = np.abs(lam - space.eigenvalues[space.complement_mask])
    if gap.size and gap.min() < RESOLVENT_MIN:
        raise ResolventError(f"lambda={lam} is within {gap.min():.2e} of a complement eigenvalue")
    base = space.embed_group(eps_coeffs)
    scale = float(np.linalg.norm(eps_coeffs))
    y = space.zeros() if y0 is None else np.array(y0, dtype=complex)
    if scale == 0.0:
        return space.zeros()
    resolvent = np.zeros(space.shape, dtype=complex)
    resolvent[space.complement_mask] = eta / (lam - space.eigenvalues[space.complement_mask])
    prev_diff = np.inf
    stalls = 0
    for _ in range(PICARD_MAX):
        y_new = resolvent * space.nonlinear(base + y)
        diff = float(np.linalg.norm(y_new - y))
        y = y_new
        if not np.isfinite(diff):
            raise ConvergenceError("complement iteration produced non-finite values")
        if diff <= tol * scale:
            return y
        if diff >= prev_diff:
            stalls += 1
            if diff > 1e-10 * scale and stalls > 3:
                raise ConvergenceError(f"complement iteration does not contract (eps={scale:.3g})")
            if stalls > 3:
                return y
        prev_diff = diff
    raise ConvergenceError("complement iteration hit the iteration cap")


class BranchProblem:
    """Reduced equations for one seed chart on a Galerkin space."""

    def __init__(self, space: GalerkinSpace, eta: complex, lead: int = 1):
        self.space = space
        self.eta = complex(eta)
        self.sigma = space.sigma
        self.lead = lead
        self.p = space.group.p
        self.others = [j for j in range(self.p) if j != lead - 1]
        self.lam0 = space.group.eigenvalue
        self._y = None

    def coefficients(self, alpha: np.ndarray) -> np.ndarray:
        c = np.empty(self.p, dtype=complex)
        c[self.lead - 1] = 1.0
        c[self.others] = alpha
        return c

    def evaluate(self, eps: float, lam: complex, alpha: np.ndarray, warm: bool = True):
        """Residual ``(F_lead, F_m...)`` and the complement solution."""
        c = self.coefficients(alpha)
        y = solve_y(eps * c, lam, self.space, self.eta, y0=self._y if warm else None)
        u = y + self.space.embed_group(eps * c)
        Ng = self.space.group_coefficients(self.space.nonlinear(u))
        l = self.lead - 1
        F1 = lam - self.lam0 - self.eta * Ng[l] / eps
        Fm = (np.asarray(alpha) * Ng[l] - Ng[self.others]) / eps ** (self.sigma + 1)
        return np.concatenate([[F1], Fm]), y

    def unknowns(self, lam, alpha) -> np.ndarray:
        return to_real(np.concatenate([[lam], np.asarray(alpha, dtype=complex)]))

    def split(self, x):
        z = to_complex(x)
        return z[0], z[1:]

    def solve(self, eps: float, lam_guess: complex, alpha_guess) -> ReducedState:
        x = self.unknowns(lam_guess, alpha_guess)
        F, y = self._residual(eps, x)
        for _ in range(NEWTON_MAX):
            res = float(np.max(np.abs(F)))
            if res < NEWTON_TOL:
                lam, alpha = self.split(x)
                return ReducedState(eps, complex(lam), AlphaVector(self.lead, tuple(alpha)),
                                    y, self.eta, self.sigma)
            J = self._fd_jacobian(eps, x, F)
            try:
                step = np.linalg.solve(J, -to_real(F))
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError("singular Jacobian in the reduced Newton solve") from exc
            t = 1.0
            for _ls in range(12):
                try:
                    Ft, yt = self._residual(eps, x + t * step)
                except ConvergenceError:
                    Ft = None
                if Ft is not None and np.max(np.abs(Ft)) < res:
                    break
                t *= 0.5
            else:
                raise ConvergenceError(f"reduced Newton stalled at eps={eps} (residual {res:.2e})")
            x = x + t * step
            F, y = Ft, yt
        raise ConvergenceError(f"reduced Newton did not converge at eps={eps}")

    def _residual(self, eps, x):
        lam, alpha = self.split(x)
        F, y = self.evaluate(eps, lam, alpha)
        self._y = y
        return F, y

    def _fd_jacobian(self, eps, x, F0):
        n = x.size
        J = np.empty((n, n))
        f0 = to_real(F0)
        y_saved = self._y
        for k in range(n):
            h = 1e-7 * max(1.0, abs(x[k]))
            e = np.zeros(n)
            e[k] = h
            lam, alpha = self.split(x + e)
            Fk, _ = self.evaluate(eps, lam, alpha)
            J[:, k] = (to_real(Fk) - f0) / h
        self._y = y_saved
        return J


def leading_lambda(seed_alpha: AlphaVector, space: GalerkinSpace, eta: complex, eps: float) -> complex:
    """``lam0 + eta eps^sigma int |u_A|^sigma u_A u_lead`` (leading-order prediction)."""
    u = space.embed_group(seed_alpha.coefficients())
    Ng = space.group_coefficients(space.nonlinear(u))
    return space.group.eigenvalue + eta * eps**space.sigma * Ng[seed_alpha.lead - 1]


def solve_reduced(eps: float, seed: SeedSolution | AlphaVector, lambda_guess: complex | None,
                  space: GalerkinSpace, eta: complex, sigma: float | None = None,
                  alpha_guess=None) -> ReducedState:
    """Solve the scaled eigenspace equations with the complement solve inside."""
    alpha0 = seed.alpha if isinstance(seed, SeedSolution) else seed
    if sigma is not None and float(sigma) != space.sigma:
        raise ValueError("sigma disagrees with the Galerkin space")
    if eps == 0:
        return ReducedState(0.0, complex(space.group.eigenvalue), alpha0, space.zeros(),
                            complex(eta), space.sigma)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    problem = BranchProblem(space, eta, alpha0.lead)
    if lambda_guess is None:
        lambda_guess = leading_lambda(alpha0, space, eta, eps)
    guess = alpha0.alpha if alpha_guess is None else alpha_guess
    return problem.solve(eps, lambda_guess, np.array(guess, dtype=complex))


def make_sample(state: ReducedState, space: GalerkinSpace) -> BranchSample:
    u = state.field(space)
    res = float(np.linalg.norm(space.residual(u, state.lam, state.eta)))
    return BranchSample(state, res, float(np.linalg.norm(state.y)))


def default_eps_max(space: GalerkinSpace) -> float:
    """``0.2 * gap^(1/sigma)`` with ``gap`` the distance to the nearest other eigenvalue."""
    gap = np.min(np.abs(space.eigenvalues[space.complement_mask] - space.group.eigenvalue))
    return 0.2 * gap ** (1.0 / space.sigma)


def trace_branch(seed: SeedSolution | AlphaVector, eps_max: float, steps: int, space: GalerkinSpace,
                 eta: complex, sigma: float | None = None, max_bisections: int = 5) -> list[BranchSample]:
    """Continue a branch from ``eps_max / steps`` to ``eps_max``, warm-starting each solve."""
    alpha0 = seed.alpha if isinstance(seed, SeedSolution) else seed
    targets = list(eps_max * np.arange(1, steps + 1) / steps)
    samples: list[BranchSample] = []
    prev_eps, lam, alpha = 0.0, None, np.array(alpha0.alpha, dtype=complex)
    bisections = 0
    while targets:
        eps = targets[0]
        guess = lam
        if guess is not None and prev_eps > 0:
            # rescale the lambda correction assuming lam - lam0 ~ eps^sigma
            guess = space.group.eigenvalue + (lam - space.group.eigenvalue) * (eps / prev_eps) ** space.sigma
        try:
            state = solve_reduced(eps, alpha0, guess, space, eta, alpha_guess=alpha)
        except ConvergenceError as exc:
            if bisections >= max_bisections:
                raise ContinuationError(f"branch continuation failed at eps={eps}: {exc}", samples) from exc
            bisections += 1
            targets.insert(0, 0.5 * (prev_eps + eps))
            continue
        sample = make_sample(state, space)
        if eps in targets[:1]:
            targets.pop(0)
        samples.append(sample)
        prev_eps, lam, alpha = eps, state.lam, np.array(state.alpha.alpha)
        bisections = 0
    return [s for s in samples if _is_target(s.eps, eps_max, steps)] or samples


def _is_target(eps, eps_max, steps):
    k = eps * steps / eps_max
    return abs(k - round(k)) < 1e-9


@dataclass
class LimitReport:
    alpha: AlphaVector
    P_residual: float
    c: float
    rho_measured: complex
    rho_predicted: complex
    sup_norms: list[float]
    per_sample_alpha: list[tuple[complex, ...]]

    @property
    def rho_error(self) -> float:
        return abs(self.rho_measured - self.rho_predicted) / max(abs(self.rho_predicted), 1e-300)


def verify_branch_limit(samples: list[BranchSample], space: GalerkinSpace, eta: complex | None = None,
                        lead: int | None = None) -> LimitReport:
    """Recover the limiting eigenspace direction of a branch.

    Every sample is divided by its sup-norm and projected onto the
    eigenspace; the gauge is fixed by making the lead coefficient real and
    positive. The coefficient ratios and the rate ``(lam - lam0)/|u|_inf^sigma``
    are extrapolated to ``eps -> 0`` by a least-squares fit in ``eps^sigma``.
    """
    if len(samples) < 3:
        raise ValueError("need at least 3 samples")
    samples = sorted(samples, key=lambda s: s.eps)
    sigma = space.sigma
    eta = samples[0].state.eta if eta is None else complex(eta)
    lead = lead or samples[0].state.alpha.lead
    l = lead - 1
    eps = np.array([s.eps for s in samples])
    ratios, rates, sups, cs = [], [], [], []
    for s in samples:
        u = s.state.field(space)
        sup = space.sup_norm(u)
        g = space.group_coefficients(u) / sup
        if np.max(np.abs(g)) < 1e-12:
            raise ValueError("projection onto the eigenspace vanishes; branch not rooted in this group")
        g = g * np.exp(-1j * np.angle(g[l]))
        cs.append(abs(g[l]))
        ratios.append(np.delete(g / g[l], l))
        rates.append((s.state.lam - space.group.eigenvalue) / sup**sigma)
        sups.append(sup)
    ratios = np.array(ratios)
    s_var = eps**sigma
    deg = min(2, len(samples) - 1)
    alpha_lim = np.array([_extrapolate(s_var, ratios[:, j], deg) for j in range(ratios.shape[1])])
    c_lim = float(np.real(_extrapolate(s_var, np.array(cs, dtype=complex), deg)))
    rho_lim = _extrapolate(s_var, np.array(rates), deg)
    alpha = AlphaVector(lead, tuple(alpha_lim))
    P_res = 0.0
    if space.group.p > 1:
        system = ReducedSystem(space.group, sigma, lead=lead)
        P_res = float(np.max(np.abs(system.P(alpha_lim))))
    uA = space.embed_group(alpha.coefficients())
    num = np.sum(np.abs(space.to_grid(uA)) ** (sigma + 2)) * space._cell
    den = float(np.sum(np.abs(alpha.coefficients()) ** 2))
    rho_pred = eta * c_lim**sigma * num / den
    return LimitReport(alpha, P_res, c_lim, complex(rho_lim), complex(rho_pred), sups,
                       [tuple(r) for r in ratios])


def _extrapolate(x: np.ndarray, y: np.ndarray, deg: int) -> complex:
    V = np.vander(x, deg + 1, increasing=True)
    coef_re = np.linalg.lstsq(V, np.real(y), rcond=None)[0]
    coef_im = np.linalg.lstsq(V, np.imag(y), rcond=None)[0]
    return complex(coef_re[0], coef_im[0])


def hypothesis_scope(sigma: float, dim: int) -> dict[str, bool]:
    """Which results cover ``(sigma, dim)``.

    Branch existence needs ``sigma >= 1``; the limit characterization needs
    ``sigma < 4/(N-2)`` and the instability result ``1 <= sigma <= 2/(N-2)``
    (no upper bound for ``N <= 2``).
    """
    crit = np.inf if dim <= 2 else 1.0 / (dim - 2)
    return {
        "branch_existence": sigma >= 1,
        "limit_characterization": sigma >= 1 and sigma < 4 * crit,
        "instability": 1 <= sigma <= 2 * crit,
    }
