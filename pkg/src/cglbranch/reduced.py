"""The reduced polynomial system on an eigenspace and its roots.

For an eigenspace spanned by real orthonormal ``u_1..u_p`` and a chosen lead
function ``u_l`` (coefficient fixed to 1 by gauge), the reduced system is

    P_m(alpha) = int |u_A|^sigma u_A (alpha_m u_l - u_m) dx,   m != l,
    u_A = u_l + sum_{j != l} alpha_j u_j.

Nondegenerate zeros seed bifurcation branches. The map is not holomorphic,
so nondegeneracy means invertibility of the real ``2(p-1)``-dimensional
Jacobian of ``(Re P, Im P)`` with respect to ``(Re alpha, Im alpha)``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coupling import check_hypothesis_H4, cubic_moments, quartic_table, quartic_tensor
from .errors import HypothesisError
from .quadrature import (
    QuadratureGrid,
    SampledBasis,
    default_nodes,
    power_derivatives,
    power_nonlinearity,
)
from .spectral import BoxDomain, EigenGroup

log = logging.getLogger(__name__)

SOLVE_TOL = 1e-10
DEDUP_TOL = 1e-6
DEGENERACY_THRESHOLD = 1e-8
REAL_TOL = 1e-8
MAX_NEWTON = 40
ROW_FLOOR = 1e-10
CONTINUUM_COUNT = 25


@dataclass(frozen=True)
class AlphaVector:
    """Coefficients relative to a lead basis function.

    ``lead`` is 1-based; ``alpha`` lists the coefficients of the remaining
    basis functions in their original order.
    """

    lead: int
    alpha: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(complex(a) for a in self.alpha))
        if self.lead < 1:
            raise ValueError("lead is 1-based")
        if not all(np.isfinite(a.real) and np.isfinite(a.imag) for a in self.alpha):
            raise ValueError("alpha must be finite")

    @property
    def p(self) -> int:
        return len(self.alpha) + 1

    def coefficients(self) -> np.ndarray:
        """Full coefficient vector ``c`` with ``c[lead-1] = 1``."""
        return np.insert(np.array(self.alpha, dtype=complex), self.lead - 1, 1.0)

    @classmethod
    def from_coefficients(cls, c: Sequence[complex], lead: int | None = None) -> "AlphaVector":
        """Rescale ``c`` so the lead coefficient is 1 (lead defaults to the first nonzero)."""
        c = np.asarray(c, dtype=complex)
        if lead is None:
            lead = int(np.flatnonzero(np.abs(c) > 0)[0]) + 1
        c = c / c[lead - 1]
        return cls(lead, tuple(np.delete(c, lead - 1)))


class ReducedSystem:
    """Evaluator for ``P`` and its real Jacobian on one eigenspace.

    ``basis`` supplies the quadrature route (any domain). For box groups with
    ``sigma == 2`` the exact quartic tensor is used unless
    ``method="quadrature"`` is requested.
    """

    def __init__(self, group: EigenGroup | None, sigma: float, lead: int = 1,
                 basis: SampledBasis | None = None, method: str = "auto", nodes: int | None = None):
        if sigma < 1:
            raise ValueError("sigma must be >= 1")
        self.group = group
        self.sigma = float(sigma)
        self.p = group.p if group is not None else basis.p
        if not 1 <= lead <= self.p:
            raise ValueError(f"lead {lead} out of range 1..{self.p}")
        self.lead = lead
        self.others = [j for j in range(self.p) if j != lead - 1]
        if method == "auto":
            method = "tensor" if (basis is None and self.sigma == 2.0) else "quadrature"
        self.method = method
        self._Q = None
        self._basis = None
        if method == "tensor":
            if group is None or self.sigma != 2.0:
                raise ValueError("tensor method needs a box group and sigma = 2")
            self._Q = quartic_tensor(group)
        elif method == "quadrature":
            if basis is None:
                n = nodes or default_nodes(group.box.dim, self.sigma, group.max_frequency)
                basis = QuadratureGrid(group.box, n).sample(group)
            self._basis = basis
        else:
            raise ValueError(f"unknown method {method!r}")

    @property
    def n(self) -> int:
        return self.p - 1

    # -- moments -----------------------------------------------------------
    def moments(self, c: np.ndarray, derivatives: bool = False):
        """``I_d = int f(u) u_d`` and optionally ``dI/dc``, ``dI/dcbar``.

        ``c`` has shape ``(..., p)``; ``f(z) = |z|^sigma z``.
        """
        c = np.asarray(c, dtype=complex)
        if self._Q is not None:
            Q = self._Q
            I = cubic_moments(c, Q)
            if not derivatives:
                return I
            G = 2.0 * np.einsum("jbcd,...b,...c->...dj", Q, c.conj(), c)
            H = np.einsum("ajcd,...a,...c->...dj", Q, c, c)
            return I, G, H
        return self._quadrature_moments(c, derivatives)

    def _quadrature_moments(self, c, derivatives):
        b = self._basis
        batch = c.shape[:-1]
        flat = c.reshape(-1, self.p)
        chunk = max(1, int(4e6 // b.values.shape[1]))
        Is, Gs, Hs = [], [], []
        for s in range(0, flat.shape[0], chunk):
            cc = flat[s:s + chunk]
            u = b.field(cc)
            Is.append(b.project(power_nonlinearity(u, self.sigma)))
            if derivatives:
                fz, fzb = power_derivatives(u, self.sigma)
                wv = b.values * b.weights
                # G[s, d, j] = int fz u_j u_d
                Gs.append(np.einsum("sq,jq,dq->sdj", fz, b.values, wv))
                Hs.append(np.einsum("sq,jq,dq->sdj", fzb, b.values, wv))
        I = np.concatenate(Is).reshape(*batch, self.p)
        if not derivatives:
            return I
        G = np.concatenate(Gs).reshape(*batch, self.p, self.p)
        H = np.concatenate(Hs).reshape(*batch, self.p, self.p)
        return I, G, H

    def coefficients(self, alpha: np.ndarray) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=complex)
        c = np.empty(alpha.shape[:-1] + (self.p,), dtype=complex)
        c[..., self.lead - 1] = 1.0
        c[..., self.others] = alpha
        return c

    # -- P and Jacobian ------------------------------------------------------
    def P(self, alpha: np.ndarray) -> np.ndarray:
        """Complex residual ``(P_m)_{m != lead}``; ``alpha`` shape ``(..., p-1)``."""
        alpha = np.asarray(alpha, dtype=complex)
        I = self.moments(self.coefficients(alpha))
        return alpha * I[..., [self.lead - 1]] - I[..., self.others]

    def complex_derivatives(self, alpha: np.ndarray):
        """``(P, dP/dalpha, dP/dalphabar)``."""
        alpha = np.asarray(alpha, dtype=complex)
        I, G, H = self.moments(self.coefficients(alpha), derivatives=True)
        l, o = self.lead - 1, self.others
        Il = I[..., [l]]
        P = alpha * Il - I[..., o]
        a = alpha[..., :, None]
        Gp = a * G[..., l, o][..., None, :] - G[..., o, :][..., :, o]
        Hp = a * H[..., l, o][..., None, :] - H[..., o, :][..., :, o]
        eye = np.eye(self.n)
        Gp = Gp + eye * Il[..., None]
        return P, Gp, Hp

    def real_jacobian(self, alpha: np.ndarray) -> np.ndarray:
        """Jacobian of ``(Re P, Im P)`` w.r.t. ``(Re alpha, Im alpha)``."""
        _, Gp, Hp = self.complex_derivatives(alpha)
        return realify_jacobian(Gp, Hp)

    def fd_jacobian(self, alpha: Sequence[complex], h: float = 1e-6) -> np.ndarray:
        """Central-difference Jacobian (independent check of :meth:`real_jacobian`)."""
        x = to_real(np.asarray(alpha, dtype=complex))
        J = np.empty((2 * self.n, 2 * self.n))
        for k in range(2 * self.n):
            e = np.zeros_like(x)
            e[k] = h
            J[:, k] = (to_real(self.P(to_complex(x + e))) - to_real(self.P(to_complex(x - e)))) / (2 * h)
        return J


def realify_jacobian(Gp: np.ndarray, Hp: np.ndarray) -> np.ndarray:
    S, D = Gp + Hp, Gp - Hp
    top = np.concatenate([S.real, -D.imag], axis=-1)
    bottom = np.concatenate([S.imag, D.real], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def to_real(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


def to_complex(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


def normalized_det(J: np.ndarray) -> float:
    """Determinant after scaling every row to unit Euclidean norm.

    Rows below ``ROW_FLOOR`` times the largest row are round-off and count
    as zero; normalizing them would manufacture a well-conditioned matrix.
    """
    J = np.atleast_2d(np.asarray(J, dtype=float))
    if J.size == 0:
        return 1.0
    norms = np.linalg.norm(J, axis=-1, keepdims=True)
    if np.any(norms <= ROW_FLOOR * norms.max()) or norms.max() == 0:
        return 0.0
    return float(np.linalg.det(J / norms))


# -- module-level evaluation API ------------------------------------------------

def _system_for(alpha: AlphaVector, sigma, group, box=None, **kw) -> ReducedSystem:
    if box is not None and box != group.box:
        raise ValueError("group and box disagree")
    if alpha.p != group.p:
        raise ValueError(f"alpha has {alpha.p - 1} entries, group needs {group.p - 1}")
    return ReducedSystem(group, sigma, lead=alpha.lead, **kw)


def eval_P(alpha: AlphaVector, sigma: float, group: EigenGroup, box: BoxDomain | None = None,
           **kw) -> np.ndarray:
    """Reduced-system residual at ``alpha`` (length ``p - 1``)."""
    if group.p < 2:
        raise ValueError("the reduced system needs p >= 2")
    return _system_for(alpha, sigma, group, box, **kw).P(np.array(alpha.alpha))


def eval_real_jacobian(alpha: AlphaVector, sigma: float, group: EigenGroup,
                       box: BoxDomain | None = None, **kw) -> np.ndarray:
    return _system_for(alpha, sigma, group, box, **kw).real_jacobian(np.array(alpha.alpha))


def closed_form_P_sigma2(alpha: AlphaVector, A: float, B: float,
                         group: EigenGroup | None = None) -> np.ndarray:
    """Cubic reduced system from the two quartic constants only.

    Valid when every mixed quartic integral vanishes (always checked when a
    ``group`` is given). With ``I_d = A|c_d|^2 c_d + B sum_{e != d}(2|c_e|^2 c_d + c_e^2 conj(c_d))``,
    ``P_m = alpha_m I_lead - I_m``.
    """
    if group is not None:
        if group.p >= 4 and not check_hypothesis_H4(group).holds:
            raise HypothesisError("four-mode quartic integrals do not vanish; closed form invalid")
        if not quartic_table(group).cross_ok:
            raise HypothesisError("mixed quartic integrals do not vanish; closed form invalid")
    c = alpha.coefficients()
    abs2 = np.abs(c) ** 2
    I = np.empty_like(c)
    for d in range(len(c)):
        rest = np.delete(np.arange(len(c)), d)
        I[d] = A * abs2[d] * c[d] + B * np.sum(2 * abs2[rest] * c[d] + c[rest] ** 2 * np.conj(c[d]))
    l = alpha.lead - 1
    others = [j for j in range(len(c)) if j != l]
    return np.array(alpha.alpha) * I[l] - I[others]


# -- multistart ---------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Lattice of starting points: ``re`` and ``im`` are ``(start, stop, step)``."""

    re: tuple[float, float, float] = (-2.0, 2.0, 0.5)
    im: tuple[float, float, float] = (-2.0, 2.0, 0.5)
    real_only: bool = False

    def axis(self, spec) -> np.ndarray:
        a, b, h = spec
        return a + h * np.arange(int(round((b - a) / h)) + 1)

    def starts(self, n: int) -> np.ndarray:
        re = self.axis(self.re)
        values = re.astype(complex) if self.real_only else (
            re[:, None] + 1j * self.axis(self.im)[None, :]).ravel()
        if n == 0:
            return np.zeros((1, 0), dtype=complex)
        return np.array(list(itertools.product(values, repeat=n)), dtype=complex)


@dataclass
class SeedSolution:
    alpha: AlphaVector
    residual: float
    jacobian_det: float
    nondegenerate: bool
    is_real: bool
    chart: int = 1

    def coefficients(self) -> np.ndarray:
        return self.alpha.coefficients()

    def nonzero_count(self, tol: float = DEDUP_TOL) -> int:
        return int(np.sum(np.abs(self.coefficients()) > tol))

    def to_record(self) -> dict:
        a = np.array(self.alpha.alpha, dtype=complex)
        return {
            "lead": self.alpha.lead,
            "alpha_re": [float(v) for v in a.real],
            "alpha_im": [float(v) for v in a.imag],
            "residual": float(self.residual),
            "jacobian_det": float(self.jacobian_det),
            "nondegenerate": bool(self.nondegenerate),
            "is_real": bool(self.is_real),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SeedSolution":
        alpha = AlphaVector(int(rec["lead"]), tuple(
            complex(r, i) for r, i in zip(rec["alpha_re"], rec["alpha_im"])))
        return cls(alpha, rec["residual"], rec["jacobian_det"], rec["nondegenerate"], rec["is_real"])


def damped_newton(system: ReducedSystem, starts: np.ndarray, tol: float = SOLVE_TOL,
                  max_iter: int = MAX_NEWTON) -> tuple[np.ndarray, np.ndarray]:
    """Batched Newton on ``(Re alpha, Im alpha)`` with Armijo backtracking on ``|P|^2``.

    Returns the final iterates (complex, shape ``(S, p-1)``) and a converged mask.
    """
    z = np.array(starts, dtype=complex)
    S = z.shape[0]
    if system.n == 0:
        return z, np.ones(S, dtype=bool)
    P, Gp, Hp = system.complex_derivatives(z)
    res = np.max(np.abs(P), axis=-1)
    active = np.isfinite(res)
    done = res < tol
    for _ in range(max_iter):
        idx = np.flatnonzero(active & ~done)
        if idx.size == 0:
            break
        J = realify_jacobian(Gp[idx], Hp[idx])
        F = to_real(P[idx])
        step = _batched_solve(J, -F)
        x0 = to_real(z[idx])
        phi0 = np.sum(F**2, axis=-1)
        t = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        new_x = x0.copy()
        for _ls in range(30):
            k = np.flatnonzero(pending)
            if k.size == 0:
                break
            trial = x0[k] + t[k, None] * step[k]
            Pt = system.P(to_complex(trial))
            phi = np.sum(to_real(Pt) ** 2, axis=-1)
            ok = np.isfinite(phi) & (phi <= (1 - 2e-4 * t[k]) * phi0[k])
            new_x[k[ok]] = trial[ok]
            pending[k[ok]] = False
            t[k[~ok]] *= 0.5
        stalled = pending
        active[idx[stalled]] = False
        z[idx] = to_complex(new_x)
        Pn, Gn, Hn = system.complex_derivatives(z[idx])
        P[idx], Gp[idx], Hp[idx] = Pn, Gn, Hn
        res_idx = np.max(np.abs(Pn), axis=-1)
        done[idx] = res_idx < tol
        active[idx] &= np.isfinite(res_idx) & (np.max(np.abs(z[idx]), axis=-1) < 1e6)
    idx = np.flatnonzero(done)
    for _ in range(3):
        if idx.size == 0:
            break
        # undamped polishing steps, kept only where the residual drops
        step = _batched_solve(realify_jacobian(Gp[idx], Hp[idx]), -to_real(P[idx]))
        trial = to_complex(to_real(z[idx]) + step)
        Pn, Gn, Hn = system.complex_derivatives(trial)
        better = np.max(np.abs(Pn), axis=-1) < np.max(np.abs(P[idx]), axis=-1)
        k = idx[better]
        z[k], P[k], Gp[k], Hp[k] = trial[better], Pn[better], Gn[better], Hn[better]
        idx = k
    return z, done


def _batched_solve(J, b):
    try:
        return np.linalg.solve(J, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.einsum("sij,sj->si", np.linalg.pinv(J), b)


def _classify(system: ReducedSystem, z: np.ndarray) -> SeedSolution:
    if system.n == 0:
        return SeedSolution(AlphaVector(system.lead, ()), 0.0, 1.0, True, True)
    P = system.P(z)
    J = system.real_jacobian(z)
    det = normalized_det(J)
    return SeedSolution(
        alpha=AlphaVector(system.lead, tuple(z)),
        residual=float(np.max(np.abs(P))),
        jacobian_det=det,
        nondegenerate=abs(det) > DEGENERACY_THRESHOLD,
        is_real=bool(np.max(np.abs(z.imag)) < REAL_TOL),
    )


def dedupe(points: np.ndarray, tol: float = DEDUP_TOL) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for z in points:
        if all(np.linalg.norm(z - k) >= tol for k in kept):
            kept.append(z)
    return kept


def _canonical_key(z: np.ndarray):
    return tuple(v for a in z for v in (round(a.real, 8) + 0.0, round(a.imag, 8) + 0.0))


@dataclass
class MultistartResult:
    seeds: list[SeedSolution]
    n_starts: int
    n_failed: int


def multistart_solve(system: ReducedSystem, grid_spec: GridSpec | None = None) -> MultistartResult:
    """Damped Newton from every lattice start; deduplicated, sorted, classified."""
    grid_spec = grid_spec or GridSpec()
    starts = grid_spec.starts(system.n)
    z, ok = damped_newton(system, starts)
    conv = z[ok]
    if grid_spec.real_only and system.n:
        conv = conv.real.astype(complex)
    roots = sorted(dedupe(conv), key=_canonical_key)
    seeds = [_classify(system, r) for r in roots]
    return MultistartResult(seeds, len(starts), int(np.sum(~ok)))


def solve_system(sigma: float, group: EigenGroup, box: BoxDomain | None = None,
                 grid_spec: GridSpec | None = None, lead: int = 1, **kw) -> list[SeedSolution]:
    """Convenience wrapper: multistart on ``group`` with the given lead."""
    return multistart_solve(ReducedSystem(group, sigma, lead=lead, **kw), grid_spec).seeds


# -- branch enumeration -----------------------------------------------------------

@dataclass
class BranchEnumeration:
    seeds: list[SeedSolution]
    continuum: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def real_seeds(self) -> list[SeedSolution]:
        return [s for s in self.seeds if s.is_real and s.nondegenerate]

    @property
    def complex_seeds(self) -> list[SeedSolution]:
        return [s for s in self.seeds if not s.is_real]

    @property
    def real_count(self) -> int | None:
        return None if self.continuum else len(self.real_seeds)

    def partition(self) -> dict[int, int]:
        """Real nondegenerate seeds grouped by number of nonzero coefficients."""
        out: dict[int, int] = {}
        for s in self.real_seeds:
            k = s.nonzero_count()
            out[k] = out.get(k, 0) + 1
        return dict(sorted(out.items()))


def _continuum_probe(system: ReducedSystem, root: np.ndarray, tol: float) -> bool:
    """Look for a 1-D family of real zeros through a degenerate real root."""
    t = np.linspace(-2.0, 2.0, 101)
    for j in range(system.n):
        pts = np.repeat(root[None, :].real.astype(complex), t.size, axis=0)
        pts[:, j] = t
        res = np.max(np.abs(system.P(pts)), axis=-1)
        if np.sum(res < tol) > CONTINUUM_COUNT:
            return True
    return False


def enumerate_branches(sigma: float, group: EigenGroup, box: BoxDomain | None = None,
                       grid_spec: GridSpec | None = None, order: Sequence[int] | None = None,
                       basis: SampledBasis | None = None, **kw) -> BranchEnumeration:
    """Seeds chart by chart: lead ``u_1``, then lead ``u_2`` with ``u_1``'s coefficient 0, ...

    ``order`` (1-based indices) fixes which basis function leads each chart;
    by default the group order. Every seed is re-evaluated in the full system
    (forced-zero coefficients included) before classification.
    """
    p = group.p if group is not None else basis.p
    order = list(order) if order is not None else list(range(1, p + 1))
    grid_spec = grid_spec or GridSpec()
    seeds: list[SeedSolution] = []
    notes: list[str] = []
    continuum = False
    for chart, lead in enumerate(order, start=1):
        members = [i - 1 for i in order[chart - 1:]]
        sub_basis = None
        sub_group = None
        if basis is not None:
            sub_basis = SampledBasis(basis.values[members], basis.weights)
        else:
            sub_group = group.subgroup(members)
        sub = ReducedSystem(sub_group, sigma, lead=1, basis=sub_basis, **kw)
        result = multistart_solve(sub, grid_spec)
        full = ReducedSystem(group, sigma, lead=lead, basis=basis, **kw)
        for s in result.seeds:
            c = np.zeros(p, dtype=complex)
            c[members] = s.alpha.coefficients()
            alpha = np.delete(c, lead - 1)
            seed = _classify(full, alpha)
            seed.chart = chart
            if seed.residual >= SOLVE_TOL:
                notes.append(f"chart {chart} seed {np.round(alpha, 6)} is not a root of the full system")
                continue
            seeds.append(seed)
        for s in result.seeds:
            if s.is_real and not s.nondegenerate and sub.n > 0:
                if _continuum_probe(sub, np.array(s.alpha.alpha), SOLVE_TOL):
                    continuum = True
                    notes.append(f"chart {chart}: continuum of real zeros suspected")
                    break
    return BranchEnumeration(seeds, continuum, notes)
