"""Dirichlet-Laplacian eigenpairs on N-dimensional boxes.

A box is ``prod_j (0, L_j)``. Squared side lengths are stored as exact
rationals so that eigenvalue degeneracy is decided by rational equality.
With ``pi_units=True`` the lengths are measured in multiples of pi, i.e.
``L_j = pi * sqrt(q_j)``; this covers the classical ``(0, pi)^N`` boxes
without leaving exact arithmetic.

Eigenfunctions are L2-normalized products of sines::

    u_k(x) = prod_j sqrt(2 / L_j) sin(k_j pi x_j / L_j)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError

Mode = tuple[int, ...]


def as_rational(value) -> Fraction:
    """Parse an exact rational from an int, Fraction, or ``"p/q"`` string.

    Floats are refused: a binary float is not a faithful description of a
    squared length such as 3/5.
    """
    if isinstance(value, bool):
        raise DomainError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational: {value!r}") from exc
    raise DomainError(f"squared lengths must be exact rationals, got {value!r}")


def as_mode(k: Sequence[int]) -> Mode:
    mode = tuple(int(v) for v in k)
    if not mode or any(v < 1 for v in mode):
        raise DomainError(f"mode entries must be positive integers, got {k!r}")
    return mode


@dataclass(frozen=True)
class BoxDomain:
    """Box ``prod (0, L_j)`` with exact squared lengths."""

    lengths_sq: tuple[Fraction, ...]
    pi_units: bool = False

    def __post_init__(self):
        qs = tuple(as_rational(q) for q in self.lengths_sq)
        if not qs:
            raise DomainError("box needs at least one axis")
        if any(q <= 0 for q in qs):
            raise DomainError("squared lengths must be positive")
        object.__setattr__(self, "lengths_sq", qs)

    @classmethod
    def cube(cls, dim: int, length_sq=1, pi_units: bool = True) -> "BoxDomain":
        return cls((as_rational(length_sq),) * dim, pi_units)

    @classmethod
    def interval(cls, length_sq=1, pi_units: bool = True) -> "BoxDomain":
        return cls((as_rational(length_sq),), pi_units)

    @property
    def dim(self) -> int:
        return len(self.lengths_sq)

    @property
    def unit(self) -> float:
        return math.pi if self.pi_units else 1.0

    @property
    def lengths(self) -> np.ndarray:
        return np.array([self.unit * math.sqrt(q) for q in self.lengths_sq])

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def eigen_scale(self) -> float:
        """Factor turning the rational part into the eigenvalue."""
        return 1.0 if self.pi_units else math.pi**2

    def norm_constant(self) -> float:
        return float(np.prod(np.sqrt(2.0 / self.lengths)))

    def first_eigenvalue(self) -> float:
        return eigenvalue_of((1,) * self.dim, self).value


class Eigenvalue(NamedTuple):
    value: float
    rational: Fraction


def _check_dim(mode: Mode, box: BoxDomain):
    if len(mode) != box.dim:
        raise DomainError(f"mode {mode} has dimension {len(mode)}, box has {box.dim}")


def rational_part(mode: Sequence[int], box: BoxDomain) -> Fraction:
    mode = as_mode(mode)
    _check_dim(mode, box)
    return sum((Fraction(k * k) / q for k, q in zip(mode, box.lengths_sq)), Fraction(0))


def eigenvalue_of(mode: Sequence[int], box: BoxDomain) -> Eigenvalue:
    """Dirichlet eigenvalue ``pi^2 sum k_j^2 / L_j^2`` of a sine mode."""
    r = rational_part(mode, box)
    return Eigenvalue(box.eigen_scale * float(r), r)


@dataclass(frozen=True)
class EigenGroup:
    """One eigenvalue with the sine modes spanning its eigenspace.

    ``modes`` are sorted lexicographically; the basis function ``u_j`` is
    ``modes[j]`` normalized to unit L2 norm.
    """

    rational: Fraction
    modes: tuple[Mode, ...]
    box: BoxDomain = field(repr=False)

    @property
    def eigenvalue(self) -> float:
        return self.box.eigen_scale * float(self.rational)

    @property
    def multiplicity(self) -> int:
        return len(self.modes)

    p = multiplicity

    @property
    def norm_constant(self) -> float:
        return self.box.norm_constant()

    @property
    def max_frequency(self) -> int:
        return max(max(m) for m in self.modes)

    def subgroup(self, indices: Sequence[int]) -> "EigenGroup":
        """Group restricted to ``modes[i]`` for the given 0-based indices."""
        return EigenGroup(self.rational, tuple(self.modes[i] for i in indices), self.box)

    def reordered(self, lead: int) -> "EigenGroup":
        """Move the 0-based ``lead`` mode to the front, keeping the rest in order."""
        order = [lead] + [i for i in range(self.p) if i != lead]
        return self.subgroup(order)


def group_for_modes(modes: Sequence[Sequence[int]], box: BoxDomain) -> EigenGroup:
    """Build a group from explicit modes, checking they share one eigenvalue."""
    modes = tuple(as_mode(m) for m in modes)
    rats = {rational_part(m, box) for m in modes}
    if len(rats) != 1:
        raise DomainError(f"modes {modes} do not share an eigenvalue")
    return EigenGroup(rats.pop(), modes, box)


def enumerate_groups(box: BoxDomain, max_eigenvalue: float) -> list[EigenGroup]:
    """All eigenvalues ``<= max_eigenvalue`` grouped by exact degeneracy."""
    bound = float(max_eigenvalue) * (1 + 1e-12) / box.eigen_scale
    base = sum(1 / float(q) for q in box.lengths_sq)
    if base > bound:
        return []
    ranges = []
    for q in box.lengths_sq:
        kmax = int(math.sqrt(float(q) * (bound - base + 1 / float(q)))) + 1
        ranges.append(range(1, kmax + 1))
    buckets: dict[Fraction, list[Mode]] = {}
    for mode in itertools.product(*ranges):
        r = rational_part(mode, box)
        if float(r) <= bound:
            buckets.setdefault(r, []).append(mode)
    return [EigenGroup(r, tuple(sorted(buckets[r])), box) for r in sorted(buckets)]


def nth_group(box: BoxDomain, index: int) -> EigenGroup:
    """The ``index``-th distinct eigenvalue (1-based)."""
    if index < 1:
        raise DomainError("group index is 1-based")
    bound = box.first_eigenvalue() * 2
    while True:
        groups = enumerate_groups(box, bound)
        if len(groups) > index:
            return groups[index - 1]
        bound *= 2


def group_with_rational(box: BoxDomain, rational) -> EigenGroup:
    r = as_rational(rational)
    for g in enumerate_groups(box, box.eigen_scale * float(r)):
        if g.rational == r:
            return g
    raise DomainError(f"{r} is not an eigenvalue (rational part) of {box}")


def _sines(mode: Mode, box: BoxDomain, coords: Sequence[np.ndarray]):
    out = box.norm_constant()
    for k, L, x in zip(mode, box.lengths, coords):
        out = out * np.sin(k * np.pi * np.asarray(x, dtype=float) / L)
    return out


def eval_eigenfunction(mode: Sequence[int], box: BoxDomain, point: Sequence[float]) -> float:
    """Normalized eigenfunction value at one point of the closed box."""
    mode = as_mode(mode)
    _check_dim(mode, box)
    point = np.asarray(point, dtype=float)
    if point.shape != (box.dim,):
        raise DomainError(f"point must have {box.dim} coordinates")
    tol = 1e-12 * max(1.0, float(box.lengths.max()))
    if np.any(point < -tol) or np.any(point > box.lengths + tol):
        raise DomainError(f"point {point} outside the box")
    return float(_sines(mode, box, point))


def eval_on_axes(mode: Sequence[int], box: BoxDomain, axes: Sequence[np.ndarray]) -> np.ndarray:
    """Eigenfunction on the tensor grid ``axes[0] x axes[1] x ...``."""
    mode = as_mode(mode)
    _check_dim(mode, box)
    out = np.array(box.norm_constant())
    for k, L, x in zip(mode, box.lengths, axes):
        out = np.multiply.outer(out, np.sin(k * np.pi * np.asarray(x) / L))
    return out
