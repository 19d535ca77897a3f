"""JSON run configuration.

Example::

    {
      "domain": {"type": "box", "lengths_sq": ["1", "1"], "unit": "pi"},
      "sigma": 2, "eta": [1, 0], "theta": 0.3,
      "group": {"index": 2},
      "solver": {"cutoff": 24, "grid": {"re": [-2, 2, 0.5], "im": [-2, 2, 0.5]}},
      "seed": 0
    }

Rationals are strings ``"p/q"`` (integers are accepted too) and complex
numbers are ``[re, im]`` pairs. With ``"unit": "pi"`` the side lengths are
``pi * sqrt(q)``; without it they are ``sqrt(q)``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import ConfigError, DomainError
from .reduced import GridSpec
from .spectral import BoxDomain, EigenGroup, enumerate_groups, group_with_rational, nth_group

DOMAIN_TYPES = ("box", "interval", "disk")

SOLVER_DEFAULTS: dict[str, Any] = {
    "cutoff": 24,
    "nodes": None,
    "grid": {"re": [-2.0, 2.0, 0.5], "im": [-2.0, 2.0, 0.5], "real_only": False},
    "order": None,
    "eps_steps": 8,
    "eps_max": None,
    "monodromy_steps": 2048,
    "perturbation": 1e-6,
    "bound": None,
    "radial_nodes": 128,
    "angular_nodes": 256,
    "continuum_tol": 1e-10,
}


def parse_rational(v) -> Fraction:
    if isinstance(v, bool) or isinstance(v, float):
        raise ConfigError(f"rational expected as integer or 'p/q' string, got {v!r}")
    try:
        return Fraction(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational {v!r}") from exc


def parse_complex(v) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        return complex(v[0], v[1])
    raise ConfigError(f"complex number expected as [re, im], got {v!r}")


def complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass
class RunConfig:
    domain: dict
    sigma: float = 2.0
    eta: complex = 1.0
    theta: float = 0.0
    group: dict = field(default_factory=lambda: {"index": 2})
    lead: int = 1
    solver: dict = field(default_factory=dict)
    nodal: dict = field(default_factory=dict)
    seed: int = 0

    # -- construction --------------------------------------------------------
    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {"domain", "sigma", "eta", "theta", "group", "lead", "solver", "nodal", "seed"}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "domain" not in raw:
            raise ConfigError("config needs a 'domain'")
        solver = dict(SOLVER_DEFAULTS)
        for k, v in (raw.get("solver") or {}).items():
            if k not in SOLVER_DEFAULTS:
                raise ConfigError(f"unknown solver option {k!r}")
            solver[k] = v
        cfg = cls(
            domain=dict(raw["domain"]),
            sigma=float(raw.get("sigma", 2.0)),
            eta=parse_complex(raw.get("eta", [1.0, 0.0])),
            theta=float(raw.get("theta", 0.0)),
            group=dict(raw.get("group", {"index": 2})),
            lead=int(raw.get("lead", 1)),
            solver=solver,
            nodal=dict(raw.get("nodal") or {}),
            seed=int(raw.get("seed", 0)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def validate(self) -> None:
        kind = self.domain.get("type")
        if kind not in DOMAIN_TYPES:
            raise ConfigError(f"domain type must be one of {DOMAIN_TYPES}, got {kind!r}")
        if self.sigma < 1:
            raise ConfigError("sigma must be >= 1")
        if self.eta == 0:
            raise ConfigError("eta must be nonzero")
        if not abs(self.theta) < math.pi / 2:
            raise ConfigError("|theta| must be < pi/2")
        if kind != "disk":
            self.box()
        sel = set(self.group) & {"index", "rational"}
        if len(sel) != 1 and kind != "disk":
            raise ConfigError("group selector needs exactly one of 'index' or 'rational'")
        for key in ("perturbation", "continuum_tol"):
            if not self.solver[key] > 0:
                raise ConfigError(f"solver.{key} must be > 0")
        for key in ("cutoff", "eps_steps", "monodromy_steps", "radial_nodes", "angular_nodes"):
            if int(self.solver[key]) < 1:
                raise ConfigError(f"solver.{key} must be >= 1")
        g = self.solver["grid"]
        for ax in ("re", "im"):
            spec = g.get(ax, [-2, 2, 0.5])
            if len(spec) != 3 or not spec[2] > 0 or spec[1] < spec[0]:
                raise ConfigError(f"solver.grid.{ax} must be [start, stop, step>0]")

    # -- derived objects ---------------------------------------------------------
    def box(self) -> BoxDomain:
        kind = self.domain["type"]
        if kind == "interval":
            return BoxDomain.interval()
        if kind != "box":
            raise ConfigError("this command needs a box or interval domain")
        lengths = self.domain.get("lengths_sq")
        if not lengths:
            raise ConfigError("box domain needs 'lengths_sq'")
        unit = self.domain.get("unit")
        if unit not in (None, "pi"):
            raise ConfigError(f"unit must be 'pi' or absent, got {unit!r}")
        try:
            return BoxDomain(tuple(parse_rational(q) for q in lengths), pi_units=unit == "pi")
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def eigen_group(self) -> EigenGroup:
        box = self.box()
        try:
            if "index" in self.group:
                return nth_group(box, int(self.group["index"]))
            return group_with_rational(box, parse_rational(self.group["rational"]))
        except (DomainError, ValueError) as exc:
            raise ConfigError(f"group selector {self.group}: {exc}") from exc

    def spectrum_bound(self) -> float:
        b = self.solver.get("bound")
        if b is None:
            b = self.group.get("bound")
        if b is None:
            raise ConfigError("spectrum needs solver.bound (largest eigenvalue to list)")
        return float(parse_rational(b)) if isinstance(b, str) else float(b)

    def grid_spec(self) -> GridSpec:
        g = self.solver["grid"]
        return GridSpec(tuple(g.get("re", (-2, 2, 0.5))), tuple(g.get("im", (-2, 2, 0.5))),
                        bool(g.get("real_only", False)))

    # -- serialization -----------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "sigma": self.sigma,
            "eta": complex_pair(self.eta),
            "theta": self.theta,
            "group": self.group,
            "lead": self.lead,
            "solver": self.solver,
            "nodal": self.nodal,
            "seed": self.seed,
        }

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def groups_table(box: BoxDomain, bound: float) -> list[dict]:
    return [
        {"index": i, "rational": str(g.rational), "eigenvalue": g.eigenvalue,
         "multiplicity": g.multiplicity, "modes": [list(m) for m in g.modes]}
        for i, g in enumerate(enumerate_groups(box, bound), start=1)
    ]
