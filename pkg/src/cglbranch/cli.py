"""Command-line front end.

    cglbranch --config run.json --out results --cmd seeds

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 quadrature guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, complex_pair, groups_table, parse_complex, parse_rational
from .contour import grid_csv, nodal_set, to_svg
from .coupling import check_hypothesis_H4
from .disk import detect_continuum
from .errors import ConfigError, ConvergenceError, DomainError, HypothesisError, QuadratureGuardError
from .galerkin import GalerkinSpace
from .lyapunov_schmidt import default_eps_max, make_sample, solve_reduced, trace_branch
from .reduced import AlphaVector, SeedSolution, enumerate_branches
from .stability import instability_verdict, params_from_branch

log = logging.getLogger("cglbranch")

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_QUADRATURE = 0, 2, 3, 4
COMMANDS = ("spectrum", "seeds", "branch", "stability", "nodal", "h4")


# -- output helpers --------------------------------------------------------------

def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path, obj) -> None:
    atomic_write(path, dump_json(obj))


def manifest(cfg: RunConfig, cmd: str, outputs: list[str], extra: dict | None = None) -> dict:
    """Deterministic record of a run; wall-clock timing is only logged."""
    m = {"tool": "cglbranch", "version": __version__, "command": cmd, "config": cfg.to_dict(),
         "input_hash": cfg.digest(), "outputs": sorted(outputs)}
    if extra:
        m.update(extra)
    return m


# -- seeds -------------------------------------------------------------------------

def _enumerate(cfg: RunConfig):
    kw = {}
    if cfg.solver.get("nodes"):
        kw = {"method": "quadrature", "nodes": int(cfg.solver["nodes"])}
    return enumerate_branches(cfg.sigma, cfg.eigen_group(), grid_spec=cfg.grid_spec(),
                              order=cfg.solver.get("order"), **kw)


def compute_seeds(cfg: RunConfig) -> list[SeedSolution]:
    """Seeds in the order listed by the ``seeds`` command (ids are list positions)."""
    if cfg.eigen_group().p == 1:
        return [SeedSolution(AlphaVector(1, ()), 0.0, 1.0, True, True)]
    return _enumerate(cfg).seeds


def cmd_spectrum(cfg: RunConfig, out: Path, args) -> dict:
    box = cfg.box()
    table = groups_table(box, cfg.spectrum_bound())
    write_json(out / "spectrum.json", {"groups": table})
    for row in table:
        print(f"{row['index']:4d}  {row['eigenvalue']:.12g}  ({row['rational']})  x{row['multiplicity']}")
    return {"outputs": ["spectrum.json"]}


def cmd_seeds(cfg: RunConfig, out: Path, args) -> dict:
    if cfg.domain["type"] == "disk":
        rep = detect_continuum(cfg.sigma, tol=float(cfg.solver["continuum_tol"]),
                               radial=int(cfg.solver["radial_nodes"]),
                               angular=int(cfg.solver["angular_nodes"]), seed=cfg.seed)
        payload = {"real_count": None, "continuum": rep.to_json(), "seeds": []}
        write_json(out / "seeds.json", payload)
        print(f"continuum detected: {rep.continuum_detected}; {rep.conclusion}")
        return {"outputs": ["seeds.json"]}
    group = cfg.eigen_group()
    if group.p == 1:
        seeds = compute_seeds(cfg)
        payload = {"group": _group_info(group), "real_count": 1, "partition": {"1": 1},
                   "complex_count": 0, "continuum": None, "notes": [],
                   "seeds": [dict(s.to_record(), id=0) for s in seeds]}
    else:
        enum = _enumerate(cfg)
        payload = {
            "group": _group_info(group),
            "real_count": enum.real_count,
            "partition": {str(k): v for k, v in enum.partition().items()},
            "complex_count": len(enum.complex_seeds),
            "continuum": enum.continuum,
            "notes": enum.notes,
            "seeds": [dict(s.to_record(), id=i) for i, s in enumerate(enum.seeds)],
        }
    write_json(out / "seeds.json", payload)
    print(f"real seeds: {payload['real_count']}  partition: {payload['partition']}  "
          f"complex: {payload['complex_count']}")
    return {"outputs": ["seeds.json"]}


def _group_info(group) -> dict:
    return {"rational": str(group.rational), "eigenvalue": group.eigenvalue,
            "modes": [list(m) for m in group.modes]}


# -- branch ------------------------------------------------------------------------

def _space(cfg: RunConfig) -> GalerkinSpace:
    group = cfg.eigen_group()
    cutoff = max(int(cfg.solver["cutoff"]), group.max_frequency)
    return GalerkinSpace(group, cutoff, cfg.sigma)


def _select_seed(cfg: RunConfig, seed_id: int) -> SeedSolution:
    seeds = compute_seeds(cfg)
    if not 0 <= seed_id < len(seeds):
        raise ConfigError(f"seed id {seed_id} out of range 0..{len(seeds) - 1}")
    return seeds[seed_id]


def branch_csv(samples, n_alpha: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["eps", "lambda_re", "lambda_im"]
    for j in range(n_alpha):
        head += [f"alpha{j + 1}_re", f"alpha{j + 1}_im"]
    w.writerow(head + ["pde_residual", "y_norm"])
    for s in samples:
        row = [s.eps, s.lam.real, s.lam.imag]
        for a in s.state.alpha.alpha:
            row += [complex(a).real, complex(a).imag]
        w.writerow([f"{v:.17g}" for v in row + [s.pde_residual, s.y_norm]])
    return buf.getvalue()


def read_branch_csv(path: Path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read branch file {path}: {exc}") from exc
    if not rows:
        raise ConfigError(f"branch file {path} has no rows")
    return rows


def cmd_branch(cfg: RunConfig, out: Path, args) -> dict:
    if cfg.domain["type"] == "disk":
        raise ConfigError("branch tracing needs a box or interval domain")
    space = _space(cfg)
    seed = _select_seed(cfg, args.seed_id)
    eps_max = args.eps_max if args.eps_max is not None else cfg.solver.get("eps_max")
    eps_max = float(eps_max) if eps_max is not None else default_eps_max(space)
    if not eps_max > 0:
        raise ConfigError("eps-max must be > 0")
    samples = trace_branch(seed, eps_max, int(cfg.solver["eps_steps"]), space, cfg.eta)
    name = f"branch_{args.seed_id}.csv"
    atomic_write(out / name, branch_csv(samples, len(seed.alpha.alpha)))
    print(f"seed {args.seed_id}: {len(samples)} samples up to eps={eps_max:.6g}, "
          f"lambda={samples[-1].lam:.12g}")
    return {"outputs": [name], "extra": {"seed": seed.to_record(), "eps_max": eps_max}}


# -- stability ---------------------------------------------------------------------

def cmd_stability(cfg: RunConfig, out: Path, args) -> dict:
    if cfg.domain["type"] == "disk":
        raise ConfigError("stability needs a box or interval domain")
    path = out / f"branch_{args.seed_id}.csv"
    rows = read_branch_csv(path)
    row = min(rows, key=lambda r: r["eps"])
    space = _space(cfg)
    seed = _select_seed(cfg, args.seed_id)
    n = len(seed.alpha.alpha)
    alpha = [complex(row[f"alpha{j + 1}_re"], row[f"alpha{j + 1}_im"]) for j in range(n)]
    lam = complex(row["lambda_re"], row["lambda_im"])
    state = solve_reduced(row["eps"], seed, lam, space, cfg.eta, alpha_guess=alpha)
    sample = make_sample(state, space)
    params = params_from_branch(state.lam, cfg.eta, cfg.theta, cfg.sigma)
    details: dict = {}
    report = instability_verdict(sample, params, space, perturbation=float(cfg.solver["perturbation"]),
                                 seed=cfg.seed, steps=int(cfg.solver["monodromy_steps"]), details=details)
    report["params"] = {"theta": params.theta, "gamma": params.gamma, "k": params.k,
                        "omega": params.omega, "scale": params.scale, "period": params.period
                        if math.isfinite(params.period) else None}
    report["norm_note"] = "perturbation sizes are operator norms on the Galerkin truncation"
    outputs = ["stability.json"]
    if "monodromy" in details:
        mu = details["monodromy"].multipliers
        report["multipliers"] = [complex_pair(z) for z in mu[:16]]
        traj = details["trajectory"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "modal_norm", "sup_norm", "orbit_distance"])
        for r in zip(traj.times, traj.modal_norm, traj.sup_norm, traj.orbit_distance):
            w.writerow([f"{v:.17g}" for v in r])
        atomic_write(out / "trajectory.csv", buf.getvalue())
        outputs.append("trajectory.csv")
    write_json(out / "stability.json", report)
    print(f"verdict: {report['verdict']}")
    return {"outputs": outputs}


# -- nodal -------------------------------------------------------------------------

def cmd_nodal(cfg: RunConfig, out: Path, args) -> dict:
    if cfg.domain["type"] != "box":
        raise ConfigError("nodal plots need a 2-D or 3-D box")
    box = cfg.box()
    group = cfg.eigen_group()
    raw = cfg.nodal.get("coefficients")
    if raw is None:
        raise ConfigError("nodal.coefficients is required")
    coeffs = [parse_complex(c) for c in raw]
    if len(coeffs) != group.p:
        raise ConfigError(f"need {group.p} coefficients, got {len(coeffs)}")
    plane = [0, 1]
    fixed: dict[int, float] = {}
    if box.dim == 3:
        sl = cfg.nodal.get("slice")
        if not sl:
            raise ConfigError("3-D boxes need nodal.slice = {axis, fraction}")
        axis = int(sl["axis"]) - 1
        if axis not in (0, 1, 2):
            raise ConfigError("slice axis must be 1, 2 or 3")
        fixed[axis] = float(parse_rational(sl.get("fraction", "1/2"))) * box.lengths[axis]
        plane = [a for a in range(3) if a != axis]
    elif box.dim != 2:
        raise ConfigError("nodal plots need a 2-D or 3-D box")
    if args.resolution < 8:
        raise ConfigError("resolution must be >= 8")
    L = box.lengths
    c = box.norm_constant()

    def field(X, Y):
        total = np.zeros_like(X, dtype=complex)
        for a, mode in zip(coeffs, group.modes):
            term = np.full_like(X, c * a, dtype=complex)
            for ax, k in enumerate(mode):
                if ax in fixed:
                    term = term * math.sin(k * math.pi * fixed[ax] / L[ax])
                else:
                    coord = X if ax == plane[0] else Y
                    term = term * np.sin(k * math.pi * coord / L[ax])
            total += term
        return total.real

    lengths = (float(L[plane[0]]), float(L[plane[1]]))
    ns = nodal_set(field, lengths, args.resolution)
    atomic_write(out / "nodal.svg", to_svg(ns, lengths))
    atomic_write(out / "nodal_grid.csv", grid_csv(ns))
    print(f"{ns.n_curves} nodal curve(s)")
    return {"outputs": ["nodal.svg", "nodal_grid.csv"], "extra": {"curves": ns.n_curves}}


# -- H4 ----------------------------------------------------------------------------

def cmd_h4(cfg: RunConfig, out: Path, args) -> dict:
    group = cfg.eigen_group()
    rep = check_hypothesis_H4(group)
    payload = {
        "group": _group_info(group),
        "holds": rep.holds,
        "violation_count": len(rep.violations),
        "violations": [{"modes": [list(m) for m in v[:4]], "value": float(v[4])} for v in rep.violations[:20]],
    }
    write_json(out / "h4.json", payload)
    print(f"distinct-mode quartic integrals vanish: {rep.holds} ({len(rep.violations)} violations)")
    return {"outputs": ["h4.json"]}


HANDLERS = {"spectrum": cmd_spectrum, "seeds": cmd_seeds, "branch": cmd_branch,
            "stability": cmd_stability, "nodal": cmd_nodal, "h4": cmd_h4}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cglbranch", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--cmd", required=True, choices=COMMANDS)
    p.add_argument("--seed-id", type=int, default=0, help="seed index from the seeds listing")
    p.add_argument("--eps-max", type=float, default=None)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        cfg = RunConfig.load(args.config)
        t0 = time.perf_counter()
        res = HANDLERS[args.cmd](cfg, out, args)
        elapsed = time.perf_counter() - t0
        write_json(out / f"manifest_{args.cmd}.json", manifest(cfg, args.cmd, res["outputs"], res.get("extra")))
        print(f"{args.cmd} finished in {elapsed:.2f} s", file=sys.stderr)
        return EXIT_OK
    except (ConfigError, DomainError, HypothesisError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureGuardError as exc:
        print(f"quadrature guard: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except ConvergenceError as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
