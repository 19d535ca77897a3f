import json

import pytest

from cglbranch.cli import EXIT_CONFIG, EXIT_OK, main
from cglbranch.config import RunConfig


def write_config(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


SQUARE = {"domain": {"type": "box", "lengths_sq": ["1", "1"], "unit": "pi"}, "sigma": 2, "eta": [1, 0],
          "group": {"index": 2}, "solver": {"bound": 10}}
INTERVAL = {"domain": {"type": "interval"}, "sigma": 2, "eta": [1, 0], "theta": 0.3, "group": {"index": 2},
            "solver": {"cutoff": 12, "eps_steps": 3, "eps_max": 0.02, "monodromy_steps": 1024}}


def run(tmp_path, cfg, cmd, *extra, out="out"):
    return main(["--config", write_config(tmp_path, cfg), "--out", str(tmp_path / out), "--cmd", cmd, *extra])


def load(tmp_path, name, out="out"):
    return json.loads((tmp_path / out / name).read_text())


def test_spectrum(tmp_path):
    assert run(tmp_path, SQUARE, "spectrum") == EXIT_OK
    groups = load(tmp_path, "spectrum.json")["groups"]
    assert [g["rational"] for g in groups] == ["2", "5", "8", "10"]
    assert [g["multiplicity"] for g in groups] == [1, 2, 1, 2]
    assert load(tmp_path, "manifest_spectrum.json")["outputs"] == ["spectrum.json"]


def test_seeds_square(tmp_path):
    assert run(tmp_path, SQUARE, "seeds") == EXIT_OK
    seeds = load(tmp_path, "seeds.json")
    assert seeds["real_count"] == 4 and seeds["complex_count"] == 2
    assert [s["id"] for s in seeds["seeds"]] == list(range(len(seeds["seeds"])))


def test_seeds_disk_reports_continuum(tmp_path):
    cfg = {"domain": {"type": "disk"}, "sigma": 2, "solver": {"radial_nodes": 64, "angular_nodes": 64}}
    assert run(tmp_path, cfg, "seeds") == EXIT_OK
    rep = load(tmp_path, "seeds.json")["continuum"]
    assert rep["continuum_detected"] and rep["C_re"] == pytest.approx(0.246934, abs=1e-6)


def test_branch_and_stability(tmp_path):
    assert run(tmp_path, INTERVAL, "branch") == EXIT_OK
    lines = (tmp_path / "out" / "branch_0.csv").read_text().splitlines()
    assert lines[0].startswith("eps,lambda_re,lambda_im") and len(lines) == 4
    assert run(tmp_path, INTERVAL, "stability") == EXIT_OK
    rep = load(tmp_path, "stability.json")
    assert rep["verdict"] == "unstable"
    assert (tmp_path / "out" / "trajectory.csv").exists()


def test_stability_without_branch_file(tmp_path):
    assert run(tmp_path, INTERVAL, "stability") == EXIT_CONFIG


def test_nodal_square_and_cube_slice(tmp_path):
    cfg = dict(SQUARE, nodal={"coefficients": [1, -1]})
    assert run(tmp_path, cfg, "nodal", "--resolution", "40") == EXIT_OK
    assert "<polyline" in (tmp_path / "out" / "nodal.svg").read_text()
    assert load(tmp_path, "manifest_nodal.json")["curves"] >= 1
    cube = {"domain": {"type": "box", "lengths_sq": [1, 1, 1], "unit": "pi"}, "group": {"index": 2},
            "nodal": {"coefficients": [1, 1, 1], "slice": {"axis": 3, "fraction": "1/3"}}}
    assert run(tmp_path, cube, "nodal", "--resolution", "30", out="cube") == EXIT_OK
    assert run(tmp_path, dict(cube, nodal={"coefficients": [1, 1, 1]}), "nodal", out="bad") == EXIT_CONFIG


def test_nodal_zero_field_is_empty(tmp_path):
    cfg = dict(SQUARE, nodal={"coefficients": [0, 0]})
    assert run(tmp_path, cfg, "nodal", "--resolution", "20") == EXIT_OK
    assert "<polyline" not in (tmp_path / "out" / "nodal.svg").read_text()


def test_h4(tmp_path):
    cfg = dict(SQUARE, group={"rational": "5"})
    assert run(tmp_path, cfg, "h4") == EXIT_OK
    rep = load(tmp_path, "h4.json")
    assert rep["holds"] and rep["violation_count"] == 0


@pytest.mark.parametrize("bad", [
    {"domain": {"type": "torus"}},
    {"domain": {"type": "interval"}, "theta": 2.0},
    {"domain": {"type": "interval"}, "sigma": 0.5},
    {"domain": {"type": "interval"}, "bogus": 1},
    {"domain": {"type": "box", "lengths_sq": [1.5, 1]}},
    {"domain": {"type": "interval"}, "solver": {"grid": {"re": [1, 0, 0.5]}}},
])
def test_bad_config_exits_2(tmp_path, bad):
    assert run(tmp_path, bad, "spectrum") == EXIT_CONFIG


def test_unreadable_config(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad), "--out", str(tmp_path), "--cmd", "seeds"]) == EXIT_CONFIG


def test_reruns_are_byte_identical(tmp_path):
    for out in ("a", "b"):
        assert run(tmp_path, SQUARE, "seeds", out=out) == EXIT_OK
    for name in ("seeds.json", "manifest_seeds.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_round_trip():
    cfg = RunConfig.from_dict(SQUARE)
    again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg and again.digest() == cfg.digest()
