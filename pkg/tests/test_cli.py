import json
import subprocess
import sys

import xml.etree.ElementTree as ET

import pytest

from totcorr.cli import main
from totcorr.states import canonical, random_product_state, save_state
from totcorr.rng import RngState

FAST = ["--opt-restarts", "3"]
SVG = "{http://www.w3.org/2000/svg}"


def run(*args):
    return main([str(a) for a in args])


def test_sweep_writes_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert run("sweep", "--n", 20, "--measures", "qmi,geometric:2", "--seed", 3, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "state_id,seed_hi,seed_lo,qmi,qmi_norm,geometric:2,geometric:2_norm"
    assert len(lines) == 21


def test_sweep_to_stdout(capsys):
    assert run("sweep", "--n", 2, "--measures", "qmi", "--normalize", "none") == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 3
    assert out[1].endswith(",")


def test_sweep_figures(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--n", 10, "--measures", "qmi,geometric:1,pcc", "--out", out, "--figures", *FAST) == 0
    assert (tmp_path / "s_panels.svg").exists()
    assert (tmp_path / "s_qmi_vs_geometric1.svg").exists()
    assert (tmp_path / "s_qmi_vs_pcc.svg").exists()


def test_workers_do_not_change_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--n", 300, "--measures", "qmi,pcc", "--seed", 42, *FAST]
    assert run(*args, "--out", a, "--workers", 1) == 0
    assert run(*args, "--out", b, "--workers", 2) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 4, "measures": ["qmi"], "seed": 9, "normalize": "none"}))
    out = tmp_path / "o.csv"
    assert run("sweep", "--config", cfg, "--out", out) == 0
    assert len(out.read_text().splitlines()) == 5
    assert run("sweep", "--config", cfg, "--n", 2, "--out", out) == 0
    assert len(out.read_text().splitlines()) == 3


@pytest.mark.parametrize(
    "content", ['{"n": 4, "bogus": 1}', '{"n": 4', "[1, 2]"],
)
def test_bad_config_is_validation_error(tmp_path, content, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    assert run("sweep", "--config", cfg) == 2
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [["sweep", "--n", 0], ["sweep", "--measures", "renyi:1"], ["sweep", "--dims", "2,x"],
     ["sweep", "--n", "abc"], ["sweep", "--normalize", "wrong"], ["frobnicate"], ["sweep", "--opt-restarts", 0],
     ["sweep", "--dims", "2,3", "--n", 2, "--measures", "qmi"]],
)
def test_validation_errors_exit_2(args, capsys):
    assert run(*args) == 2


def test_missing_file_is_runtime_error(tmp_path):
    assert run("inspect", tmp_path / "nope.json") == 1
    assert run("render", "--csv", tmp_path / "nope.csv", "--out", tmp_path / "x.svg") == 1


def test_inspect_bell(tmp_path, capsys):
    path = tmp_path / "bell.json"
    save_state(canonical("bell_phi_plus"), path)
    assert run("inspect", path, "--json", *FAST) == 0
    rep = json.loads(capsys.readouterr().out)
    vals = {r["measure"]: r["value"] for r in rep["measures"]}
    assert vals["qmi"] == pytest.approx(2.0, abs=1e-9)
    assert vals["geometric:1"] == pytest.approx(1.5, abs=1e-9)
    assert vals["pcc"] == pytest.approx(3.0, abs=1e-3)
    assert len(vals) == 7


def test_inspect_product_state(tmp_path, capsys):
    path = tmp_path / "p.json"
    save_state(random_product_state((2, 2), RngState(4)), path)
    assert run("inspect", path, "--json", *FAST) == 0
    rep = json.loads(capsys.readouterr().out)
    assert all(abs(r["value"]) <= 1e-6 for r in rep["measures"])


def test_inspect_text_output(tmp_path, capsys):
    path = tmp_path / "bell.json"
    save_state(canonical("bell_phi_plus"), path)
    assert run("inspect", path, "--measures", "qmi,kl", *FAST) == 0
    out = capsys.readouterr().out
    assert "qmi" in out and "bits" in out and "iterations" in out


def test_inspect_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dims": [2, 2], "matrix_re": [1, 0,')
    assert run("inspect", path) == 2
    assert "line 1 column" in capsys.readouterr().err


def test_ordering_and_render_from_csv(tmp_path, capsys):
    csv_path = tmp_path / "s.csv"
    assert run("sweep", "--n", 80, "--measures", "qmi,geometric:2", "--out", csv_path) == 0
    wit = tmp_path / "w.csv"
    assert run("ordering", "--csv", csv_path, "--measures", "geometric:2", "--out", wit, "--limit", 5) == 0
    rows = wit.read_text().splitlines()
    assert rows[0].startswith("measure_a,measure_b,rho_id")
    assert 1 < len(rows) <= 6
    assert "witness pair" in capsys.readouterr().err
    svg = tmp_path / "r.svg"
    assert run("render", "--csv", csv_path, "--measures", "geometric:2", "--out", svg) == 0
    root = ET.parse(svg).getroot()
    group = next(g for g in root.iter(f"{SVG}g") if g.get("id") == "markers")
    assert len(list(group.iter(f"{SVG}use"))) == 80


def test_ordering_missing_measure(tmp_path):
    csv_path = tmp_path / "s.csv"
    assert run("sweep", "--n", 5, "--measures", "qmi", "--out", csv_path) == 0
    assert run("ordering", "--csv", csv_path, "--measures", "pcc") == 2


def test_axioms_subcommand(tmp_path, capsys):
    out = tmp_path / "a.json"
    assert run("axioms", "--measures", "qmi,geometric:2", "--scale", 0.05, "--out", out) == 0
    text = capsys.readouterr().out
    assert "Monotonicity" in text
    data = json.loads(out.read_text())
    assert {"results", "compliance_matrix"} <= set(data)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "totcorr", "sweep", "--n", "1", "--measures", "qmi"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("state_id")
