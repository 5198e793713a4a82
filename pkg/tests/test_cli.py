import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from isonorm.cli import main

HERE = Path(__file__).resolve().parent
SAMPLES = HERE.parent / "samples"
GOLDEN = HERE / "golden"

CASES = {
    "validate": "validate g.json",
    "validate_csv": "validate --csv g.json",
    "norms_reduced": "norms reduced g.json f.json",
    "norms_exotic": "norms exotic --at u0 g.json h.json",
    "norms_exotic_probe": "norms exotic --at u0 --probe 20 g.json h.json",
    "norms_tmred": "norms tmred --bisections bisections.json g.json h.json",
    "norms_tmred_relation": "norms tmred --bisections relation_bisections.json relation.json relation_h.json",
    "norms_morita": "norms morita --units u0@11,u1@11 linking.json",
    "tower_norms_z": "tower norms ztower.json zsum.json",
    "tower_exotic_z_csv": "tower exotic --radius 6 --csv ztower.json zsum.json",
    "tower_exotic_f2_r6": "tower exotic --radius 6 f2tower.json gensum.json",
    "tower_norms_sl2_small": "tower norms --levels 2 sl2tower.json sl2elem.json",
    "tower_truncate": "tower truncate --levels 2 ztower.json",
    "states_assemble": "states assemble g.json state.json",
    "states_extract": "states extract g.json functional.json",
    "states_check": "states check-factorization f2tower.json trace.json",
    "certify_g": "certify g.json",
    "certify_partial": "certify partial.json",
}

EXIT = {"norms_tmred_relation": 1}


def run(argv, cwd=SAMPLES, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if monkeypatch is not None:
        monkeypatch.chdir(cwd)
    code = main(argv.split() if isinstance(argv, str) else argv, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_output(name, monkeypatch):
    code, out, err = run(CASES[name], monkeypatch=monkeypatch)
    assert code == EXIT.get(name, 0), err
    assert out == (GOLDEN / f"{name}.txt").read_text(encoding="utf-8")


def test_documented_output_lines(monkeypatch):
    assert run("validate g.json", monkeypatch=monkeypatch)[1].splitlines()[0] == \
        "ok: 4 elements, 2 units"
    assert "e-norm = 2.000000000" in run("norms exotic --at u0 g.json h.json",
                                         monkeypatch=monkeypatch)[1].splitlines()


@pytest.mark.slow
def test_f2_verdict_full_radius(monkeypatch, tmp_path):
    fig = tmp_path / "f2.png"
    code, out, _ = run(f"tower exotic f2tower.json gensum.json --figure {fig}",
                       monkeypatch=monkeypatch)
    assert code == 0
    assert "e ≥ 4.000000, r ≤ 3.464102 → EXOTIC" in out.splitlines()
    assert fig.stat().st_size > 0


def test_determinism_and_figures(monkeypatch, tmp_path):
    outs, figs = [], []
    for k in range(2):
        fig = tmp_path / f"z{k}.png"
        code, out, _ = run(f"tower exotic --radius 4 ztower.json zsum.json --figure {fig}",
                           monkeypatch=monkeypatch)
        assert code == 0
        outs.append(out)
        figs.append(fig.read_bytes())
    assert outs[0] == outs[1] and figs[0] == figs[1]
    assert figs[0][:8] == b"\x89PNG\r\n\x1a\n"
    fig = tmp_path / "n.svg"
    assert run(f"tower norms ztower.json zsum.json --figure {fig}", monkeypatch=monkeypatch)[0] == 0
    assert fig.read_text().lstrip().startswith("<?xml")


def test_seed_and_jobs_do_not_change_exact_reports(monkeypatch):
    base = run("norms reduced g.json f.json", monkeypatch=monkeypatch)[1]
    assert run("norms reduced --jobs 3 g.json f.json", monkeypatch=monkeypatch)[1] == base
    a = run("tower norms --jobs 4 ztower.json zsum.json", monkeypatch=monkeypatch)[1]
    assert a == (GOLDEN / "tower_norms_z.txt").read_text(encoding="utf-8")
    s1 = run("certify --seed 0x10 g.json", monkeypatch=monkeypatch)[1]
    s2 = run("certify --seed 16 g.json", monkeypatch=monkeypatch)[1]
    assert s1 == s2


@pytest.mark.parametrize("argv", [
    "validate missing.json",
    "bogus",
    "norms",
    "norms exotic g.json h.json",
    "norms exotic --at zz g.json h.json",
    "norms exotic --at u0 g.json f.json",
    "norms reduced --tol -1 g.json f.json",
    "norms reduced --jobs 0 g.json f.json",
    "norms morita --units u0@11 g.json",
    "tower truncate --levels 99 ztower.json",
    "tower norms ztower.json gensum.json",
    "states assemble g.json h.json",
    "norms reduced state.json f.json",
])
def test_input_errors_exit_2(argv, monkeypatch, capsys):
    code, out, err = run(argv, monkeypatch=monkeypatch)
    assert code == 2
    assert out == ""


def test_check_failures_exit_1(monkeypatch, tmp_path):
    G = json.loads((SAMPLES / "g.json").read_text())
    G["compose"] = [t for t in G["compose"] if t != ["1.u0", "1.u0", "u0"]] + [["1.u0", "1.u0", "1.u0"]]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(G))
    code, out, _ = run(["validate", str(bad)], monkeypatch=monkeypatch)
    assert code == 1 and out.startswith("FAIL") and "witness" in out
    # u1 has grade 0, so U_{1.u0} is not inside one grading fibre
    fam = {"x": "u0", "bisections": {"u0": ["u0", "u1"], "1.u0": ["1.u0", "u1"]}}
    badfam = tmp_path / "fam.json"
    badfam.write_text(json.dumps(fam))
    code, out, _ = run(["norms", "tmred", "--bisections", str(badfam), "g.json", "h.json"],
                       monkeypatch=monkeypatch)
    assert code == 1 and "FAIL hypothesis (1)" in out and "witness (" in out
    tr = json.loads((SAMPLES / "trace.json").read_text())
    tr["mu"] = {"1": [0.5, 0.0, 0.0, 0.0], "inf": 0.5}
    badtr = tmp_path / "trace.json"
    badtr.write_text(json.dumps(tr))
    code, out, _ = run(["states", "check-factorization", "f2tower.json", str(badtr)],
                       monkeypatch=monkeypatch)
    assert code == 1 and "witness (1, 0)" in out


def test_certify_reports_failure(monkeypatch, tmp_path):
    code, out, _ = run("certify --bisections relation_bisections.json relation.json",
                       monkeypatch=monkeypatch)
    assert code == 1
    assert any(line.startswith("FAIL graded certificate") for line in out.splitlines())
    assert out.splitlines()[-1].startswith("FAIL certify:")
    code, out, _ = run("certify relation.json", monkeypatch=monkeypatch)
    assert code == 0 and "SKIP" in out


def test_outputs_written(monkeypatch, tmp_path):
    out_g = tmp_path / "trunc.json"
    assert run(f"tower truncate --levels 1 ztower.json --out {out_g}", monkeypatch=monkeypatch)[0] == 0
    assert run(["validate", str(out_g)], monkeypatch=monkeypatch)[1].startswith("ok: 4 elements")
    vals = tmp_path / "vals.json"
    assert run(f"states assemble g.json state.json --out {vals}", monkeypatch=monkeypatch)[0] == 0
    st = tmp_path / "st.json"
    assert run(["states", "extract", "g.json", str(vals), "--out", str(st)],
               monkeypatch=monkeypatch)[0] == 0
    assert json.loads(st.read_text())["mu"] == {"u0": 0.5, "u1": 0.5}


def test_module_entry_point_and_help():
    res = subprocess.run([sys.executable, "-m", "isonorm", "validate", "g.json"], cwd=SAMPLES,
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("ok: 4 elements, 2 units")
    res = subprocess.run([sys.executable, "-m", "isonorm", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "certify" in res.stdout
