import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

import cjsr
from cjsr.cli import main, reverify_leaf
from cjsr.system import loads_system

FIX = Path(cjsr.__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def machine(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "machine")
    return code, json.loads(out)


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


ACYCLIC = {
    "vertices": [{"id": "a", "dim": 1}, {"id": "b", "dim": 2}],
    "edges": [{"id": "e", "from": "a", "to": "b", "label": "E", "matrix": [[1.0], [2.0]]}],
}


def test_jsr_example2(capsys):
    code, out, _ = run(capsys, "jsr", FIX / "example2.json")
    assert code == 0
    assert "1.456845796" in out and "certified" in out


def test_jsr_acyclic(tmp_path, capsys):
    code, rep = machine(capsys, "jsr", _write(tmp_path, "a.json", ACYCLIC))
    assert code == 0
    assert rep["result"]["rho"] == 0.0
    assert all(leaf["status"] == "acyclic" for leaf in rep["tree"]["children"])


def test_jsr_cap_gives_bracket(capsys):
    code, out, _ = run(capsys, "jsr", FIX / "example2.json", "--max-iter", "1")
    assert code == 2
    assert "bracket only" in out


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "jsr", tmp_path / "nope.json")
    assert code == 1 and "error" in err


def test_schema_error(capsys, tmp_path):
    bad = dict(ACYCLIC, extra=1)
    code, _, err = run(capsys, "jsr", _write(tmp_path, "b.json", bad))
    assert code == 1 and "extra" in err


def test_bad_arguments(capsys):
    assert main(["jsr"]) != 0
    capsys.readouterr()


def test_machine_report_reverifies(capsys):
    code, rep = machine(capsys, "jsr", FIX / "example3.json")
    assert code == 0
    tree = rep["tree"]
    assert tree["type"] == "leaf" and tree["status"] == "converged"
    assert reverify_leaf(tree) <= 1 + 1e-10
    assert len(rep["input_sha256"]) == 64
    assert rep["config"]["tol"] == 1e-10 and rep["config"]["max_cycle_len"] == 10
    assert "wall" not in json.dumps(rep)


def test_out_flag(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, printed, _ = run(capsys, "jsr", FIX / "example3.json", "--out", out, "--format", "machine")
    assert code == 0 and printed == ""
    assert json.loads(out.read_text())["result"]["status"] == "converged"


def test_candidate_override(capsys):
    cyc = "A2,A4,A4,A3,A4"
    code, rep = machine(capsys, "jsr", FIX / "example2_unconstrained.json", "--candidate", cyc, "--prune")
    assert code == 0
    leaf = rep["tree"]
    assert leaf["candidate"]["cycle"] == cyc.split(",")
    assert leaf["vertex_counts"] == {"L": 7}


def test_reducible_decomposition(tmp_path, capsys):
    doc = {
        "vertices": [{"id": "v", "dim": 2}],
        "edges": [
            {"id": "a", "from": "v", "to": "v", "label": "A", "matrix": [[1.0, 2.0], [0.0, 0.5]]},
            {"id": "b", "from": "v", "to": "v", "label": "B", "matrix": [[0.3, -1.0], [0.0, 1.5]]},
        ],
    }
    code, rep = machine(capsys, "jsr", _write(tmp_path, "r.json", doc))
    assert code == 0
    assert rep["tree"]["type"] == "factorization"
    assert rep["result"]["rho"] == pytest.approx(1.5, abs=1e-12)


def test_compile_round_trip(tmp_path, capsys):
    c = _write(tmp_path, "c.json", {"matrices": {"1": [[1, 1], [0, 1]], "2": [[1, 0], [1, 1]]}, "forbidden_words": ["121"]})
    out = tmp_path / "s.json"
    assert main(["compile", str(c), "--out", str(out)]) == 0
    s = loads_system(out.read_text())
    assert len(s.vertices) == 4 and len(s.edges) == 7


def test_analyze(capsys):
    code, rep = machine(capsys, "analyze", FIX / "example2.json")
    assert code == 0
    comp = rep["components"][0]
    assert comp["invariant_family_dims"] is None
    assert comp["candidate"]["length"] == 7
    assert rep["identified_vertices"] == 3


def test_lsr_command(tmp_path, capsys):
    doc = {
        "vertices": [{"id": "v", "dim": 1}],
        "edges": [
            {"id": "a", "from": "v", "to": "v", "label": "A", "matrix": [[2.0]]},
            {"id": "b", "from": "v", "to": "v", "label": "B", "matrix": [[0.5]]},
        ],
    }
    code, rep = machine(capsys, "lsr", _write(tmp_path, "l.json", doc))
    assert code == 0
    assert rep["verdict"]["status"] == "stabilizable"
    assert rep["components"][0]["rho_lower"] == pytest.approx(0.5)
    assert rep["components"][0]["certificate"]["v"][0]["kind"] == "co_plus"


def test_lsr_acyclic_reports_inf(tmp_path, capsys):
    code, out, _ = run(capsys, "lsr", _write(tmp_path, "a.json", ACYCLIC), "--format", "machine")
    assert code == 0
    assert '"inf"' in out
    assert json.loads(out)["verdict"]["status"] == "not_stabilizable"


def test_barabanov_command(capsys):
    code, rep = machine(capsys, "barabanov", FIX / "example2.json")
    assert code == 0
    assert rep["invariance_residual"] <= 1e-8
    assert rep["multinorm"]["L1"][0]["kind"] == "dual_absco"


def test_barabanov_needs_strong_connectivity(tmp_path, capsys):
    code, _, err = run(capsys, "barabanov", _write(tmp_path, "a.json", ACYCLIC))
    assert code == 1 and "strongly connected" in err


def test_bdf_command(capsys):
    code, out, _ = run(capsys, "bdf", "--steps", "3", "--theta-min", "1.5", "--theta-max", "1.7", "--theta-step", "0.01")
    assert code == 0
    assert "crossing" in out and "complex leading eigenvalue" in out
    code, rep = machine(capsys, "bdf", "--steps", "4", "--theta-min", "1.25", "--theta-max", "1.31", "--theta-step", "0.002")
    assert rep["crossing"] == pytest.approx(1.2807, abs=2e-3)


def test_thread_env_validation(monkeypatch, capsys):
    monkeypatch.setenv("CJSR_THREADS", "zero")
    code, _, err = run(capsys, "jsr", FIX / "example3.json")
    assert code == 1 and "CJSR_THREADS" in err


def test_console_script(tmp_path):
    env = dict(os.environ, CJSR_THREADS="2")
    res = subprocess.run(
        [sys.executable, "-m", "cjsr.cli", "jsr", str(FIX / "example3.json"), "--format", "machine"],
        capture_output=True,
        text=True,
        env=env,
    )
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["result"]["rho"] == pytest.approx(1.515717, abs=1e-6)
