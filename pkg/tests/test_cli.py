import io
import json

import numpy as np
import pytest

from centroaffine import io as cio
from centroaffine.cli import ERROR_CODES, main
from centroaffine.numerics import CurvatureField, CurveSamples, Grid


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    rc = main(list(argv), out=out, err=err)
    return rc, out.getvalue(), err.getvalue()


def error_of(err):
    return json.loads(err.strip().splitlines()[-1])


def test_error_codes_distinct():
    assert len(set(ERROR_CODES.values())) == len(ERROR_CODES)
    assert 0 not in ERROR_CODES.values() and 1 not in ERROR_CODES.values()


def test_omega_example():
    rc, out, _ = run("omega", "--n", "2", "--order", "1")
    assert rc == 0
    doc = json.loads(out)
    assert doc["omega"] == ["D", "1/2*u0*D - 1/4*u0^(1)"]
    assert doc["traceless"] is True


def test_omega_text_and_general():
    rc, out, _ = run("omega", "--n", "3", "--order", "0", "--general", "--format", "text")
    assert rc == 0 and out == "Omega_0 = D + 1/3*u2\n"


def test_flow_examples():
    rc, out, _ = run("flow", "--n", "2", "--j", "3", "--traceless")
    assert rc == 0
    doc = json.loads(out)
    assert doc["rhs"] == ["3/2*u0*u0^(1) + 1/4*u0^(3)", "0"]
    assert doc["operator"]["1"] == "D"
    rc, out, _ = run("flow", "--n", "2", "--j", "3")
    doc = json.loads(out)
    assert doc["traceless"] is False and doc["rhs"][1] == "0"
    assert "u1" in doc["rhs"][0]


def test_flow_rejects_trivial_index():
    rc, _, err = run("flow", "--n", "2", "--j", "4")
    assert rc == ERROR_CODES["invalid_input"]
    assert error_of(err)["error"] == "invalid_input"


def test_usage_errors():
    rc, _, err = run("flow", "--n", "2")
    assert rc == ERROR_CODES["usage"]
    assert error_of(err)["error"] == "usage"
    rc, _, _ = run("evolve", "--n", "2", "--j", "3", "--u0", "x.csv", "--dt", "-1")
    assert rc == ERROR_CODES["usage"]


def test_missing_file():
    rc, _, err = run("curvature", "--input", "/nonexistent/curve.csv")
    assert rc == ERROR_CODES["io_error"]


def test_check_suite_omega():
    rc, out, err = run("check", "--suite", "omega", "--n", "3", "--order", "2")
    assert rc == 0
    doc = json.loads(out)
    assert doc["passed"]
    assert all(c["residual"] in ("0", 0) or c["passed"] for c in doc["checks"])
    assert "PASS" in err and "FAIL" not in err


def circle_csv(path, n=64):
    g = Grid(0.0, 2 * np.pi, n)
    cio.write_curve(path, CurveSamples(g, np.stack([np.cos(g.x), np.sin(g.x)], axis=1)))


def test_curvature_command(tmp_path):
    src = tmp_path / "circle.csv"
    circle_csv(src)
    rc, out, _ = run("curvature", "--input", str(src))
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "x,u0,u1"
    vals = np.array([[float(v) for v in r.split(",")] for r in lines[1:]])
    assert np.allclose(vals[:, 1], 1.0, atol=1e-10)
    dest = tmp_path / "u.csv"
    rc, out, _ = run("curvature", "--input", str(src), "--output", str(dest))
    assert rc == 0 and json.loads(out)["n"] == 2 and dest.exists()


def test_singular_curve(tmp_path):
    g = Grid(0.0, 2 * np.pi, 32)
    src = tmp_path / "line.csv"
    cio.write_curve(src, CurveSamples(g, np.stack([np.cos(g.x), np.cos(g.x)], axis=1)))
    rc, _, err = run("curvature", "--input", str(src))
    assert rc == ERROR_CODES["singular_frame"]
    assert "index" in error_of(err)["details"]


def write_u0(path, n=64):
    g = Grid(0.0, 2 * np.pi, n)
    cio.write_field(path, CurvatureField(g, np.stack([np.cos(g.x), np.zeros(n)])))


def test_evolve_deterministic(tmp_path):
    src = tmp_path / "u0.csv"
    write_u0(src)
    args = ["evolve", "--n", "2", "--j", "3", "--u0", str(src), "--dt", "1e-3", "--steps", "100",
            "--save-every", "10", "--lambda", "0.3", "1.0"]
    rc1, out1, _ = run(*args, "--output", str(tmp_path / "a"))
    rc2, out2, _ = run(*args, "--output", str(tmp_path / "b"))
    assert rc1 == rc2 == 0
    assert out1 == out2
    for name in ("trajectory.csv", "manifest.json", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    doc = json.loads(out1)
    assert doc["manifest"]["dt"] == 1e-3 and doc["manifest"]["format_version"] == 1
    rep = doc["report"]
    assert rep["snapshots"] == 11
    assert rep["isospectral_drift"]["max"] < 1e-6
    assert rep["zero_curvature_residual"] < 1e-2


def test_evolve_component_mismatch(tmp_path):
    src = tmp_path / "u0.csv"
    write_u0(src)
    rc, _, _ = run("evolve", "--n", "3", "--j", "1", "--u0", str(src), "--steps", "1")
    assert rc == ERROR_CODES["invalid_input"]


def test_evolve_blow_up(tmp_path):
    # the n = 2, j = 1 flow is a translation; a tiny threshold forces the abort
    src = tmp_path / "u0.csv"
    write_u0(src)
    rc, _, err = run("evolve", "--n", "2", "--j", "1", "--u0", str(src), "--steps", "5",
                     "--save-every", "1", "--blowup", "0.5")
    assert rc == ERROR_CODES["blow_up"]
    assert error_of(err)["details"]["step"] >= 1


def test_help_exits_cleanly(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["evolve", "--help"])
    assert exc.value.code == 0
    assert "default 1e-4" in capsys.readouterr().out
