import json
import math
import subprocess
import sys

import pytest

from weakstat.cli import main
from weakstat.dsl import reference_source

SQRT2 = math.sqrt(2)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    assert "Traceback" not in err
    return code, out, err


def test_bell_json(capsys):
    code, out, _ = run(capsys, "bell", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["chsh"] == 2.8284271247
    assert set(rep) == {"scenario", "events", "conditional_states", "chsh"}
    values = [e["value"] for e in rep["events"][:4]]
    assert values == [0.6035533906, 0.6035533906, -0.1035533906, -0.1035533906]
    assert [e["quasi"] for e in rep["events"][:4]] == [False, False, True, True]


def test_exact_double_slit_text(capsys):
    code, out, _ = run(capsys, "exact", "double-slit")
    assert code == 0
    assert "R[path1]  probability +0.5000000000" in out
    assert "[+1.0000000000+0.0000000000i, +0.5000000000+0.0000000000i]" in out
    assert "[+0.5000000000+0.0000000000i, +0.0000000000+0.0000000000i]" in out
    assert "eigenvalues [-0.2071067812, +1.2071067812]  quasi" in out


def test_exact_ignores_shots(capsys):
    a = run(capsys, "exact", "double-slit", "--format", "json")
    b = run(capsys, "exact", "double-slit", "--format", "json", "--shots", "5")
    assert a == b


def test_tomo_reports_negative_eigenvalue(capsys):
    code, out, _ = run(
        capsys, "tomo", "double-slit", "--shots", "10000000", "--epsilon", "0.05", "--seed", "42", "--format", "json"
    )
    assert code == 0
    rep = json.loads(out)
    assert (rep["epsilon"], rep["shots"], rep["seed"]) == (0.05, 10_000_000, 42)
    r1 = next(s for s in rep["conditional_states"] if s["label"] == "R[path1]")
    assert r1["min_eigenvalue"] < 0 and r1["quasi"]
    assert abs(r1["min_eigenvalue"] - (1 - SQRT2) / 2) < 5 * max(r1["stderr"][0]) + 0.25 * 0.05
    assert all(v > 0 for row in r1["stderr"] for v in row)


def test_sample_csv(capsys):
    code, out, _ = run(capsys, "sample", "double-slit", "--shots", "100000", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "label,value,stderr"
    assert lines[1].startswith("<X>,")
    assert any(l.startswith("rho[0][1].re,") for l in lines)
    assert any(l.startswith("rho.eig[0],") for l in lines)


def test_bell_csv_has_chsh_row(capsys):
    _, out, _ = run(capsys, "bell", "--format", "csv")
    assert out.splitlines()[-1] == "chsh,2.8284271247,"


def test_dsl_file(capsys, tmp_path):
    path = tmp_path / "ds.ws"
    path.write_text(reference_source("double_slit"))
    code, out, err = run(capsys, "exact", str(path), "--format", "json")
    assert code == 0
    assert json.loads(out)["scenario"] == "ds"
    assert f"{path}:3:13: warning: ket normalized" in err


def test_dsl_diagnostics_exit_one(capsys, tmp_path):
    path = tmp_path / "bad.ws"
    path.write_text("dim 2\nstate psi = ket[1, 1]/\n")
    code, out, err = run(capsys, "exact", str(path))
    assert code == 1 and out == ""
    assert f"{path}:2:22: error:" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "double-slit"],
        ["tomo", "double-slit"],
        ["exact", "no-such-scenario"],
        ["exact", "double-slit", "--format", "xml"],
        ["sample", "double-slit", "--shots", "0"],
        ["sample", "double-slit", "--shots", "10", "--epsilon", "-1"],
        ["sample", "double-slit", "--shots", "10", "--seed", "-3"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert "usage:" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["bell", "double-slit"],
        ["sample", "double-slit", "--shots", "10", "--epsilon", "1.5"],
        ["exact", "entangled:d=12"],
    ],
)
def test_domain_errors_exit_one(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == ""
    assert err.startswith("weakstat: error:")


def test_seed_environment(capsys, monkeypatch):
    base = ["sample", "double-slit", "--shots", "20000", "--format", "csv"]
    explicit = run(capsys, *base, "--seed", "5")[1]
    default = run(capsys, *base)[1]
    monkeypatch.setenv("WEAKSTAT_SEED", "5")
    assert run(capsys, *base)[1] == explicit
    assert run(capsys, *base, "--seed", "0")[1] == default
    monkeypatch.setenv("WEAKSTAT_SEED", "abc")
    assert run(capsys, *base)[0] == 2


def test_output_file(capsys, tmp_path):
    dest = tmp_path / "report.json"
    code, out, _ = run(capsys, "bell", "--format", "json", "-o", str(dest))
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["chsh"] == 2.8284271247


def test_check_command(capsys):
    code, out, _ = run(capsys, "check")
    assert code == 0
    assert out.splitlines()[-1] == "9/9 checks passed"
    assert all(l.startswith("PASS") for l in out.splitlines()[:-1])


def test_shards_do_not_change_report(capsys):
    base = ["tomo", "double-slit", "--shots", "200000", "--format", "json"]
    assert run(capsys, *base, "--shards", "1")[1] == run(capsys, *base, "--shards", "4")[1]


def test_console_script_is_byte_deterministic():
    cmd = [sys.executable, "-m", "weakstat.cli", "tomo", "entangled:d=2", "--shots", "300000", "--seed", "3"]
    a = subprocess.run(cmd, capture_output=True, check=True)
    b = subprocess.run(cmd, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout
