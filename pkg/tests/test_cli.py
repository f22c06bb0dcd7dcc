import csv
import io
import json
import subprocess
import sys

import pytest

from lowerframe.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_analyze_orthonormal(tmp_path):
    cert = tmp_path / "c.json"
    code, out, _ = run("analyze", "--gen", "orthonormal", "--dim", "4", "--out", str(cert))
    assert code == 0
    assert "min_eig     5.65685424949" in out
    doc = json.loads(cert.read_text())
    assert doc["min_frame_eig"] == pytest.approx(4 * 2**0.5)
    assert doc["config"]["source"]["generator"] == "orthonormal"
    assert doc["passed"] is True


def test_analyze_rank_deficient(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"field": "real", "dim": 2, "vectors": [[1, 0], [2, 0]]}))
    code, _, err = run("analyze", "--input", str(bad))
    assert code == 1
    assert "TotalityError" in err and "tail-chain" in err


def test_analyze_quantized_neumann(tmp_path):
    cert = tmp_path / "c.json"
    code, out, _ = run("analyze", "--gen", "random_gaussian", "--dim", "5", "--mode", "quantized",
                       "--method", "neumann", "--out", str(cert))
    assert code == 0
    doc = json.loads(cert.read_text())
    assert 0 < doc["T_norm"] <= 0.5


def test_analyze_csv_projection(tmp_path):
    p = tmp_path / "l.csv"
    assert run("analyze", "--gen", "orthonormal", "--dim", "2", "--format", "csv", "--out", str(p))[0] == 0
    rows = list(csv.DictReader(p.open()))
    assert [r["k"] for r in rows] == ["1", "2"]
    assert float(rows[0]["log2"]) == pytest.approx(2.5)


def test_verify_round_trip(tmp_path):
    cert = tmp_path / "c.json"
    fam = tmp_path / "f.json"
    assert run("generate", "--gen", "shifted_sum", "--dim", "5", "--out", str(fam))[0] == 0
    assert run("analyze", "--input", str(fam), "--out", str(cert))[0] == 0
    code, out, _ = run("verify", "--certificate", str(cert), "--input", str(fam))
    assert code == 0 and "PASS lower_frame.eigen" in out


def test_verify_scaled_lambda_fails(tmp_path):
    cert = tmp_path / "c.json"
    run("analyze", "--gen", "orthonormal", "--dim", "3", "--out", str(cert))
    doc = json.loads(cert.read_text())
    for row in doc["lambda"]:
        row["value"] *= 1e-6
    cert.write_text(json.dumps(doc))
    code, out, _ = run("verify", "--certificate", str(cert), "--gen", "orthonormal", "--dim", "3")
    assert code == 2 and "FAIL lower_frame.eigen" in out


def test_verify_truncated_json(tmp_path):
    cert = tmp_path / "c.json"
    run("analyze", "--gen", "orthonormal", "--dim", "3", "--out", str(cert))
    cert.write_text(cert.read_text()[:50])
    code, _, err = run("verify", "--certificate", str(cert), "--gen", "orthonormal", "--dim", "3")
    assert code == 1 and "invalid JSON" in err


def test_verify_dimension_mismatch(tmp_path):
    cert = tmp_path / "c.json"
    run("analyze", "--gen", "orthonormal", "--dim", "3", "--out", str(cert))
    code, _, err = run("verify", "--certificate", str(cert), "--gen", "orthonormal", "--dim", "4")
    assert code == 1 and "dimension" in err


def test_sweep_rows(tmp_path):
    p = tmp_path / "s.csv"
    code, _, _ = run("sweep", "--gen", "shifted_sum", "--dims", "4,8,16", "--out", str(p))
    assert code == 0
    rows = list(csv.DictReader(p.open()))
    assert len(rows) == 3
    assert all(float(r["min_frame_eig"]) >= 1 for r in rows)
    assert all(r["runtime_s"] == "" for r in rows)


def test_sweep_modes_and_timing(tmp_path):
    p = tmp_path / "s.csv"
    run("sweep", "--gen", "damped_tail", "--dims", "4,8", "--modes", "exact,quantized", "--timing", "--out", str(p))
    rows = list(csv.DictReader(p.open()))
    assert [(r["d"], r["mode"]) for r in rows] == [("4", "exact"), ("4", "quantized"), ("8", "exact"), ("8", "quantized")]
    assert all(float(r["runtime_s"]) >= 0 for r in rows)


def test_sweep_zero_dim():
    code, _, err = run("sweep", "--dims", "0")
    assert code == 1 and "positive" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["analyze"],
        ["analyze", "--gen", "orthonormal"],
        ["analyze", "--gen", "nope", "--dim", "2"],
        ["analyze", "--gen", "orthonormal", "--dim", "2", "--samples", "0"],
        ["analyze", "--input", "/does/not/exist.json"],
        ["generate", "--gen", "random_gaussian", "--dim", "3", "--count", "1"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    code, _, _ = run(*argv)
    assert code == 1


def test_generate_stdout():
    code, out, _ = run("generate", "--gen", "cyclic_spanning", "--dim", "2")
    doc = json.loads(out)
    assert code == 0 and doc["tail"] == "cyclic" and len(doc["vectors"]) == 3


def test_help_documents_csv_columns():
    proc = subprocess.run([sys.executable, "-m", "lowerframe", "sweep", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "min_frame_eig" in proc.stdout and "runtime_s" in proc.stdout


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lowerframe", "analyze", "--gen", "shifted_sum", "--dim", "6"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "checks" in proc.stdout
