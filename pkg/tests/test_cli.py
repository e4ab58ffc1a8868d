import csv
import json
import subprocess
import sys

import pytest

from gridforge.cli import EXIT_VALIDATION, run


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_catalog_d4_json(capsys):
    assert run(["catalog", "--name", "d4", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["name"] == "d4" and data["m"] == 2
    assert len(data["S"]) == 4


def test_search_tesseract_gaps(tmp_path):
    assert run(["--out", str(tmp_path), "search", "--family", "tesseract", "--dmax", "20"]) == 0
    rows = {int(r["d"]): int(r["count"]) for r in _rows(tmp_path / "search_tesseract.csv")}
    assert set(rows) == set(range(1, 21))
    assert [d for d, c in rows.items() if c == 0] == [7, 15]


def test_flowmap_grid(tmp_path):
    assert run(["--out", str(tmp_path), "flowmap", "--code", "square", "--plane", "1,2", "--res", "8"]) == 0
    (path,) = tmp_path.glob("*.csv")
    assert len(_rows(path)) == 64
    assert path.with_suffix(".manifest.json").exists()


def test_unknown_flag_is_usage_error(capsys):
    assert run(["--bogus"]) == 64


def test_unknown_code_is_validation_error(capsys):
    assert run(["catalog", "--name", "nonesuch"]) == EXIT_VALIDATION


def test_bad_tol_is_validation_error(capsys):
    assert run(["--tol", "-1", "catalog"]) == EXIT_VALIDATION


def test_reruns_are_byte_identical(tmp_path):
    argv = ["--seed", "7", "homodyne", "--db-range", "10:12:1", "--trials", "3000"]
    assert run(["--out", str(tmp_path / "a")] + argv) == 0
    assert run(["--out", str(tmp_path / "b"), "--threads", "2"] + argv) == 0
    a = (tmp_path / "a" / "homodyne_square.csv").read_bytes()
    b = (tmp_path / "b" / "homodyne_square.csv").read_bytes()
    assert a == b
    assert b"\r" not in a and a.startswith(b"db,p,stderr\n")


def test_manifest_fields(tmp_path):
    assert run(["--out", str(tmp_path), "--seed", "3", "homodyne", "--db-range", "12:12:1", "--trials", "500"]) == 0
    manifest = json.loads((tmp_path / "homodyne_square.manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["code"] == "square"
    assert manifest["target"] and manifest["git"]
    assert manifest["outputs"][0].endswith("homodyne_square.csv")


def test_homodyne_rows(tmp_path):
    assert run(["--out", str(tmp_path), "homodyne", "--db-range", "10:12:1", "--trials", "2000"]) == 0
    rows = _rows(tmp_path / "homodyne_square.csv")
    assert [float(r["db"]) for r in rows] == [10.0, 11.0, 12.0]
    assert all(0 <= float(r["p"]) <= 1 for r in rows)


def test_concat_repetition_matches_d4(capsys):
    assert run(["concat", "--base", "diamond", "--repetition", "2,Y", "--compare", "d4"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["same_lattice_as"] == {"d4": True}


def test_lattice_file_input(tmp_path, capsys):
    assert run(["catalog", "--name", "tesseract", "--json"]) == 0
    path = tmp_path / "t.json"
    path.write_text(capsys.readouterr().out)
    assert run(["analyze", "--lattice", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["min_pauli_length"] == pytest.approx(2**-0.25)


def test_help_documents_globals():
    out = subprocess.run([sys.executable, "-m", "gridforge", "--help"], capture_output=True, text=True, check=True).stdout
    for flag in ("--seed", "--threads", "--out", "--tol", "GRIDFORGE_THREADS"):
        assert flag in out


def test_threads_env_validation(monkeypatch, capsys):
    monkeypatch.setenv("GRIDFORGE_THREADS", "many")
    assert run(["--out", "unused", "search", "--family", "d4", "--dmax", "4"]) == EXIT_VALIDATION
