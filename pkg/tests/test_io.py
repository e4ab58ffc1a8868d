import json

import numpy as np
import pytest

from gridforge.code_switch import QubitStabilizerCode
from gridforge.errors import ValidationError
from gridforge.io import lattice_from_dict, lattice_to_dict, read_lattice, read_stabilizer_code, write_lattice, write_stabilizer_code
from gridforge.lattice import catalog


@pytest.mark.parametrize("name", ["square", "hexagonal", "d4", "tesseract"])
def test_lattice_round_trip_is_bit_exact(tmp_path, name):
    lat, frame = catalog(name)
    frame = frame.with_gauge(tuple(1 - b for b in frame.mu), frame.upsilon) if name == "square" else frame
    path = tmp_path / f"{name}.json"
    write_lattice(path, lat, frame)
    lat2, frame2 = read_lattice(path)
    assert np.array_equal(np.asarray(lat2.S), np.asarray(lat.S))
    assert frame2.mu == frame.mu and frame2.upsilon == frame.upsilon
    if frame.L0 is not None:
        assert np.array_equal(frame2.L0, frame.L0)
    assert lattice_to_dict(lat2, frame2) == lattice_to_dict(lat, frame)


def test_rejects_malformed_records(tmp_path):
    with pytest.raises(ValidationError):
        lattice_from_dict({"m": 1})
    with pytest.raises(ValidationError):
        lattice_from_dict({"m": 2, "S": [[1.0, 0.0], [0.0, 1.0]]})
    with pytest.raises(ValidationError):
        lattice_from_dict({"m": 1, "S": [[1.0, 0.0], [0.0, 1.0]], "mu": [0, 2]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValidationError):
        read_lattice(bad)


def test_rejects_non_integral_lattice():
    with pytest.raises(ValidationError):
        lattice_from_dict({"m": 1, "S": [[1.0, 0.0], [0.3, 1.7]]})


def test_stabilizer_file_round_trip(tmp_path):
    code = QubitStabilizerCode.parse("# [[4,2,2]]\nXXXX\n\nZZZZ  # both parities\n")
    assert code.generators == ("XXXX", "ZZZZ") and code.k == 2
    path = tmp_path / "code.txt"
    write_stabilizer_code(path, code)
    assert read_stabilizer_code(path).generators == code.generators


def test_stabilizer_file_rejects_anticommuting(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("XI\nZI\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        read_stabilizer_code(path)


def test_json_is_plain(tmp_path):
    lat, frame = catalog("square")
    path = tmp_path / "sq.json"
    write_lattice(path, lat, frame)
    data = json.loads(path.read_text())
    assert data["m"] == 1 and data["mu"] == [0, 0]
