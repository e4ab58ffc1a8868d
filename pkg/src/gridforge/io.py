"""Lattice JSON files and plain-text stabilizer codes."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .code_switch import QubitStabilizerCode
from .errors import InvalidArgument
from .lattice import GkpLattice, LogicalFrame, build, trivial_frame

__all__ = ["lattice_to_dict", "lattice_from_dict", "write_lattice", "read_lattice", "read_stabilizer_code", "write_stabilizer_code"]

PathLike = Union[str, Path]


def lattice_to_dict(lat: GkpLattice, frame: LogicalFrame) -> dict:
    # Python floats serialize with their shortest round-trip repr, so a
    # write/read cycle reproduces every entry bit for bit.
    return {
        "name": lat.name,
        "m": lat.m,
        "S": [[float(x) for x in row] for row in np.asarray(lat.S)],
        "L0": None if frame.L0 is None else [[float(x) for x in row] for row in frame.L0],
        "mu": [int(b) for b in frame.mu],
        "upsilon": [int(b) for b in frame.upsilon],
    }


def _bits(values, n: int, key: str) -> tuple[int, ...]:
    if len(values) != n or any(v not in (0, 1) for v in values):
        raise InvalidArgument(f"{key} must be {n} bits")
    return tuple(int(v) for v in values)


def lattice_from_dict(data: dict, tol: float = 1e-9) -> tuple[GkpLattice, LogicalFrame]:
    try:
        S = np.array(data["S"], dtype=float)
        m = int(data["m"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgument(f"malformed lattice record: {exc}") from None
    if S.shape != (2 * m, 2 * m):
        raise InvalidArgument(f"S must be {2 * m}x{2 * m} for m = {m}")
    lat = build(S, name=str(data.get("name", "custom")), tol=tol)
    L0 = data.get("L0")
    frame = trivial_frame(lat, None if L0 is None else np.array(L0, dtype=float))
    if frame.L0 is not None and frame.L0.shape != (3, 2 * m):
        raise InvalidArgument("L0 must hold three representatives (X, Y, Z)")
    mu = _bits(data.get("mu", [0] * (2 * m)), 2 * m, "mu")
    upsilon = _bits(data.get("upsilon", [0, 0, 0]), 3, "upsilon")
    return lat, frame.with_gauge(mu, upsilon)


def write_lattice(path: PathLike, lat: GkpLattice, frame: LogicalFrame) -> None:
    Path(path).write_text(json.dumps(lattice_to_dict(lat, frame), indent=2) + "\n", encoding="utf-8")


def read_lattice(path: PathLike, tol: float = 1e-9) -> tuple[GkpLattice, LogicalFrame]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path}: not valid JSON ({exc})") from None
    return lattice_from_dict(data, tol)


def read_stabilizer_code(path: PathLike) -> QubitStabilizerCode:
    return QubitStabilizerCode.parse(Path(path).read_text(encoding="utf-8"))


def write_stabilizer_code(path: PathLike, code: QubitStabilizerCode) -> None:
    Path(path).write_text(code.to_text(), encoding="utf-8")
