import itertools
import math

import numpy as np
import pytest

from gridforge.code_switch import same_lattice
from gridforge.errors import InvalidArgument, NotACode
from gridforge.lattice import (
    CATALOG_NAMES,
    build,
    catalog,
    enumerate_points,
    lll_reduce,
    packing_report,
    pauli_class,
    shortest_length,
)
from gridforge.symplectic import omega

R2 = math.sqrt(2)

# (min stabilizer length, min Pauli length), independent closed forms.
LENGTHS = {
    "square": (R2, 1 / R2),
    "hexagonal": (2 / 3**0.25, 1 / 3**0.25),
    "tesseract": (2**0.25, 2**-0.25),
    "d4": (R2, 1.0),
}


def brute_points(S, radius, box=3):
    pts = []
    for a in itertools.product(range(-box, box + 1), repeat=S.shape[0]):
        v = np.array(a) @ S
        if np.linalg.norm(v) <= radius:
            pts.append(v)
    return pts


@pytest.mark.parametrize("name", sorted(LENGTHS))
def test_table_lengths(name):
    lat, _ = catalog(name)
    rep = packing_report(lat)
    stab, pauli = LENGTHS[name]
    assert rep.min_stab_len == pytest.approx(stab, abs=1e-9)
    assert rep.min_pauli_len == pytest.approx(pauli, abs=1e-9)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_catalog_invariants(name):
    lat, frame = catalog(name)
    assert np.array_equal(lat.A, np.rint(lat.A))
    assert round(abs(np.linalg.det(lat.A))) == lat.d**2
    cross = lat.S @ omega(lat.m) @ lat.S_dual.T
    assert np.max(np.abs(cross - np.rint(cross))) < 1e-9
    if frame.L0 is not None:
        for p in frame.L0:
            assert lat.in_dual(p) and not lat.in_lattice(p)
            assert lat.in_lattice(2 * p)
        x0, y0, z0 = frame.L0
        assert pauli_class(lat, frame, x0 + z0) == "Y"


def test_qubit_catalog_codes_have_det_four():
    for name in CATALOG_NAMES:
        lat, _ = catalog(name)
        if lat.d == 2:
            assert round(np.linalg.det(lat.A)) == 4


@pytest.mark.parametrize("S,d", [(R2 * np.eye(2), 2), (np.eye(2), 1)])
def test_build_dimension(S, d):
    assert build(S).d == d


def test_build_tesseract_dimension():
    lat, _ = catalog("tesseract")
    assert build(lat.S).d == 2


def test_build_rejects_non_integral():
    with pytest.raises(NotACode):
        build(np.diag([1.0, 1.3]))


def test_build_rejects_bad_shape():
    with pytest.raises(InvalidArgument):
        build(np.eye(3))


def test_catalog_unknown_name():
    with pytest.raises(InvalidArgument):
        catalog("leech")


def test_enumerate_square_radius():
    lat, _ = catalog("square")
    pts = enumerate_points(lat, 1.5)
    assert len(pts) == 5 == len(brute_points(lat.S, 1.5))


def test_enumerate_below_minimum_is_origin():
    lat, _ = catalog("hexagonal")
    pts = enumerate_points(lat, 0.5)
    assert len(pts) == 1 and not pts[0].any()


def test_d4_dual_kissing_number():
    lat, _ = catalog("d4")
    pts = enumerate_points(lat, 1.0 + 1e-9, dual=True)
    assert len(pts) == 25
    assert len(brute_points(lat.S_dual, 1.0 + 1e-9)) == 25


def test_pauli_class_tesseract_examples():
    lat, frame = catalog("tesseract")
    S = lat.S
    assert pauli_class(lat, frame, (S[0] + S[2]) / 2) == "X"
    assert pauli_class(lat, frame, frame.rep("X") + frame.rep("Z")) == "Y"
    assert pauli_class(lat, frame, S[0]) == "I"
    assert pauli_class(lat, frame, S[0] / 3) is None


def test_pauli_class_periodic(rng):
    lat, frame = catalog("d4")
    for label in "XYZ":
        for _ in range(5):
            lam = rng.integers(-3, 4, size=4) @ lat.S
            assert pauli_class(lat, frame, frame.rep(label) + lam) == label


def test_dual_of_qunaught_is_itself():
    lat, _ = catalog("d4_qunaught")
    assert same_lattice(build(lat.S_dual).S, lat.S)


def test_scaling_laws():
    lat, _ = catalog("tesseract")
    for a in (2, 3):
        scaled = build(math.sqrt(a) * lat.S)
        assert np.array_equal(scaled.A, a * lat.A)
        assert np.linalg.det(math.sqrt(a) * lat.S) == pytest.approx(a ** (2 * lat.m / 2) * np.linalg.det(lat.S))
        assert round(np.linalg.det(scaled.A)) == a ** (2 * lat.m) * round(np.linalg.det(lat.A))


def test_correctable_radius_decreases_with_dimension():
    # Hypercubic family sqrt(d) Z^2 at fixed shape.
    radii = [packing_report(build(math.sqrt(d) * np.eye(2))).max_correctable_radius for d in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(radii, radii[1:]))


def test_gaussian_error_estimate_limits():
    rep = packing_report(catalog("square")[0])
    assert rep.gaussian_error_estimate(0.0) == 0.0
    assert rep.gaussian_error_estimate(math.inf) == 1.0
    assert 0 < rep.gaussian_error_estimate(0.3) < 1


def test_lll_recovers_short_basis(rng):
    S = R2 * np.eye(2)
    U = np.array([[7, 3], [2, 1]])  # det 1
    R, S_red = lll_reduce(U @ S)
    assert abs(round(np.linalg.det(R))) == 1
    assert np.allclose(sorted(np.linalg.norm(S_red, axis=1)), [R2, R2])


def test_shortest_length_qunaught_pauli_free():
    lat, _ = catalog("qunaught")
    assert shortest_length(lat) == pytest.approx(1.0)
    assert shortest_length(lat, dual=True) == pytest.approx(1.0)
