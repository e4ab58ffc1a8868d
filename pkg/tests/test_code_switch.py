import math

import numpy as np
import pytest

from gridforge.code_switch import (
    MergeSpec,
    QubitStabilizerCode,
    binary_matrix,
    concatenate,
    concatenate_multimode,
    lll_reduce,
    merge,
    required_presplit_gauges,
    same_lattice,
    split,
    sublattice,
)
from gridforge.errors import InvalidArgument, InvalidSplit
from gridforge.lattice import build, catalog, packing_report, pauli_class

from conftest import direct_sum

Q = QubitStabilizerCode
FIVE_QUBIT = Q(("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"))
FOUR_TWO = Q(("XXXX", "ZZZZ", "XXII"))  # [[4,1,2]]


def test_parse_and_text_round_trip():
    code = Q.parse("# five-qubit code\nXZZXI\nIXZZX\n\nXIXZZ\nZXIXZ\n")
    assert code == FIVE_QUBIT
    assert Q.parse(code.to_text()) == code
    assert (code.n, code.k) == (5, 1)


def test_rejects_anticommuting_generators():
    with pytest.raises(InvalidArgument):
        Q(("XI", "ZI"))


def test_rejects_dependent_generators():
    with pytest.raises(InvalidArgument):
        Q(("ZZI", "IZZ", "ZIZ"))


def test_binary_matrix_layout():
    assert binary_matrix(Q(("XZ",))).tolist() == [[1, 0, 0, 1]]
    assert binary_matrix(Q(("YI",))).tolist() == [[1, 1, 0, 0]]


def test_sublattice_of_scaled():
    S = catalog("hexagonal")[0].S
    assert sublattice(2 * S, S)
    assert not same_lattice(2 * S, S)
    assert not sublattice(S, 2 * S)


def test_diamond_pair_inside_d4():
    dia, _ = catalog("diamond")
    d4, _ = catalog("d4")
    assert sublattice(direct_sum(dia.S, dia.S), d4.S)


def test_diamond_repetition_y_is_d4():
    dia, _ = catalog("diamond")
    d4, _ = catalog("d4")
    out = concatenate(dia, Q.repetition(2, "Y"))
    assert same_lattice(out.lattice.S, d4.S)
    lengths = sorted(np.linalg.norm(p) for p in out.frame.L0)
    assert np.allclose(lengths, [1, 1, 1], atol=1e-9)


def test_diamond_repetition_y_gives_d2m_family():
    dia, _ = catalog("diamond")
    d6, _ = catalog("d2m", m=3)
    assert same_lattice(concatenate(dia, Q.repetition(3, "Y")).lattice.S, d6.S)


def test_rectangular_repetition_z_is_tesseract():
    rect, _ = catalog("rectangular_qubit")
    tess, _ = catalog("tesseract")
    assert same_lattice(concatenate(rect, Q.repetition(2, "Z")).lattice.S, tess.S)


def test_diamond_four_qubit_state_is_e8():
    dia, _ = catalog("diamond")
    e8, _ = catalog("e8", a=1)
    out = concatenate(dia, Q(("YYII", "IYYI", "IIYY", "ZZZZ"))).lattice
    assert out.d == 1
    assert same_lattice(out.S, e8.S)


def test_dimension_law():
    dia, _ = catalog("diamond")
    for code in (Q.repetition(3, "Z"), FIVE_QUBIT, Q(("XXXX", "ZZZZ"))):
        assert concatenate(dia, code).lattice.d == 2**code.k


def test_dual_formula_matches_lattice_dual():
    dia, _ = catalog("diamond")
    out = concatenate(dia, FIVE_QUBIT, reduce=False)
    assert same_lattice(out.S_dual_formula, out.lattice.S_dual)


@pytest.mark.parametrize("code,distance", [(Q.repetition(3, "Z"), 1), (FOUR_TWO, 2), (FIVE_QUBIT, 3)])
def test_hexagonal_length_law(code, distance):
    hexa, _ = catalog("hexagonal")
    base = packing_report(hexa).min_pauli_len
    lat = concatenate(hexa, code).lattice
    assert packing_report(lat).min_pauli_len == pytest.approx(math.sqrt(distance) * base, abs=1e-9)


def test_four_mode_code():
    fm, frame = catalog("four_mode")
    for p in frame.L0:
        assert np.linalg.norm(p) == pytest.approx(2**0.25, abs=1e-9)
    tess, tframe = catalog("tesseract")
    lat, _ = concatenate_multimode(tess, tframe, Q.repetition(2, "Y"))
    assert same_lattice(lat.S, fm.S)


def test_lll_shortens_five_qubit_basis():
    dia, _ = catalog("diamond")
    raw = concatenate(dia, FIVE_QUBIT, reduce=False)
    S_raw = raw.T @ raw.L
    R, S_red = lll_reduce(S_raw)
    assert abs(round(np.linalg.det(R))) == 1
    assert np.linalg.norm(S_red, axis=1).max() <= np.linalg.norm(S_raw, axis=1).max() + 1e-12
    assert same_lattice(S_red, S_raw)


def test_lll_keeps_reduced_basis():
    S = catalog("hexagonal")[0].S
    R, S_red = lll_reduce(S)
    assert np.allclose(sorted(np.linalg.norm(S_red, axis=1)), sorted(np.linalg.norm(S, axis=1)))
    assert np.allclose(np.abs(R) @ np.ones(2), np.ones(2))


def test_required_presplit_gauge_for_d4():
    d4, _ = catalog("d4")
    dia, _ = catalog("diamond")
    assert (0, 1, 1, 1) in required_presplit_gauges(d4, dia, dia)


def test_split_d4_correspondence():
    d4, frame = catalog("d4")
    dia, dframe = catalog("diamond")
    res = split(d4, frame.with_gauge((0, 1, 1, 1)), (dia, dframe), (dia, dframe))
    labels = {}
    for P in "XYZ":
        p = frame.rep(P)
        labels[P] = (pauli_class(res.lat_A, res.frame_A, p[:2]), pauli_class(res.lat_B, res.frame_B, p[2:]))
    # The diamond frame names the s1/2 class X; D4's X is that class on both modes.
    assert labels["X"] == ("X", "X")
    assert labels["Y"] == ("Z", "X")
    assert labels["Z"] == ("Y", "I")


def test_split_rejects_bad_partition():
    d4, frame = catalog("d4")
    sq, sframe = catalog("square")
    with pytest.raises(InvalidSplit):
        split(d4, frame, (sq, sframe), (sq, sframe))


def test_merge_two_diamonds_gives_d4():
    dia, dframe = catalog("diamond")
    d4, _ = catalog("d4")
    y = dframe.rep("Y")
    lat, _ = merge((dia, dframe), (dia, dframe), MergeSpec(np.concatenate([y, y])), d4.S)
    assert lat.d == 2 and same_lattice(lat.S, d4.S)


def test_split_then_merge_round_trip():
    d4, frame = catalog("d4")
    dia, dframe = catalog("diamond")
    res = split(d4, frame.with_gauge((0, 1, 1, 1)), (dia, dframe), (dia, dframe))
    lam = np.concatenate([res.frame_A.rep("Y"), res.frame_B.rep("Y")])
    lat, _ = merge((res.lat_A, res.frame_A), (res.lat_B, res.frame_B), MergeSpec(lam, 1), d4.S)
    assert same_lattice(lat.S, d4.S)


def test_merge_outcome_changes_only_measured_bit():
    dia, dframe = catalog("diamond")
    y = dframe.rep("Y")
    lam = np.concatenate([y, y])
    S = direct_sum(dia.S, dia.S)
    S[-1] = lam
    plus = merge((dia, dframe), (dia, dframe), MergeSpec(lam, 1), S)[1].mu
    minus = merge((dia, dframe), (dia, dframe), MergeSpec(lam, -1), S)[1].mu
    assert [a != b for a, b in zip(plus, minus)] == [False, False, False, True]


def test_merge_two_square_codes_halves_dimension():
    sq, frame = catalog("square")
    x = frame.rep("X")
    lam = np.concatenate([x, x])
    S = direct_sum(sq.S, sq.S)
    assert build(S).d == 4
    S[0] = lam
    lat, _ = merge((sq, frame), (sq, frame), MergeSpec(lam), S, replace_row=0)
    assert lat.d == 2


def test_merge_rejects_stabilizer_vector():
    sq, frame = catalog("square")
    lam = np.concatenate([sq.S[0], sq.S[0]])
    with pytest.raises(InvalidArgument):
        merge((sq, frame), (sq, frame), MergeSpec(lam), direct_sum(sq.S, sq.S))


def test_merge_spec_outcome_validated():
    with pytest.raises(InvalidArgument):
        MergeSpec(np.zeros(4), 0)
