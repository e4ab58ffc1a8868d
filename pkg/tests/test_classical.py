import math

import numpy as np
import pytest

from gridforge.classical import (
    BOUNDARY,
    FlowConfig,
    SmearConfig,
    ancilla_decay_error_prob,
    classify_batch,
    classify_error,
    error_map_grid,
    flow_relax,
    hessian_rates,
    isthmus_waypoints,
    sigma_from_epsilon,
    smeared_error_prob,
    wrap,
    zigzag_path,
)
from gridforge.errors import InvalidArgument
from gridforge.lattice import catalog, pauli_class

L2 = 2 * math.pi
ETAS = [k / 100 for k in range(1, 100) if k != 50]


@pytest.fixture(scope="module")
def square():
    return catalog("square")


@pytest.fixture(scope="module")
def tesseract():
    return catalog("tesseract")


@pytest.fixture(scope="module")
def d4():
    return catalog("d4")


def test_wrap_range():
    z = np.array([-0.5, 0.5, 1.25, -3.75, 0.0])
    assert np.allclose(wrap(z), [-0.5, -0.5, 0.25, 0.25, 0.0])


def test_sigma_from_epsilon_closed_form():
    assert sigma_from_epsilon(0.1) == pytest.approx(math.sqrt(math.tanh(math.asinh(0.2) / 2)))
    with pytest.raises(InvalidArgument):
        sigma_from_epsilon(0.0)


def test_flow_fixed_points(square):
    lat, frame = square
    assert np.array_equal(flow_relax(lat, np.zeros(2)), np.zeros(2))
    assert pauli_class(lat, frame, flow_relax(lat, lat.S[0])) == "I"


def test_dual_points_are_fixed(d4, rng):
    lat, _ = d4
    for _ in range(5):
        v = rng.integers(-2, 3, size=4) @ lat.S_dual
        assert np.allclose(flow_relax(lat, v), v, atol=1e-6)


def test_square_labels(square):
    lat, frame = square
    assert classify_error(lat, frame, lat.S[0] / 2) == "X"
    assert classify_error(lat, frame, 0.6 * lat.S[0]) == "X"
    assert classify_error(lat, frame, 0.2 * lat.S[0]) == "I"


def test_classification_periodic(square, rng):
    lat, frame = square
    for _ in range(10):
        e = rng.uniform(-0.6, 0.6, size=2)
        lam = rng.integers(-2, 3, size=2) @ lat.S
        assert classify_error(lat, frame, e + lam) == classify_error(lat, frame, e)


def test_tesseract_isthmus(tesseract):
    lat, frame = tesseract
    for j in range(4):
        labels = classify_batch(lat, frame, np.outer(ETAS, lat.S[j]))
        assert set(labels) == {"I"}


def test_d4_direct_path_crosses_logical(d4):
    lat, frame = d4
    assert classify_error(lat, frame, 0.6 * lat.S[2]) not in ("I", BOUNDARY)


def test_zero_error_smeared(square):
    lat, _ = square
    assert smeared_error_prob(lat, np.zeros(2), SmearConfig(0.02, mc_samples=4000)).estimate == 0.0


def _crossings(P, etas):
    out = []
    for k in range(len(P) - 1):
        if (P[k] - 0.5) * (P[k + 1] - 0.5) < 0:
            out.append(etas[k] + (0.5 - P[k]) * (etas[k + 1] - etas[k]) / (P[k + 1] - P[k]))
    return out


def test_square_transition_points(square):
    lat, _ = square
    etas = np.linspace(0, 1, 41)
    for eps in (0.02, 0.1):
        cfg = SmearConfig(eps, mc_samples=20000)
        P = [smeared_error_prob(lat, e * lat.S[0], cfg).estimate for e in etas]
        assert P[0] < 0.02
        assert P[20] > 0.95
        xs = _crossings(P, etas)
        assert len(xs) == 2
        assert xs[0] == pytest.approx(0.25, abs=0.03)
        assert xs[1] == pytest.approx(0.75, abs=0.03)


def test_transition_sharpens_as_epsilon_drops(square):
    lat, _ = square
    widths = []
    for eps in (0.1, 0.05, 0.02):
        cfg = SmearConfig(eps, mc_samples=8000)
        widths.append(smeared_error_prob(lat, 0.3 * lat.S[0], cfg).estimate)
    assert widths[0] < widths[1] < widths[2]


def test_smeared_continuity(square):
    lat, _ = square
    cfg = SmearConfig(0.1, mc_samples=20000)
    a = smeared_error_prob(lat, 0.3 * lat.S[0], cfg).estimate
    b = smeared_error_prob(lat, 0.305 * lat.S[0], cfg).estimate
    assert abs(a - b) < 0.05


def test_worst_case_half_generator(tesseract, d4):
    cfg = SmearConfig(0.05, mc_samples=20000)
    assert smeared_error_prob(tesseract[0], tesseract[0].S[0] / 2, cfg).estimate == pytest.approx(0.5, abs=0.03)
    assert smeared_error_prob(d4[0], d4[0].S[0] / 2, cfg).estimate == pytest.approx(0.75, abs=0.03)


def test_square_decay_error_is_half(square):
    lat, _ = square
    for eps in (0.02, 0.1, 0.2):
        est = ancilla_decay_error_prob(lat, 0, SmearConfig(eps))
        assert est.estimate == pytest.approx(0.5, abs=0.02)


def test_seed_reproducible(square):
    lat, _ = square
    cfg = SmearConfig(0.1, mc_samples=2000, seed=7)
    a = smeared_error_prob(lat, 0.3 * lat.S[0], cfg)
    b = smeared_error_prob(lat, 0.3 * lat.S[0], cfg)
    assert a == b


def test_error_map_square_topology(square):
    lat, frame = square
    uv, labels = error_map_grid(lat, frame, (0, 1), 8)
    assert len(labels) == 64 and uv.shape == (64, 2)
    assert set(labels) <= {"I", "X", "Y", "Z", BOUNDARY}
    uv, labels = error_map_grid(lat, frame, (0, 1), 9, span=(0.0, 1.0))
    grid = dict(zip(map(tuple, np.round(uv, 6)), labels))
    assert grid[(0.0, 0.0)] == grid[(1.0, 0.0)] == grid[(0.0, 1.0)] == grid[(1.0, 1.0)] == "I"
    assert grid[(0.5, 0.0)] == "X"
    assert grid[(0.0, 0.5)] == "Z"
    assert grid[(0.5, 0.5)] == "Y"


def test_error_map_tesseract_isthmus(tesseract):
    lat, frame = tesseract
    uv, labels = error_map_grid(lat, frame, (0, 2), 21, span=(0.0, 1.0))
    grid = dict(zip(map(tuple, np.round(uv, 6)), labels))
    assert all(grid[(round(u, 6), 0.0)] == "I" for u in np.linspace(0, 1, 21) if abs(u - 0.5) > 1e-9)
    assert grid[(0.5, 0.5)] == "X"


def test_error_map_rejects_small_resolution(square):
    with pytest.raises(InvalidArgument):
        error_map_grid(*square, (0, 1), 4)


def test_hessian_rates():
    assert np.allclose(hessian_rates(catalog("square")[0]).eigenvalues, [2 * L2, 2 * L2])
    d4 = hessian_rates(catalog("d4")[0])
    assert d4.min == pytest.approx(L2 * (2 - math.sqrt(3)), abs=1e-9)
    tess = hessian_rates(catalog("tesseract")[0])
    assert tess.min == pytest.approx(L2 * math.sqrt(2), abs=1e-9)
    assert tess.note


def test_isthmus_waypoints(tesseract, d4):
    assert isthmus_waypoints(*tesseract, 0) == []
    lat, frame = d4
    w = isthmus_waypoints(lat, frame, 2)
    assert w
    path = zigzag_path(lat.S[2], w)
    seg = np.vstack([np.linspace(path[k], path[k + 1], 50) for k in range(len(path) - 1)])
    labels = classify_batch(lat, frame, seg[1:-1])
    assert labels.count("I") >= len(labels) - 2


def test_flow_config_validation():
    with pytest.raises(InvalidArgument):
        FlowConfig(step=0.0)
    with pytest.raises(InvalidArgument):
        SmearConfig(0.1, mc_samples=0)
