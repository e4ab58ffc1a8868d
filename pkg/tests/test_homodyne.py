import math

import numpy as np
import pytest

from gridforge.errors import InvalidArgument
from gridforge.homodyne import (
    NoiseModel,
    classify_residual,
    db_from_sigma,
    decode_batch,
    run_trials,
    sample_errors,
    sigma_from_db,
    syndrome_and_correct,
)
from gridforge.lattice import catalog


@pytest.fixture(scope="module")
def square():
    return catalog("square")


def test_db_round_trip():
    for db in (0.0, 10.0, 12.5):
        assert db_from_sigma(sigma_from_db(db)) == pytest.approx(db)
    assert sigma_from_db(10 * math.log10(0.5 / 0.04)) == pytest.approx(0.2)


def test_zero_error(square):
    out = syndrome_and_correct(square[0], np.zeros(2))
    assert not out.syndrome.any() and not out.correction.any()


def test_logical_representative_is_invisible(square):
    lat, frame = square
    x0 = np.array([1 / math.sqrt(2), 0.0])
    out = syndrome_and_correct(lat, x0)
    assert np.allclose(out.syndrome, 0, atol=1e-12)
    assert np.allclose(out.correction, 0, atol=1e-12)
    res = classify_residual(lat, frame, x0, out.correction)
    assert res.residual_class == "X" and res.success is False


def test_stabilizers_have_zero_syndrome(rng):
    lat, frame = catalog("d4")
    for _ in range(5):
        lam = rng.integers(-2, 3, size=4) @ lat.S
        out = syndrome_and_correct(lat, lam)
        assert np.allclose(out.syndrome, 0, atol=1e-9)
        assert classify_residual(lat, frame, lam, out.correction).residual_class == "I"


def test_small_errors_corrected(square, rng):
    lat, frame = square
    for _ in range(200):
        e = rng.standard_normal(2)
        e *= rng.uniform(0, 1 / math.sqrt(8)) / np.linalg.norm(e)
        out = syndrome_and_correct(lat, e)
        assert classify_residual(lat, frame, e, out.correction).success


def test_translation_covariance(rng):
    lat, frame = catalog("tesseract")
    for _ in range(10):
        e = rng.uniform(-0.5, 0.5, size=4)
        lam = rng.integers(-2, 3, size=4) @ lat.S
        a = classify_residual(lat, frame, e, syndrome_and_correct(lat, e).correction)
        b = classify_residual(lat, frame, e + lam, syndrome_and_correct(lat, e + lam).correction)
        assert a.residual_class == b.residual_class


def test_square_success_is_voronoi_box(square):
    lat, _ = square
    axis = np.linspace(-0.7, 0.7, 100) + 1e-4  # avoid points exactly on the box edge
    E = np.array([(q, p) for q in axis for p in axis])
    half = 1 / (2 * math.sqrt(2))
    box = (np.abs(E[:, 0]) < half) & (np.abs(E[:, 1]) < half)
    assert np.array_equal(decode_batch(lat, E), box)


def test_sampled_variance(square):
    lat, _ = square
    noise = NoiseModel(0.3)
    E = sample_errors(lat, noise, 100_000, np.random.default_rng(3))
    sq = np.sum(E**2, axis=1)
    assert abs(sq.mean() - lat.m * noise.sigma**2) < 3 * sq.std() / math.sqrt(len(sq))


def test_vanishing_noise(square):
    assert run_trials(square[0], NoiseModel(1e-6), 5000, seed=1).p_logical == 0.0


def test_monotone_in_sigma(square):
    lat, _ = square
    ps = [run_trials(lat, NoiseModel.from_db(db), 20000, seed=2) for db in (16, 13, 10, 7)]
    for a, b in zip(ps, ps[1:]):
        assert b.p_logical >= a.p_logical - 3 * max(a.stderr, b.stderr)


def test_tesseract_beats_square_at_twelve_db():
    noise = NoiseModel.from_db(12.0)
    sq = run_trials(catalog("square")[0], noise, 100_000, seed=0)
    te = run_trials(catalog("tesseract")[0], noise, 100_000, seed=0)
    assert sq.p_logical - te.p_logical > 5 * math.hypot(sq.stderr, te.stderr)


def test_noisy_ancilla_ratio_at_fifteen_db():
    noise = NoiseModel.from_db(15.0, noisy_ancilla=True)
    sq = run_trials(catalog("square")[0], noise, 100_000, seed=0)
    te = run_trials(catalog("tesseract")[0], noise, 100_000, seed=0)
    assert 3 <= sq.p_logical / te.p_logical <= 30


def test_trials_reproducible(square):
    a = run_trials(square[0], NoiseModel.from_db(8), 9000, seed=11)
    b = run_trials(square[0], NoiseModel.from_db(8), 9000, seed=11)
    assert a == b


def test_validation(square):
    with pytest.raises(InvalidArgument):
        NoiseModel(-1.0)
    with pytest.raises(InvalidArgument):
        run_trials(square[0], NoiseModel(0.1), 0)
    with pytest.raises(InvalidArgument):
        syndrome_and_correct(square[0], np.array([np.nan, 0.0]))
