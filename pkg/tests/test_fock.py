import math

import numpy as np
import pytest
from scipy.linalg import expm

from gridforge.errors import InvalidArgument, TruncationError, TruncationWarning, UnsupportedGaussian
from gridforge.fock import (
    FockState,
    OperatorSpec,
    apply,
    apply_translation,
    build_codeword,
    check_leakage,
    damping_channel,
    displacement_matrix,
    epsilon_to_beta,
    expectation_T,
    inject_ancilla_decay,
    kraus_operators,
    logical_expectation,
    quantum_error_prob,
    sbs_round,
    vacuum,
)
from gridforge.lattice import catalog
from gridforge.verify import (
    codespace_fidelity,
    fitted_contraction_rate,
    hadamard_eigenstates,
    mod4_populations,
    predicted_rate,
)

BETA = 0.2
N = 50


@pytest.fixture(scope="module")
def square():
    return catalog("square")


@pytest.fixture(scope="module")
def square_words(square):
    lat, frame = square
    return {w: build_codeword(lat, frame, w, BETA, (N,)) for w in ("+Z", "-Z", "+X")}


def test_vacuum_and_norm():
    v = vacuum((6, 5))
    assert v.norm() == pytest.approx(1.0)
    assert v.amplitudes.shape == (6, 5)
    with pytest.raises(InvalidArgument):
        vacuum((1,))


def test_displacement_matches_dense_exponential():
    big, small = 120, 30
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    alpha = 0.7 - 0.4j
    D = expm(alpha * a.T - np.conj(alpha) * a)[:small, :small]
    assert np.allclose(displacement_matrix(alpha, small), D, atol=1e-10)


def test_codeword_normalized_and_orthogonal(square_words):
    w0, w1 = square_words["+Z"], square_words["-Z"]
    assert w0.norm() == pytest.approx(1.0)
    # finite-energy words are only approximately orthogonal
    assert abs(np.vdot(w0.amplitudes, w1.amplitudes)) < 0.05


def test_hadamard_eigenstates_live_on_mod_four(square):
    plus, minus = hadamard_eigenstates(*square, BETA, (N,))
    assert mod4_populations(plus)[0] > 0.999
    assert mod4_populations(minus)[2] > 0.999


def test_logical_translation_flips_codeword(square, square_words):
    lat, frame = square
    x0 = np.asarray(frame.L0)[0]
    moved = apply_translation(square_words["+Z"], x0)
    assert logical_expectation(square_words["+Z"], lat, frame, "Z", BETA) > 0.99
    assert logical_expectation(moved, lat, frame, "Z", BETA) < -0.99


def test_vacuum_stabilizer_value():
    s = np.array([math.sqrt(2), 0.0])
    assert expectation_T(vacuum((N,)), s).real == pytest.approx(math.exp(-math.pi), abs=1e-12)


def test_rotation_by_two_pi_is_identity(square_words):
    w = square_words["+X"]
    out = apply(w, OperatorSpec("rotation", (0,), {"theta": 2 * math.pi}))
    assert np.allclose(out.amplitudes, w.amplitudes)


def test_kerr_pi_is_parity_rotation(square_words):
    w = square_words["+X"]
    half = OperatorSpec("kerr", (0,), {"theta": math.pi / 2})
    k = apply(apply(w, half), half)
    r = apply(w, OperatorSpec("rotation", (0,), {"theta": math.pi}))
    # n^2 = n (mod 2), so exp(i pi n^2) = exp(i pi n) on every level
    assert np.allclose(k.amplitudes, r.amplitudes, atol=1e-12)


def test_unknown_gate_kind():
    with pytest.raises(InvalidArgument):
        OperatorSpec("teleport")


def test_gaussian_without_real_logarithm():
    M = np.diag([-2.0, -0.5])
    with pytest.raises(UnsupportedGaussian):
        apply(vacuum((8,)), OperatorSpec("general_gaussian", (0,), {"M": M}))


def test_leakage_warning_and_error():
    amps = np.zeros(10, dtype=complex)
    amps[-1] = 1.0
    state = FockState((10,), amps)
    with pytest.warns(TruncationWarning):
        check_leakage(state)
    with pytest.raises(TruncationError):
        check_leakage(state, fatal=1e-3)


def test_kraus_completeness():
    for gamma in (0.0, 0.05, 0.3):
        ops = kraus_operators(gamma, 25)
        total = sum(K.T @ K for K in ops)
        assert np.allclose(total, np.eye(25), atol=1e-12)
    assert len(kraus_operators(0.0, 10)) == 1


def test_damping_reduces_mean_photon_number():
    rho = np.zeros((20, 20))
    rho[5, 5] = 1.0
    out = damping_channel(rho, 0.2)
    n = np.arange(20)
    assert np.trace(out) == pytest.approx(1.0)
    assert float(n @ np.diag(out)) == pytest.approx(5 * 0.8)


def test_no_decay_at_zero_rate(rng):
    assert all(inject_ancilla_decay(rng, 0.1, 0.0) is None for _ in range(50))
    with pytest.raises(InvalidArgument):
        inject_ancilla_decay(rng, 0.1, -1.0)


def test_sbs_round_reproducible(square, square_words):
    lat, frame = square
    a = sbs_round(square_words["+X"], lat, 0, 0.1, frame.mu[0], np.random.default_rng(5))
    b = sbs_round(square_words["+X"], lat, 0, 0.1, frame.mu[0], np.random.default_rng(5))
    assert a.outcome == b.outcome
    assert np.array_equal(a.state.amplitudes, b.state.amplitudes)
    assert 0.0 < a.probability <= 1.0


def test_no_error_keeps_logical_information(square):
    lat, frame = square
    res = quantum_error_prob(lat, frame, np.zeros(2), 0.1, rounds=1, trials=3, seed=0)
    assert res.probability < 0.02


def test_epsilon_to_beta_small_limit():
    assert epsilon_to_beta(1e-4) == pytest.approx(2e-4, rel=1e-6)


def test_codespace_fidelity_of_a_word(square_words):
    assert codespace_fidelity(square_words["+X"], [square_words["+Z"], square_words["-Z"]]) > 0.99


def test_rate_helpers():
    k = np.arange(30)
    trace = 1 - 0.9 * np.exp(-0.15 * k)
    assert fitted_contraction_rate(trace) == pytest.approx(0.15, rel=1e-9)
    assert predicted_rate(np.array([math.sqrt(2), 0.0]), 0.1) == pytest.approx(0.1 * math.pi)
