"""Homodyne (GKP-ancilla) error correction at the displacement-vector level."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DecoderInconsistency, InvalidArgument
from .lattice import INTEGRALITY_TOL, GkpLattice, LogicalFrame, pauli_class
from .symplectic import L_UNIT, omega

__all__ = [
    "NoiseModel",
    "DecodeOutcome",
    "TrialResult",
    "sigma_from_db",
    "db_from_sigma",
    "syndrome_and_correct",
    "classify_residual",
    "decode_batch",
    "run_trials",
    "sample_errors",
    "CHUNK",
]

TWO_PI = 2.0 * math.pi
CHUNK = 4096  # trials per RNG substream


def sigma_from_db(db: float) -> float:
    return math.sqrt(0.5 * 10 ** (-db / 10))


def db_from_sigma(sigma: float) -> float:
    if sigma <= 0:
        raise InvalidArgument("sigma must be positive")
    return 10 * math.log10(0.5 / sigma**2)


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian translation noise of strength ``sigma`` (decibel scale of sigma^2 vs 1/2).

    Each of the 2m translation components (translation units) has std
    sigma / sqrt 2, so that E|e|^2 = m sigma^2. Noisy ancillas use the same
    component std for their measurement and back-action noise.
    """

    sigma: float
    noisy_ancilla: bool = False

    def __post_init__(self):
        if self.sigma < 0 or not math.isfinite(self.sigma):
            raise InvalidArgument("sigma must be finite and non-negative")

    @classmethod
    def from_db(cls, db: float, noisy_ancilla: bool = False) -> "NoiseModel":
        return cls(sigma_from_db(db), noisy_ancilla)

    @property
    def db(self) -> float:
        return db_from_sigma(self.sigma)

    @property
    def component_std(self) -> float:
        return self.sigma / math.sqrt(2.0)


@dataclass(frozen=True)
class DecodeOutcome:
    syndrome: np.ndarray
    correction: np.ndarray
    residual_class: Optional[str] = None
    success: Optional[bool] = None


def _wrap_angle(x: np.ndarray) -> np.ndarray:
    """Map to (-pi, pi]."""
    return -((-x + math.pi) % TWO_PI - math.pi)


def syndrome_and_correct(lat: GkpLattice, e: np.ndarray) -> DecodeOutcome:
    """Syndrome xi = -l^2 S Omega e (mod 2 pi) and the correction delta = -Omega S^-1 xi / l^2.

    The correction cancels the in-cell part of e, so e + delta is a dual point.
    """
    e = np.asarray(e, dtype=float)
    if e.shape != (lat.dim,) or not np.all(np.isfinite(e)):
        raise InvalidArgument("error vector must be finite with one entry per quadrature")
    xi = _wrap_angle(-(L_UNIT**2) * (np.asarray(lat.S) @ omega(lat.m) @ e))
    delta = -omega(lat.m) @ np.linalg.solve(lat.S, xi) / L_UNIT**2
    return DecodeOutcome(xi, delta)


def classify_residual(lat: GkpLattice, frame: LogicalFrame, e: np.ndarray, delta: np.ndarray) -> DecodeOutcome:
    residual = np.asarray(e, dtype=float) + np.asarray(delta, dtype=float)
    a_real = np.asarray(lat.S) @ omega(lat.m) @ residual
    a = np.rint(a_real)
    if np.max(np.abs(a_real - a)) > INTEGRALITY_TOL:
        raise DecoderInconsistency("corrected error is not a dual-lattice point")
    b = np.linalg.solve(np.asarray(lat.A, dtype=float), a)
    success = bool(np.all(np.abs(b - np.rint(b)) <= INTEGRALITY_TOL))
    xi = syndrome_and_correct(lat, np.asarray(e, dtype=float)).syndrome
    label = pauli_class(lat, frame, residual)
    return DecodeOutcome(xi, np.asarray(delta, dtype=float), label, success)


def decode_batch(lat: GkpLattice, E: np.ndarray, syndrome_noise: Optional[np.ndarray] = None) -> np.ndarray:
    """Success mask for many errors; optional additive noise on each syndrome."""
    S = np.asarray(lat.S)
    W = omega(lat.m)
    xi = _wrap_angle(-(L_UNIT**2) * (E @ (S @ W).T))
    if syndrome_noise is not None:
        xi = _wrap_angle(xi + syndrome_noise)
    delta = -(np.linalg.solve(S, xi.T).T @ W.T) / L_UNIT**2
    a = np.rint((E + delta) @ (S @ W).T)
    b = np.linalg.solve(np.asarray(lat.A, dtype=float), a.T).T
    return np.all(np.abs(b - np.rint(b)) <= INTEGRALITY_TOL, axis=1)


def _chunk_failures(lat: GkpLattice, noise: NoiseModel, n: int, rng: np.random.Generator) -> int:
    S = np.asarray(lat.S)
    W = omega(lat.m)
    std = noise.component_std
    E = sample_errors(lat, noise, n, rng)
    if not noise.noisy_ancilla:
        return int(np.count_nonzero(~decode_batch(lat, E)))
    # Sequential syndromes: each fresh ancilla adds measurement noise along
    # its syndrome and kicks the data along s_j before the next measurement.
    xi = np.empty((n, lat.dim))
    norms = np.linalg.norm(S, axis=1)
    for j in range(lat.dim):
        xi[:, j] = -(L_UNIT**2) * (E @ (S[j] @ W)) + L_UNIT**2 * norms[j] * std * rng.standard_normal(n)
        E = E + std * rng.standard_normal(n)[:, None] * S[j]
    xi = _wrap_angle(xi)
    delta = -(np.linalg.solve(S, xi.T).T @ W.T) / L_UNIT**2
    a = np.rint((E + delta) @ (S @ W).T)
    b = np.linalg.solve(np.asarray(lat.A, dtype=float), a.T).T
    return int(np.count_nonzero(~np.all(np.abs(b - np.rint(b)) <= INTEGRALITY_TOL, axis=1)))


@dataclass(frozen=True)
class TrialResult:
    p_logical: float
    stderr: float
    trials: int
    seed: int

    def as_dict(self) -> dict:
        return {"p_logical": self.p_logical, "stderr": self.stderr, "trials": self.trials, "seed": self.seed}


def sample_errors(lat: GkpLattice, noise: NoiseModel, n: int, rng: np.random.Generator) -> np.ndarray:
    return noise.component_std * rng.standard_normal((n, lat.dim))


def run_trials(lat: GkpLattice, noise: NoiseModel, trials: int, seed: int = 0) -> TrialResult:
    """Logical error frequency of one correction round.

    Trials are processed in chunks of ``CHUNK`` with substream
    SeedSequence([seed, chunk_index]), so results do not depend on how the
    chunks are scheduled.
    """
    if trials < 1:
        raise InvalidArgument("trials must be positive")
    failures = 0
    for k, start in enumerate(range(0, trials, CHUNK)):
        n = min(CHUNK, trials - start)
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        failures += _chunk_failures(lat, noise, n, rng)
    p = failures / trials
    return TrialResult(p, math.sqrt(p * (1 - p) / trials), trials, seed)
