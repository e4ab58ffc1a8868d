"""Truncated Fock-basis simulation of grid-code states, gates and dissipation.

States are dense complex tensors with one axis per mode (plus a leading axis
of size two when a qubit ancilla is attached, index 0 being the ground state
|g>). Every gate is applied factor by factor on the axes it touches; the
full multimode operator is never formed.

Translations follow T(v) = exp(-i l v^T Omega x) = prod_j D_j(alpha_j) with
alpha_j = l (v_q + i v_p) / sqrt 2. Gaussian unitaries follow the Heisenberg
convention Q(M)^dag x Q(M) = M x, so a rotation by theta is exp(+i theta n).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.linalg import expm, logm
from scipy.sparse.linalg import expm_multiply
from scipy.special import eval_genlaguerre, gammaln

from .errors import (
    ConstructionError,
    InvalidArgument,
    TruncationError,
    TruncationWarning,
    UnsupportedGaussian,
)
from .gauge import gauge_setting_translation, nu, nu_pauli, update_after_translation
from .lattice import GkpLattice, LogicalFrame, enumerate_points, pauli_class
from .symplectic import L_UNIT, is_symplectic, omega

__all__ = [
    "FockState",
    "OperatorSpec",
    "LEAK_BAND",
    "LEAK_TOL",
    "vacuum",
    "mode_alphas",
    "displacement_matrix",
    "apply",
    "apply_translation",
    "apply_envelope",
    "gaussian_unitary",
    "build_codeword",
    "envelope_radius",
    "expectation_T",
    "stabilizer_expectations",
    "logical_expectation",
    "nullifier_residual",
    "epsilon_to_beta",
    "beta_to_epsilon",
    "DecaySpec",
    "inject_ancilla_decay",
    "SbsOutcome",
    "sbs_round",
    "dissipation_cycle",
    "kraus_operators",
    "amplitude_damping",
    "damping_channel",
    "QuantumErrorResult",
    "quantum_error_prob",
    "decay_error_prob",
]

LEAK_BAND = 0.10  # fraction of top Fock levels watched by the leakage guard
LEAK_TOL = 1e-3


######################################################################
# State container
######################################################################


@dataclass(frozen=True, eq=False)
class FockState:
    """Amplitudes over truncated Fock levels; ``ancilla`` adds a leading qubit axis."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray
    ancilla: bool = False

    def __post_init__(self):
        shape = ((2,) if self.ancilla else ()) + tuple(self.dims)
        if self.amplitudes.shape != shape:
            raise InvalidArgument(f"amplitudes have shape {self.amplitudes.shape}, expected {shape}")

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def offset(self) -> int:
        return 1 if self.ancilla else 0

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockState":
        n = self.norm()
        if n < 1e-300:
            raise ConstructionError("state has zero norm")
        return FockState(self.dims, self.amplitudes / n, self.ancilla)

    def evolve(self, amplitudes: np.ndarray) -> "FockState":
        return FockState(self.dims, amplitudes, self.ancilla)

    def populations(self, mode: int) -> np.ndarray:
        """Marginal photon-number distribution of one mode."""
        axes = tuple(i for i in range(self.amplitudes.ndim) if i != mode + self.offset)
        return np.sum(np.abs(self.amplitudes) ** 2, axis=axes)

    def total_number_populations(self) -> np.ndarray:
        """Distribution of the total excitation number n = sum_j n_j (modes only)."""
        probs = np.abs(self.amplitudes) ** 2
        if self.ancilla:
            probs = probs.sum(axis=0)
        total = sum(np.meshgrid(*[np.arange(N) for N in self.dims], indexing="ij"))
        return np.bincount(total.ravel(), weights=probs.ravel())

    def leakage(self) -> float:
        """Largest population in the top LEAK_BAND of levels over all modes."""
        worst = 0.0
        for j, N in enumerate(self.dims):
            band = max(1, int(math.ceil(LEAK_BAND * N)))
            worst = max(worst, float(self.populations(j)[N - band :].sum()))
        return worst / max(self.norm() ** 2, 1e-300)

    def mean_photons(self) -> np.ndarray:
        return np.array([self.populations(j) @ np.arange(N) for j, N in enumerate(self.dims)]) / self.norm() ** 2


def check_leakage(state: FockState, fatal: Optional[float] = None) -> float:
    leak = state.leakage()
    if fatal is not None and leak > fatal:
        raise TruncationError(f"population {leak:.2e} in the top Fock band exceeds {fatal:g}")
    if leak > LEAK_TOL:
        warnings.warn(f"population {leak:.2e} in the top Fock band; increase the truncation", TruncationWarning, stacklevel=2)
    return leak


def vacuum(dims: Sequence[int]) -> FockState:
    dims = tuple(int(N) for N in dims)
    if not dims or min(dims) < 2:
        raise InvalidArgument("every mode needs at least two Fock levels")
    amps = np.zeros(dims, dtype=complex)
    amps[(0,) * len(dims)] = 1.0
    return FockState(dims, amps)


######################################################################
# Single-mode matrices
######################################################################


def mode_alphas(v: np.ndarray) -> np.ndarray:
    """Per-mode displacement amplitudes of T(v)."""
    v = np.asarray(v, dtype=float)
    return L_UNIT * (v[0::2] + 1j * v[1::2]) / math.sqrt(2.0)


@lru_cache(maxsize=4096)
def _displacement_cached(re: float, im: float, N: int) -> np.ndarray:
    alpha = complex(re, im)
    x = abs(alpha) ** 2
    if x == 0.0:
        return np.eye(N, dtype=complex)
    m, n = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    log_mag = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + k * math.log(abs(alpha)) - x / 2
    lag = eval_genlaguerre(lo, k, x)
    phi = math.atan2(alpha.imag, alpha.real)
    # <m|D|n> carries alpha^(m-n) below the diagonal and (-alpha*)^(n-m) above it
    phase = np.where(m >= n, np.exp(1j * k * phi), (-1.0) ** k * np.exp(-1j * k * phi))
    D = np.exp(log_mag) * lag * phase
    D.setflags(write=False)
    return D


def displacement_matrix(alpha: complex, N: int) -> np.ndarray:
    """Exact matrix elements <m|D(alpha)|n> for m, n < N (Laguerre form)."""
    return _displacement_cached(round(alpha.real, 13), round(alpha.imag, 13), int(N))


def number_diagonal(N: int) -> np.ndarray:
    return np.arange(N, dtype=float)


def _apply_mode(amps: np.ndarray, U: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(U, amps, axes=([1], [axis])), 0, axis)


def _apply_diag(amps: np.ndarray, diag: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    shape = [1] * amps.ndim
    for ax, size in zip(axes, diag.shape):
        shape[ax] = size
    return amps * diag.reshape(shape)


######################################################################
# Gates
######################################################################

_GATE_KINDS = (
    "displacement",
    "translation",
    "rotation",
    "beamsplitter",
    "shear",
    "sum",
    "kerr",
    "crosskerr",
    "envelope",
    "general_gaussian",
)


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """One gate. ``modes`` are the target modes; ``params`` depend on ``kind``.

    displacement: alpha (complex, one mode); translation: v (2m vector over
    all modes); rotation/kerr: theta; crosskerr: theta (two modes);
    beamsplitter: no parameter (the 50:50 splitter of the symplectic
    module); shear: c; sum: lam; envelope: beta; general_gaussian: M
    (2k x 2k symplectic matrix on the k target modes).
    """

    kind: str
    modes: tuple[int, ...] = (0,)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _GATE_KINDS:
            raise InvalidArgument(f"unknown gate kind {self.kind!r}")


def apply_translation(state: FockState, v: np.ndarray, axis_offset: Optional[int] = None) -> FockState:
    amps = _translate(state.amplitudes, state.dims, v, state.offset if axis_offset is None else axis_offset)
    return state.evolve(amps)


def _translate(amps: np.ndarray, dims: Sequence[int], v: np.ndarray, offset: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (2 * len(dims),):
        raise InvalidArgument("translation vector must have one entry per quadrature")
    for j, alpha in enumerate(mode_alphas(v)):
        if alpha != 0:
            amps = _apply_mode(amps, displacement_matrix(alpha, dims[j]), j + offset)
    return amps


def apply_envelope(state: FockState, beta: float, normalize: bool = True) -> FockState:
    amps = state.amplitudes
    for j, N in enumerate(state.dims):
        amps = _apply_diag(amps, np.exp(-beta * number_diagonal(N)), [j + state.offset])
    out = state.evolve(amps)
    return out.normalized() if normalize else out


def _quadrature_ops(N: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.diag(np.sqrt(np.arange(1, N)), 1).astype(complex)
    q = (a + a.conj().T) / math.sqrt(2)
    p = (a - a.conj().T) / (1j * math.sqrt(2))
    return q, p


_GAUSSIAN_PAD = 24


@lru_cache(maxsize=64)
def _gaussian_generator(key: bytes, k: int, big: tuple[int, ...]) -> sparse.csr_matrix:
    M = np.frombuffer(key).reshape(2 * k, 2 * k)
    log_m = logm(M)
    if np.max(np.abs(np.imag(log_m))) > 1e-9:
        raise UnsupportedGaussian("matrix has no real principal logarithm")
    log_m = np.real(log_m)
    if not np.allclose(expm(log_m), M, atol=1e-9):
        raise UnsupportedGaussian("principal logarithm does not reproduce the matrix")
    J = -omega(k) @ log_m
    J = (J + J.T) / 2
    ops = []
    for j, N in enumerate(big):
        for op in _quadrature_ops(N):
            factors = [sparse.identity(n, format="csr") for n in big]
            factors[j] = sparse.csr_matrix(op)
            full = factors[0]
            for f in factors[1:]:
                full = sparse.kron(full, f, format="csr")
            ops.append(full)
    H = sum(J[a, b] * (ops[a] @ ops[b]) for a in range(2 * k) for b in range(2 * k) if J[a, b] != 0) / 2
    return (-1j * H).tocsr()


def _check_gaussian(M: np.ndarray, k: int) -> np.ndarray:
    M = np.ascontiguousarray(np.asarray(M, dtype=float))
    if M.shape != (2 * k, 2 * k) or not is_symplectic(M, 1e-8):
        raise InvalidArgument("general Gaussian needs a symplectic matrix on the target modes")
    return M


def _apply_gaussian(amps: np.ndarray, M: np.ndarray, axes: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Q(M) = exp(-i x^T J x / 2), J = -Omega log M, applied by a Krylov exponential.

    The generator lives in a space padded by _GAUSSIAN_PAD levels per mode and
    the result is cropped, which keeps the interior of the truncation accurate.
    """
    k = len(axes)
    M = _check_gaussian(M, k)
    big = tuple(int(N) + _GAUSSIAN_PAD for N in dims)
    gen = _gaussian_generator(M.tobytes(), k, big)
    moved = np.moveaxis(amps, list(axes), list(range(k)))
    rest = moved.shape[k:]
    padded = np.zeros(big + rest, dtype=complex)
    padded[tuple(slice(0, N) for N in dims)] = moved
    cols = padded.reshape(int(np.prod(big)), -1)
    out = expm_multiply(gen, cols).reshape(big + rest)
    out = out[tuple(slice(0, N) for N in dims)]
    return np.moveaxis(out, list(range(k)), list(axes))


def gaussian_unitary(M: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Matrix of Q(M) on the truncated modes (for checks; gates never need it)."""
    dims = tuple(int(N) for N in dims)
    size = int(np.prod(dims))
    basis = np.eye(size, dtype=complex).reshape(dims + (size,))
    return _apply_gaussian(basis, M, list(range(len(dims))), dims).reshape(size, size)


def apply(state: FockState, spec: OperatorSpec) -> FockState:
    """Apply one gate from ``spec`` to the modes it names."""
    modes = tuple(spec.modes)
    if any(j < 0 or j >= state.m for j in modes):
        raise InvalidArgument(f"gate modes {modes} out of range for {state.m} modes")
    axes = [j + state.offset for j in modes]
    amps = state.amplitudes
    P = spec.params
    kind = spec.kind
    if kind == "displacement":
        amps = _apply_mode(amps, displacement_matrix(complex(P["alpha"]), state.dims[modes[0]]), axes[0])
    elif kind == "translation":
        amps = _translate(amps, state.dims, P["v"], state.offset)
    elif kind == "rotation":
        amps = _apply_diag(amps, np.exp(1j * P["theta"] * number_diagonal(state.dims[modes[0]])), axes)
    elif kind == "kerr":
        n = number_diagonal(state.dims[modes[0]])
        amps = _apply_diag(amps, np.exp(1j * P["theta"] * n**2), axes)
    elif kind == "crosskerr":
        na = number_diagonal(state.dims[modes[0]])
        nb = number_diagonal(state.dims[modes[1]])
        amps = _apply_diag(amps, np.exp(1j * P["theta"] * np.outer(na, nb)), axes)
    elif kind == "envelope":
        return apply_envelope(state.evolve(amps), P["beta"])
    else:
        from . import symplectic as sp

        if kind == "beamsplitter":
            M = sp.beamsplitter(0, 1, 2)
        elif kind == "shear":
            M = sp.shear(P["c"], 0, 1)
        elif kind == "sum":
            M = sp.sum_gate(0, 1, P.get("lam", 1.0), 2)
        else:
            M = np.asarray(P["M"], dtype=float)
        if M.shape[0] != 2 * len(modes):
            raise InvalidArgument(f"{kind} acts on {M.shape[0] // 2} modes, got {len(modes)}")
        amps = _apply_gaussian(amps, M, axes, [state.dims[j] for j in modes])
    return state.evolve(amps)


######################################################################
# Code words and finite-energy observables
######################################################################


def epsilon_to_beta(eps: float) -> float:
    return math.asinh(2.0 * eps)


def beta_to_epsilon(beta: float) -> float:
    return math.sinh(beta) / 2.0


def _enveloped_coherent(alpha: complex, beta: float, N: int) -> np.ndarray:
    """E_beta |alpha> without truncation error: e^{-|a|^2/2} (a e^-beta)^n / sqrt(n!)."""
    n = np.arange(N)
    if alpha == 0:
        out = np.zeros(N, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -abs(alpha) ** 2 / 2 + n * (math.log(abs(alpha)) - beta) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * math.atan2(alpha.imag, alpha.real))


def _signed_sum(points: np.ndarray, coeffs: np.ndarray, beta: float, dims: Sequence[int]) -> np.ndarray:
    amps = np.zeros(tuple(dims), dtype=complex)
    for v, c in zip(points, coeffs):
        term = None
        for j, alpha in enumerate(mode_alphas(v)):
            vec = _enveloped_coherent(alpha, beta, dims[j])
            term = vec if term is None else np.multiply.outer(term, vec)
        amps += c * term
    return amps


def _coset_points(lat: GkpLattice, frame: LogicalFrame, pauli: str, radius: float) -> np.ndarray:
    pts = enumerate_points(lat, radius, dual=True)
    keep = [p for p in pts if pauli_class(lat, frame, p) == pauli]
    return np.array(keep).reshape(-1, lat.dim)


def envelope_radius(beta: float, weight: float = 1e-8) -> float:
    """Translation length beyond which E_beta suppresses a coherent peak below ``weight``."""
    alpha2 = 2.0 * math.log(1.0 / weight) / (1.0 - math.exp(-2.0 * beta))
    return math.sqrt(2.0 * alpha2) / L_UNIT


def _seed_offset(lat: GkpLattice, mu: Sequence[int]) -> np.ndarray:
    # A peak of the ideal code words in gauge mu; seeding the sum there keeps
    # the signed terms from cancelling when mu != 0.
    if not any(mu):
        return np.zeros(lat.dim)
    tau = gauge_setting_translation(lat, (0,) * lat.dim, mu)
    return tau / 2


def _projected_terms(lat, frame, pauli, seed, radius):
    # P T(seed)|0> = sum_p sign(p) e^{-i pi p^T Omega seed} T(p + seed)|0>
    if pauli is None:
        pts = enumerate_points(lat, radius + float(np.linalg.norm(seed)))
        signs = np.array([nu(lat, frame.mu, p) for p in pts], dtype=float)
    else:
        pts = _coset_points(lat, frame, pauli, radius + float(np.linalg.norm(seed)))
        signs = np.array([nu_pauli(lat, frame, pauli, p) for p in pts], dtype=float)
    if len(pts) == 0:
        return pts, signs.astype(complex)
    phases = np.exp(-1j * math.pi * (pts @ omega(lat.m) @ seed))
    shifted = pts + seed
    keep = np.linalg.norm(shifted, axis=1) <= radius
    return shifted[keep], (signs * phases)[keep]


def build_codeword(
    lat: GkpLattice,
    frame: LogicalFrame,
    which: str,
    beta: float,
    dims: Sequence[int],
    radius: Optional[float] = None,
) -> FockState:
    """Finite-energy eigenstate E_beta |which> as a nu-signed sum of coherent states.

    ``which`` is "+X", "-X", "+Y", "-Y", "+Z", "-Z", or "code" for the
    stabilizer-only sum (the unique state of a d = 1 qunaught, or the
    projection of the seed onto the code space otherwise). The default
    cutoff is the larger of three generator lengths and the envelope radius.
    """
    if beta <= 0:
        raise InvalidArgument("beta must be positive")
    dims = tuple(int(N) for N in dims)
    if len(dims) != lat.m:
        raise InvalidArgument(f"need {lat.m} truncations, got {len(dims)}")
    smax = float(np.max(np.linalg.norm(lat.S, axis=1)))
    radius = max(3.0 * smax, envelope_radius(beta)) if radius is None else float(radius)
    if radius < 2 * smax:
        raise InvalidArgument("cutoff radius must be at least twice the longest generator")
    seed = _seed_offset(lat, frame.mu)
    if which == "code":
        seeds = [seed]
    else:
        if len(which) != 2 or which[0] not in "+-" or which[1] not in "XYZ":
            raise InvalidArgument(f"unknown code word {which!r}")
        if lat.d != 2:
            raise InvalidArgument("Pauli eigenstates need a qubit code (d = 2)")
        # A second seed shifted by an anticommuting Pauli guarantees both
        # eigenspaces of the target Pauli are populated before projecting.
        seeds = [seed, seed + frame.rep("Z" if which[1] == "X" else "X")]
    amps = np.zeros(dims, dtype=complex)
    for c in seeds:
        pts, coeffs = _projected_terms(lat, frame, None, c, radius)
        amps += _signed_sum(pts, coeffs, beta, dims)
        if which != "code":
            pts, coeffs = _projected_terms(lat, frame, which[1], c, radius)
            amps += (1.0 if which[0] == "+" else -1.0) * _signed_sum(pts, coeffs, beta, dims)
    norm = float(np.linalg.norm(amps))
    if norm < 1e-8:
        raise ConstructionError(f"code word {which!r} vanishes; the gauge is probably inconsistent")
    state = FockState(dims, amps / norm)
    check_leakage(state)
    return state


def _guarded_inverse_envelope(amps: np.ndarray, dims: Sequence[int], beta: float, offset: int) -> np.ndarray:
    for j, N in enumerate(dims):
        band = max(1, int(math.ceil(LEAK_BAND * N)))
        weights = np.exp(beta * number_diagonal(N))
        weights[N - band :] = 0.0
        amps = _apply_diag(amps, weights, [j + offset])
    return amps


def expectation_T(state: FockState, v: np.ndarray, beta: float = 0.0) -> complex:
    """<psi| E_beta T(v) E_beta^-1 |psi> at fixed truncation.

    The inverse envelope skips the guarded top Fock band so truncation noise
    is not amplified.
    """
    amps = state.amplitudes
    off = state.offset
    work = _guarded_inverse_envelope(amps, state.dims, beta, off) if beta else amps
    work = _translate(work, state.dims, v, off)
    if beta:
        for j, N in enumerate(state.dims):
            work = _apply_diag(work, np.exp(-beta * number_diagonal(N)), [j + off])
    return complex(np.vdot(amps, work) / np.vdot(amps, amps))


def stabilizer_expectations(state: FockState, lat: GkpLattice, mu: Sequence[int], beta: float) -> np.ndarray:
    """nu_j <T_{j,beta}> for every generator; 1 on finite-energy code words."""
    return np.array(
        [nu(lat, mu, s) * expectation_T(state, s, beta).real for s in np.asarray(lat.S)]
    )


def logical_expectation(state: FockState, lat: GkpLattice, frame: LogicalFrame, pauli: str, beta: float) -> float:
    """Finite-energy logical Pauli expectation nu^P(p0) <E T(p0) E^-1>."""
    p0 = frame.rep(pauli)
    return nu_pauli(lat, frame, pauli, p0) * expectation_T(state, p0, beta).real


def nullifier_residual(state: FockState, s: np.ndarray, beta: float) -> float:
    """|| d_j |psi> || for the finite-energy nullifier along the generator ``s``.

    The modular quadrature is evaluated through the eigenbasis of the
    truncated operator s^T Omega x, so this is meant for small truncations.
    """
    s = np.asarray(s, dtype=float)
    dims = state.dims
    if state.ancilla:
        raise InvalidArgument("nullifier residual is defined on mode states")
    size = int(np.prod(dims))
    quads = []
    for j, N in enumerate(dims):
        q, p = _quadrature_ops(N)
        for op in (q, p):
            factors = [np.eye(n) for n in dims]
            factors[j] = op
            full = factors[0]
            for f in factors[1:]:
                full = np.kron(full, f)
            quads.append(full)
    conj = s @ omega(len(dims))
    u_op = sum(c * Q for c, Q in zip(conj, quads) if c != 0)
    par_op = sum(c * Q for c, Q in zip(s, quads) if c != 0)
    period = L_UNIT / math.cosh(beta)
    w, V = np.linalg.eigh(u_op)
    wrapped = w - period * np.round(w / period)
    mod_op = (V * wrapped) @ V.conj().T
    norm_s = float(np.linalg.norm(s))
    t = math.tanh(beta)
    d = mod_op / math.sqrt(2 * norm_s * t) - 1j * math.sqrt(t / (2 * norm_s)) * par_op
    psi = state.amplitudes.reshape(size)
    return float(np.linalg.norm(d @ psi))


######################################################################
# Dissipation with a qubit ancilla
######################################################################

_HALF_PI = math.pi / 2


def _ancilla_rotation(amps: np.ndarray, axis: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    g, e = amps[0], amps[1]
    if axis == "x":
        return np.stack([c * g - 1j * s * e, -1j * s * g + c * e])
    return np.stack([c * g - s * e, s * g + c * e])


def _ancilla_flip(amps: np.ndarray) -> np.ndarray:
    return amps[::-1].copy()


def _controlled_translation(amps: np.ndarray, dims: Sequence[int], v: np.ndarray) -> np.ndarray:
    """CT(v) = exp(i sigma_z l x^T Omega v / 2): |g> branch moves by +v/2, |e> by -v/2."""
    return np.stack([_translate(amps[0], dims, v / 2, 0), _translate(amps[1], dims, -v / 2, 0)])


@dataclass(frozen=True)
class DecaySpec:
    """Ancilla bit flip during controlled translation ``which`` (0 small, 1 big, 2 small)
    after the fraction ``eta`` of that translation."""

    which: int
    eta: float

    def __post_init__(self):
        if self.which not in (0, 1, 2) or not 0.0 <= self.eta <= 1.0:
            raise InvalidArgument("decay needs which in {0, 1, 2} and eta in [0, 1]")


def inject_ancilla_decay(rng: np.random.Generator, eps: float, gamma_t: float) -> Optional[DecaySpec]:
    """Draw whether (and where) the ancilla flips during one round.

    A flip happens with probability 1 - exp(-gamma_t / 2), where ``gamma_t``
    is the ancilla decay rate times the round duration. The affected
    translation is chosen in proportion to its duration, (eps, 1, eps), and
    the flip time is uniform along it.
    """
    if gamma_t < 0 or eps < 0:
        raise InvalidArgument("decay rate and epsilon must be non-negative")
    if gamma_t == 0 or rng.random() >= 1.0 - math.exp(-gamma_t / 2):
        return None
    weights = np.array([eps, 1.0, eps]) / (1.0 + 2.0 * eps)
    return DecaySpec(int(rng.choice(3, p=weights)), float(rng.random()))


@dataclass(frozen=True, eq=False)
class SbsOutcome:
    state: FockState
    outcome: int
    probability: float


def sbs_round(
    state: FockState,
    lat: GkpLattice,
    j: int,
    eps: float,
    gauge_bit: int,
    rng: np.random.Generator,
    decay: Optional[DecaySpec] = None,
) -> SbsOutcome:
    """One small-Big-small dissipation round on generator ``j``.

    The ancilla starts in |g> and is brought to the equator by an x pulse.
    Then CT(-eps Omega s_j), a -pi/2 y rotation, CT(s_j), a +pi/2 y
    rotation and CT(-nu_j eps Omega s_j) with nu_j = (-1)^gauge_bit. The
    ancilla is measured in the energy basis and discarded. The mode state
    ends displaced by +-s_j/2, which the caller absorbs into the gauge.
    """
    if state.ancilla:
        raise InvalidArgument("sbs_round takes a mode state; the ancilla is internal")
    if eps <= 0:
        raise InvalidArgument("epsilon must be positive")
    s = np.asarray(lat.S)[j]
    small = -eps * (omega(lat.m) @ s)
    sign = -1.0 if gauge_bit % 2 else 1.0
    cts = [small, s, sign * small]
    dims = state.dims
    amps = np.stack([state.amplitudes, np.zeros_like(state.amplitudes)])
    amps = _ancilla_rotation(amps, "x", _HALF_PI)
    for k, v in enumerate(cts):
        if decay is not None and decay.which == k:
            amps = _controlled_translation(amps, dims, decay.eta * v)
            amps = _ancilla_flip(amps)
            amps = _controlled_translation(amps, dims, (1.0 - decay.eta) * v)
        else:
            amps = _controlled_translation(amps, dims, v)
        if k == 0:
            amps = _ancilla_rotation(amps, "y", -_HALF_PI)
        elif k == 1:
            amps = _ancilla_rotation(amps, "y", _HALF_PI)
    p_g = float(np.vdot(amps[0], amps[0]).real)
    total = p_g + float(np.vdot(amps[1], amps[1]).real)
    p_g /= total
    outcome = 0 if rng.random() < p_g else 1
    branch = amps[outcome]
    prob = p_g if outcome == 0 else 1.0 - p_g
    return SbsOutcome(FockState(dims, branch / np.linalg.norm(branch)), outcome, prob)


def dissipation_cycle(
    state: FockState,
    lat: GkpLattice,
    frame: LogicalFrame,
    eps: float,
    rng: np.random.Generator,
    cycles: int = 1,
) -> tuple[FockState, LogicalFrame]:
    """Cycle sbs rounds over all generators, tracking the gauge after each round."""
    for _ in range(cycles):
        for j in range(lat.dim):
            state = sbs_round(state, lat, j, eps, frame.mu[j], rng).state
            frame = _shift_frame(lat, frame, j)
    return state, frame


def _shift_frame(lat: GkpLattice, frame: LogicalFrame, j: int) -> LogicalFrame:
    g = update_after_translation(lat, frame, np.asarray(lat.S)[j])
    return frame.with_gauge(g.mu, g.upsilon)


######################################################################
# Amplitude damping
######################################################################


def kraus_operators(gamma: float, N: int) -> list[np.ndarray]:
    """K_k = (gamma/(1-gamma))^{k/2} a^k (1-gamma)^{n/2} / sqrt(k!) truncated to N levels."""
    if not 0.0 <= gamma < 1.0:
        raise InvalidArgument("gamma must lie in [0, 1)")
    n = np.arange(N)
    ops = []
    for k in range(N if gamma > 0 else 1):
        K = np.zeros((N, N))
        src = n[k:]
        log_binom = gammaln(src + 1) - gammaln(k + 1) - gammaln(src - k + 1)
        with np.errstate(divide="ignore"):
            log_amp = 0.5 * (log_binom + (src - k) * math.log1p(-gamma) + (k * math.log(gamma) if k else 0.0))
        K[src - k, src] = np.exp(log_amp)
        ops.append(K)
    return ops


def amplitude_damping(state: FockState, gamma: float, rng: np.random.Generator) -> FockState:
    """Sample one Kraus branch per mode (quantum-trajectory unravelling)."""
    if gamma == 0:
        return state
    amps = state.amplitudes
    for j, N in enumerate(state.dims):
        axis = j + state.offset
        branches = [_apply_mode(amps, K, axis) for K in kraus_operators(gamma, N)]
        probs = np.array([np.vdot(b, b).real for b in branches])
        probs /= probs.sum()
        amps = branches[int(rng.choice(len(probs), p=probs))]
        amps = amps / np.linalg.norm(amps)
    return state.evolve(amps)


def damping_channel(rho: np.ndarray, gamma: float) -> np.ndarray:
    """Deterministic single-mode channel on a density matrix."""
    return sum(K @ rho @ K.T for K in kraus_operators(gamma, rho.shape[0]))


######################################################################
# Logical error probabilities
######################################################################


@dataclass(frozen=True)
class QuantumErrorResult:
    probability: float
    stderr: float
    trials: int
    seed: int
    flips: dict

    def as_dict(self) -> dict:
        return {
            "probability": self.probability,
            "stderr": self.stderr,
            "trials": self.trials,
            "seed": self.seed,
            **{f"flip_{k}": v for k, v in self.flips.items()},
        }


def _flip_probability(state: FockState, lat: GkpLattice, frame: LogicalFrame, pauli: str, beta: float) -> float:
    value = logical_expectation(state, lat, frame, pauli, beta)
    return float(np.clip((1.0 - value) / 2.0, 0.0, 1.0))


def _combine(flips: dict[str, list[float]]) -> tuple[float, float]:
    # Pauli channel: f_X + f_Y + f_Z = 2 (pX + pY + pZ)
    means = {k: float(np.mean(v)) for k, v in flips.items()}
    var = {k: float(np.var(v, ddof=1)) / len(v) if len(v) > 1 else 0.0 for k, v in flips.items()}
    if len(flips) == 3:
        return sum(means.values()) / 2.0, math.sqrt(sum(var.values())) / 2.0
    (k,) = flips
    return means[k], math.sqrt(var[k])


def _run_trials(
    lat: GkpLattice,
    frame: LogicalFrame,
    eps: float,
    dims: Sequence[int],
    trials: int,
    seed: int,
    paulis: Sequence[str],
    prepare,
) -> QuantumErrorResult:
    if trials < 1:
        raise InvalidArgument("trials must be positive")
    if lat.d != 2:
        raise InvalidArgument("logical error probabilities need a qubit code (d = 2)")
    beta = epsilon_to_beta(eps)
    dims = tuple(int(N) for N in dims)
    words = {P: build_codeword(lat, frame, "+" + P, beta, dims) for P in paulis}
    flips: dict[str, list[float]] = {P: [] for P in paulis}
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        P = paulis[t % len(paulis)]
        state, fr = prepare(words[P], rng)
        check_leakage(state, fatal=1e-2)
        flips[P].append(_flip_probability(state, lat, fr, P, beta))
    if any(len(v) == 0 for v in flips.values()):
        raise InvalidArgument("need at least one trial per measured Pauli")
    p, err = _combine(flips)
    return QuantumErrorResult(p, err, trials, seed, {k: float(np.mean(v)) for k, v in flips.items()})


def quantum_error_prob(
    lat: GkpLattice,
    frame: LogicalFrame,
    e: np.ndarray,
    eps: float,
    rounds: int,
    trials: int,
    seed: int = 0,
    dims: Optional[Sequence[int]] = None,
    paulis: Sequence[str] = ("X", "Y", "Z"),
) -> QuantumErrorResult:
    """Logical error after T(e) followed by ``rounds`` full dissipation cycles.

    Trial t prepares the +1 eigenstate of paulis[t mod len(paulis)] and uses
    the substream SeedSequence([seed, t]). With all three Paulis the result
    is the total Pauli error (f_X + f_Y + f_Z) / 2; with one it is the flip
    probability of that Pauli.
    """
    e = np.asarray(e, dtype=float)
    if e.shape != (lat.dim,):
        raise InvalidArgument("error vector must have one entry per quadrature")
    dims = _default_dims(lat) if dims is None else dims

    def prepare(word, rng):
        state = apply_translation(word, e)
        return dissipation_cycle(state, lat, frame, eps, rng, rounds)

    return _run_trials(lat, frame, eps, dims, trials, seed, tuple(paulis), prepare)


def decay_error_prob(
    lat: GkpLattice,
    frame: LogicalFrame,
    eps: float,
    rounds: int,
    trials: int,
    seed: int = 0,
    dims: Optional[Sequence[int]] = None,
    generators: Optional[Sequence[int]] = None,
    paulis: Sequence[str] = ("X", "Y", "Z"),
) -> QuantumErrorResult:
    """Logical error given one ancilla bit flip, followed by ``rounds`` clean cycles.

    Each trial runs one sbs round on a generator (cycled over ``generators``)
    with a flip placed by inject_ancilla_decay's time-weighted rule
    (a certain decay), then stabilizes and measures.
    """
    dims = _default_dims(lat) if dims is None else dims
    gens = tuple(range(lat.dim)) if generators is None else tuple(generators)
    counter = iter(range(10**12))

    def prepare(word, rng):
        j = gens[next(counter) % len(gens)]
        decay = inject_ancilla_decay(rng, eps, math.inf)
        state = sbs_round(word, lat, j, eps, frame.mu[j], rng, decay).state
        fr = _shift_frame(lat, frame, j)
        return dissipation_cycle(state, lat, fr, eps, rng, rounds)

    return _run_trials(lat, frame, eps, dims, trials, seed, tuple(paulis), prepare)


def _default_dims(lat: GkpLattice) -> tuple[int, ...]:
    return (50,) if lat.m == 1 else (35,) * lat.m
