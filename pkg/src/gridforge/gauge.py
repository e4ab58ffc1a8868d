"""Sign bookkeeping for stabilizers and logical Paulis.

A gauge is a pair (mu, upsilon) of bit vectors. ``mu[j]`` records the
eigenvalue (-1)**mu[j] of the generator translation T(s_j) on the code
space, and ``upsilon`` records the sign attached to each base logical
representative. Every sign here is computed from integer lattice
coordinates, never from floating phases.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .errors import InvalidArgument
from .lattice import INTEGRALITY_TOL, PAULI_LABELS, GkpLattice, LogicalFrame, pauli_class
from .symplectic import as_integer_matrix, integer_inverse, omega


@dataclass(frozen=True)
class GaugeState:
    mu: tuple[int, ...]
    upsilon: tuple[int, int, int] = (0, 0, 0)

    def apply_to(self, frame: LogicalFrame) -> LogicalFrame:
        return frame.with_gauge(self.mu, self.upsilon)


def _bits(v: Iterable) -> tuple[int, ...]:
    return tuple(int(x) % 2 for x in v)


def lower_triangle(A: np.ndarray) -> np.ndarray:
    """Strictly lower-triangular part of the symplectic Gram matrix."""
    return np.tril(np.asarray(A, dtype=np.int64), -1)


def _int_coords(lat: GkpLattice, v: np.ndarray, what: str = "vector") -> np.ndarray:
    a = lat.coords(v)
    r = np.rint(a)
    if np.max(np.abs(a - r), initial=0.0) > INTEGRALITY_TOL:
        raise InvalidArgument(f"{what} is not a lattice vector")
    return r.astype(np.int64)


def nu_exponent(A_low: np.ndarray, a: np.ndarray, mu: Iterable[int]) -> int:
    """Bit e with nu = (-1)**e for integer coordinates ``a``."""
    a = np.asarray(a, dtype=np.int64)
    return int(a @ A_low @ a + a @ np.asarray(tuple(mu), dtype=np.int64)) % 2


def nu(lat: GkpLattice, mu: Iterable[int], lam: np.ndarray) -> int:
    """Eigenvalue (+1 or -1) of T(lam) on code words in stabilizer gauge ``mu``."""
    a = _int_coords(lat, lam, "lambda")
    return 1 - 2 * nu_exponent(lower_triangle(lat.A), a, mu)


def _omega_int(u: np.ndarray, v: np.ndarray, what: str) -> int:
    w = float(np.asarray(u) @ omega(len(u) // 2) @ np.asarray(v))
    r = round(w)
    if abs(w - r) > INTEGRALITY_TOL:
        raise InvalidArgument(f"{what} is not integral ({w:.6g})")
    return int(r)


def nu_pauli_exponent(lat: GkpLattice, frame: LogicalFrame, pauli: str, p: np.ndarray) -> int:
    p0 = frame.rep(pauli)
    idx = PAULI_LABELS.index(pauli)
    a = _int_coords(lat, np.asarray(p, dtype=float) - p0, f"p - p0({pauli})")
    return (_omega_int(p0, p, "p0^T Omega p") + frame.upsilon[idx] + nu_exponent(lower_triangle(lat.A), a, frame.mu)) % 2


def nu_pauli(lat: GkpLattice, frame: LogicalFrame, pauli: str, p: np.ndarray) -> int:
    """Sign s such that s * T(p) acts as the logical ``pauli`` for p in its class."""
    if pauli not in PAULI_LABELS:
        raise InvalidArgument(f"pauli must be one of X, Y, Z, got {pauli!r}")
    return 1 - 2 * nu_pauli_exponent(lat, frame, pauli, p)


######################################################################
# Validity
######################################################################


def rational_inverse(A: np.ndarray) -> list[list[Fraction]]:
    """Exact inverse of an integer matrix by Gauss-Jordan over the rationals."""
    n = len(A)
    M = [[Fraction(int(A[i][j])) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise InvalidArgument("matrix is singular")
        M[col], M[piv] = M[piv], M[col]
        inv_p = 1 / M[col][col]
        M[col] = [x * inv_p for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


def validate_gauge(lat: GkpLattice, mu: Iterable[int]) -> bool:
    """True iff 2 A^-1 mu is even, i.e. logical Paulis have real eigenvalues."""
    Ainv = rational_inverse(lat.A)
    mu = [int(x) for x in mu]
    for row in Ainv:
        v = 2 * sum((c * x for c, x in zip(row, mu)), Fraction(0))
        if v.denominator != 1 or v.numerator % 2:
            return False
    return True


def valid_gauges(lat: GkpLattice) -> list[tuple[int, ...]]:
    return [mu for mu in itertools.product((0, 1), repeat=lat.dim) if validate_gauge(lat, mu)]


######################################################################
# Updates
######################################################################


def update_mu_after_translation(lat: GkpLattice, mu: Iterable[int], tau: np.ndarray) -> tuple[int, ...]:
    """Stabilizer gauge after the physical translation T(tau/2).

    ``tau`` may be any dual-lattice vector (this covers both lattice vectors
    and the gauge-setting translations, which generally lie in the dual).
    """
    c = lat.dual_coords(tau)
    r = np.rint(c)
    if np.max(np.abs(c - r)) > INTEGRALITY_TOL:
        raise InvalidArgument("tau must lie in the dual lattice")
    return _bits(np.asarray(tuple(mu)) + r.astype(np.int64))


def update_after_translation(lat: GkpLattice, frame: LogicalFrame, tau: np.ndarray) -> GaugeState:
    """Full gauge after T(tau/2); the Pauli frame needs L0 Omega tau integral."""
    tau = np.asarray(tau, dtype=float)
    mu = update_mu_after_translation(lat, frame.mu, tau)
    if frame.L0 is None:
        return GaugeState(mu, frame.upsilon)
    shift = [_omega_int(p0, tau, "L0 Omega tau") for p0 in frame.L0]
    return GaugeState(mu, _bits(np.asarray(frame.upsilon) + shift))


def gauge_setting_translation(lat: GkpLattice, mu: Iterable[int], mu_target: Iterable[int]) -> np.ndarray:
    """tau such that T(tau/2) moves the stabilizer gauge from ``mu`` to ``mu_target``."""
    diff = np.array(_bits(np.asarray(tuple(mu_target)) + np.asarray(tuple(mu))), dtype=float)
    return -omega(lat.m) @ np.linalg.solve(lat.S, diff)


def lattice_action(lat: GkpLattice, M: np.ndarray) -> np.ndarray:
    """Integer matrix N^T = S M^T S^-1, or invalid-argument if M is not a lattice symmetry."""
    NT = np.asarray(lat.S) @ np.asarray(M, dtype=float).T @ np.linalg.inv(lat.S)
    try:
        NT = as_integer_matrix(NT, INTEGRALITY_TOL)
        integer_inverse(NT)
    except Exception as exc:
        raise InvalidArgument("M does not map the lattice onto itself") from exc
    return NT


def update_mu_after_gaussian(lat: GkpLattice, mu: Iterable[int], M: np.ndarray) -> tuple[int, ...]:
    NT = lattice_action(lat, M)
    diag = np.diag(NT @ lower_triangle(lat.A) @ NT.T)
    return _bits(integer_inverse(NT) @ (np.asarray(tuple(mu)) + diag))


def logical_action(lat: GkpLattice, frame: LogicalFrame, M: np.ndarray) -> np.ndarray:
    """Unsigned Pauli permutation induced by M: entry (i, j) = 1 if M maps class j to class i."""
    P = np.zeros((3, 3), dtype=np.int64)
    for j, label in enumerate(PAULI_LABELS):
        image = pauli_class(lat, frame, np.asarray(M) @ frame.rep(label))
        if image not in PAULI_LABELS:
            raise InvalidArgument("M does not permute the logical Pauli classes")
        P[PAULI_LABELS.index(image), j] = 1
    return P


def update_after_gaussian(
    lat: GkpLattice, frame: LogicalFrame, M: np.ndarray, M_L: Optional[np.ndarray] = None
) -> GaugeState:
    """Gauge after the Gaussian unitary Q(M) for a lattice symmetry M.

    ``M_L`` is the signed 3x3 Pauli permutation of the logical action, with
    entry (i, j) = +1 or -1 when the old Pauli j is conjugated onto the new
    Pauli i with that sign. If omitted, all signs are taken as +1.
    """
    M = np.asarray(M, dtype=float)
    mu_new = update_mu_after_gaussian(lat, frame.mu, M)
    if frame.L0 is None:
        return GaugeState(mu_new, frame.upsilon)
    perm = logical_action(lat, frame, M)
    if M_L is None:
        M_L = perm
    M_L = np.asarray(M_L, dtype=np.int64)
    if not np.array_equal(np.abs(M_L), perm):
        raise InvalidArgument("M_L does not match the Pauli permutation induced by M")
    A_low = lower_triangle(lat.A)
    ups = [0, 0, 0]
    for i, j in zip(*np.nonzero(M_L)):
        sign_bit = 0 if M_L[i, j] > 0 else 1
        image = M @ frame.L0[j]
        new_rep = frame.L0[i]
        a = _int_coords(lat, image - new_rep, "M p0 - p0'")
        ups[i] = (
            frame.upsilon[j]
            + sign_bit
            + _omega_int(new_rep, image, "p0'^T Omega M p0")
            + nu_exponent(A_low, a, mu_new)
        ) % 2
    return GaugeState(mu_new, tuple(ups))


def update_after_basis_change(lat: GkpLattice, R: np.ndarray, mu: Iterable[int]) -> tuple[int, ...]:
    """Stabilizer gauge for the new basis R S (R integer; Lambda' may be a sublattice)."""
    R = np.asarray(R)
    if np.max(np.abs(R - np.rint(R)), initial=0.0) > INTEGRALITY_TOL:
        raise InvalidArgument("basis change must be an integer matrix")
    R = np.rint(R).astype(np.int64)
    diag = np.diag(R @ lower_triangle(lat.A) @ R.T)
    return _bits(R @ np.asarray(tuple(mu)) + diag)


def update_upsilon_for_representatives(lat: GkpLattice, frame: LogicalFrame, L0_new: np.ndarray) -> tuple[int, ...]:
    """Pauli frame for new base representatives of the same classes on the same lattice."""
    L0_new = np.asarray(L0_new, dtype=float)
    A_low = lower_triangle(lat.A)
    ups = []
    for k, (old, new) in enumerate(zip(frame.L0, L0_new)):
        b = _int_coords(lat, new - old, "p0' - p0")
        ups.append((frame.upsilon[k] + _omega_int(old, new, "p0^T Omega p0'") + nu_exponent(A_low, b, frame.mu)) % 2)
    return tuple(ups)


def preserving_gauges(lat: GkpLattice, M: np.ndarray, require_valid: bool = True) -> list[tuple[int, ...]]:
    """Exhaustive search for gauges left unchanged by the lattice symmetry M."""
    out = []
    for mu in itertools.product((0, 1), repeat=lat.dim):
        if update_mu_after_gaussian(lat, mu, M) == mu and (not require_valid or validate_gauge(lat, mu)):
            out.append(mu)
    return out


def upsilon_consistent(lat: GkpLattice, frame: LogicalFrame) -> bool:
    """Check that the Y entry of upsilon agrees with the X and Z entries.

    Uses Y = i X Z together with T(x0) T(z0) = exp(-i pi w) T(x0 + z0),
    where w = x0^T Omega z0 is a half-odd integer for anticommuting
    representatives.
    """
    if frame.L0 is None:
        return True
    x0, _, z0 = frame.L0
    w = float(x0 @ omega(lat.m) @ z0)
    k = round(w - 0.5)
    if abs(w - 0.5 - k) > INTEGRALITY_TOL:
        raise InvalidArgument("x0 and z0 do not anticommute")
    expected = (frame.upsilon[0] + frame.upsilon[2] + k) % 2
    return nu_pauli_exponent(lat, frame, "Y", x0 + z0) == expected
