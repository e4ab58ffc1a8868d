"""Symplectic and orthogonal linear algebra on R^{2m} and Z^{2m}.

Quadratures are ordered (q1, p1, q2, p2, ...) throughout the package, and
translation vectors are expressed in units of ``L_UNIT = sqrt(2*pi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateLattice, InvalidArgument, NotACode

L_UNIT = float(np.sqrt(2.0 * np.pi))
DEFAULT_TOL = 1e-9


def omega(m: int) -> np.ndarray:
    """Return the 2m x 2m symplectic form, a direct sum of [[0, 1], [-1, 0]]."""
    if m < 1:
        raise InvalidArgument(f"mode count must be positive, got {m}")
    return np.kron(np.eye(m), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def omega_form(u: Sequence[float], v: Sequence[float]) -> float:
    """Symplectic form u^T Omega v."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1 or u.size % 2:
        raise InvalidArgument(f"omega_form needs equal even-length vectors, got {u.shape} and {v.shape}")
    # Pairwise q_j p'_j - p_j q'_j, without building Omega.
    return float(np.sum(u[0::2] * v[1::2] - u[1::2] * v[0::2]))


def is_symplectic(M: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or n % 2:
        return False
    W = omega(n // 2)
    return bool(np.max(np.abs(M.T @ W @ M - W)) <= tol)


def is_orthogonal(M: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    M = np.asarray(M, dtype=float)
    return bool(np.max(np.abs(M.T @ M - np.eye(M.shape[0]))) <= tol)


######################################################################
# Gate matrices
######################################################################


def _check_mode(j: int, m: int) -> None:
    if not 0 <= j < m:
        raise InvalidArgument(f"mode index {j} out of range for {m} modes")


def rotation(theta: float, mode: int = 0, m: int = 1) -> np.ndarray:
    """Phase-space rotation by ``theta`` of one mode, identity elsewhere."""
    _check_mode(mode, m)
    M = np.eye(2 * m)
    c, s = np.cos(theta), np.sin(theta)
    M[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2] = [[c, -s], [s, c]]
    return M


def beamsplitter(j: int = 0, k: int = 1, m: int = 2) -> np.ndarray:
    """Balanced beamsplitter from mode j to mode k."""
    _check_mode(j, m)
    _check_mode(k, m)
    if j == k:
        raise InvalidArgument("beamsplitter needs two distinct modes")
    M = np.eye(2 * m)
    r = 1.0 / np.sqrt(2.0)
    for a in range(2):  # q block then p block
        jj, kk = 2 * j + a, 2 * k + a
        M[jj, jj] = r
        M[jj, kk] = -r
        M[kk, jj] = r
        M[kk, kk] = r
    return M


def shear(c: float, mode: int = 0, m: int = 1) -> np.ndarray:
    """Shear p -> p + c q on one mode, generated by exp(i c q^2 / 2)."""
    _check_mode(mode, m)
    M = np.eye(2 * m)
    M[2 * mode + 1, 2 * mode] = c
    return M


def sum_gate(j: int, k: int, lam: float = 1.0, m: int = 2) -> np.ndarray:
    """SUM gate exp(-i lam q_j p_k): q_k -> q_k + lam q_j, p_j -> p_j - lam p_k."""
    _check_mode(j, m)
    _check_mode(k, m)
    if j == k:
        raise InvalidArgument("SUM gate needs two distinct modes")
    M = np.eye(2 * m)
    M[2 * k, 2 * j] = lam
    M[2 * j + 1, 2 * k + 1] = -lam
    return M


def givens(i: int, j: int, theta: float, n: int = 4) -> np.ndarray:
    """Givens rotation in the (i, j) coordinate plane, 1-based indices.

    Orthogonal but generally not symplectic.
    """
    if not (1 <= i <= n and 1 <= j <= n) or i == j:
        raise InvalidArgument(f"invalid Givens axes ({i}, {j}) for dimension {n}")
    G = np.eye(n)
    c, s = np.cos(theta), np.sin(theta)
    a, b = i - 1, j - 1
    G[a, a] = c
    G[b, b] = c
    G[a, b] = -s
    G[b, a] = s
    return G


def gate_matrix(kind: str, m: int = 1, **params) -> np.ndarray:
    """Dispatch by name to the gate constructors above."""
    if kind == "rotation":
        return rotation(params.get("theta", 0.0), params.get("mode", 0), m)
    if kind == "beamsplitter":
        return beamsplitter(params.get("j", 0), params.get("k", 1), max(m, 2))
    if kind == "shear":
        return shear(params["c"], params.get("mode", 0), m)
    if kind == "sum":
        return sum_gate(params.get("j", 0), params.get("k", 1), params.get("lam", 1.0), max(m, 2))
    if kind == "givens":
        return givens(params["i"], params["j"], params["theta"], params.get("n", 2 * m))
    raise InvalidArgument(f"unknown gate kind {kind!r}")


######################################################################
# Integer helpers
######################################################################


def as_integer_matrix(A: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Round to an int64 matrix, rejecting entries further than ``tol`` from an integer."""
    A = np.asarray(A)
    if A.dtype.kind in "iu":
        return A.astype(np.int64)
    R = np.rint(A)
    if np.max(np.abs(A - R), initial=0.0) > tol:
        raise NotACode(f"matrix is not integral within {tol}: max deviation {np.max(np.abs(A - R)):.3g}")
    return R.astype(np.int64)


def integer_inverse(R: np.ndarray) -> np.ndarray:
    """Exact inverse of a unimodular integer matrix."""
    R = np.asarray(R, dtype=np.int64)
    inv = np.rint(np.linalg.inv(R.astype(float))).astype(np.int64)
    if not np.array_equal(R @ inv, np.eye(R.shape[0], dtype=np.int64)):
        raise InvalidArgument("matrix is not unimodular")
    return inv


def integer_det(A: np.ndarray) -> int:
    """Exact determinant of an integer matrix (Bareiss elimination)."""
    M = [[int(x) for x in row] for row in np.asarray(A)]
    n = len(M)
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


######################################################################
# Symplectic normal form
######################################################################


@dataclass(frozen=True)
class NormalForm:
    """Unimodular R and diagonal D with R A R^T = [[0, D], [-D, 0]]."""

    R: np.ndarray
    D: np.ndarray

    @property
    def block(self) -> np.ndarray:
        m = len(self.D)
        Dm = np.diag(self.D)
        Z = np.zeros((m, m), dtype=np.int64)
        return np.block([[Z, Dm], [-Dm, Z]])


def symplectic_normal_form(A: np.ndarray) -> NormalForm:
    """Reduce an integral antisymmetric matrix to its symplectic normal form.

    Works on Python integers: basis vectors are combined with Euclidean steps
    around the smallest nonzero pivot until every remaining entry is a
    multiple of it, which makes D the canonical elementary-divisor chain
    (each entry divides the previous one).
    """
    A = as_integer_matrix(A)
    n = A.shape[0]
    if A.shape != (n, n) or n % 2:
        raise InvalidArgument(f"normal form needs an even square matrix, got {A.shape}")
    if not np.array_equal(A, -A.T):
        raise InvalidArgument("matrix is not antisymmetric")

    G = [[int(x) for x in row] for row in A]
    B = [[int(i == j) for j in range(n)] for i in range(n)]

    def add(i: int, j: int, k: int) -> None:
        # b_i += k * b_j, updating the Gram matrix on both sides.
        if k == 0:
            return
        B[i] = [x + k * y for x, y in zip(B[i], B[j])]
        for c in range(n):
            G[i][c] += k * G[j][c]
        for r in range(n):
            G[r][i] += k * G[r][j]

    def negate(i: int) -> None:
        B[i] = [-x for x in B[i]]
        for c in range(n):
            G[i][c] = -G[i][c]
        for r in range(n):
            G[r][i] = -G[r][i]

    remaining = list(range(n))
    pairs: list[tuple[int, int, int]] = []
    while remaining:
        while True:
            best = None
            for a in remaining:
                for b in remaining:
                    if a != b and G[a][b] != 0 and (best is None or abs(G[a][b]) < abs(G[best[0]][best[1]])):
                        best = (a, b)
            if best is None:
                raise DegenerateLattice("symplectic Gram matrix is singular")
            i, j = best
            if G[i][j] < 0:
                negate(j)
            g = G[i][j]
            others = [k for k in remaining if k not in (i, j)]
            clean = True
            for k in others:
                # G(b_i, b_k - c b_j) = G_ik - c g ; G(b_j, b_k + a b_i) = G_jk - a g
                add(k, j, -(G[i][k] // g))
                add(k, i, G[j][k] // g)
                if G[i][k] or G[j][k]:
                    clean = False
            if not clean:
                continue
            bad = next(((k, l) for k in others for l in others if G[k][l] % g), None)
            if bad is not None:
                add(i, bad[0], 1)
                continue
            pairs.append((i, j, g))
            remaining = others
            break

    pairs.sort(key=lambda t: -t[2])
    R = np.array([B[i] for i, _, _ in pairs] + [B[j] for _, j, _ in pairs], dtype=np.int64)
    D = np.array([g for _, _, g in pairs], dtype=np.int64)
    out = NormalForm(R=R, D=D)
    if not np.array_equal(R @ A @ R.T, out.block):
        raise ArithmeticError("normal form verification failed")
    return out


def symplectic_gram(S: np.ndarray) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    return S @ omega(S.shape[0] // 2) @ S.T


@dataclass(frozen=True)
class GaussianMap:
    """S_target = R @ S @ M with R unimodular and M symplectic."""

    M: np.ndarray
    R: np.ndarray


def gaussian_map_between(S: np.ndarray, S_target: np.ndarray, tol: float = DEFAULT_TOL) -> Optional[GaussianMap]:
    """Find a symplectic M relating two lattice bases, or None when inequivalent."""
    S = np.asarray(S, dtype=float)
    S_target = np.asarray(S_target, dtype=float)
    if S.shape != S_target.shape or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise InvalidArgument(f"generator shapes differ or are not even-square: {S.shape} vs {S_target.shape}")
    nf_src = symplectic_normal_form(as_integer_matrix(symplectic_gram(S), tol))
    nf_tgt = symplectic_normal_form(as_integer_matrix(symplectic_gram(S_target), tol))
    if not np.array_equal(nf_src.D, nf_tgt.D):
        return None
    M = np.linalg.solve(nf_src.R @ S, nf_tgt.R @ S_target)
    R = integer_inverse(nf_tgt.R) @ nf_src.R
    return GaussianMap(M=M, R=R)
