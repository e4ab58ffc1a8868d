"""GKP lattices: construction, named catalog, short-vector enumeration and Pauli classes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.special import erfc, gammaln

from .errors import (
    CapacityError,
    DegenerateLattice,
    DimensionError,
    InvalidArgument,
    UnsupportedDimension,
)
from .symplectic import as_integer_matrix, integer_det, omega, symplectic_gram

INTEGRALITY_TOL = 1e-6
MAX_POINTS = 10**6
PAULI_LABELS = ("X", "Y", "Z")


def _is_integral(x: np.ndarray, tol: float = INTEGRALITY_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(np.abs(x - np.rint(x)) <= tol))


@dataclass(frozen=True, eq=False)
class GkpLattice:
    """Stabilizer lattice of a GKP code.

    Rows of ``S`` are the generators s_j, in units of sqrt(2*pi). The dual
    generator ``S_dual = A^-1 S`` spans the lattice of vectors with integer
    symplectic form against every s_j.
    """

    S: np.ndarray
    A: np.ndarray
    d: int
    S_dual: np.ndarray
    name: str = "custom"

    @property
    def m(self) -> int:
        return self.S.shape[0] // 2

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    def coords(self, v: np.ndarray) -> np.ndarray:
        """Coefficients a with v = S^T a (rows of v are vectors)."""
        return np.linalg.solve(self.S.T, np.asarray(v, dtype=float).T).T

    def in_lattice(self, v: np.ndarray, tol: float = INTEGRALITY_TOL) -> bool:
        return _is_integral(self.coords(v), tol)

    def dual_coords(self, v: np.ndarray) -> np.ndarray:
        """Integer symplectic products S Omega v for v in the dual lattice."""
        return np.asarray(v, dtype=float) @ omega(self.m).T @ self.S.T

    def in_dual(self, v: np.ndarray, tol: float = INTEGRALITY_TOL) -> bool:
        return _is_integral(self.dual_coords(v), tol)

    def scaled(self, c: float) -> "GkpLattice":
        return build(c * self.S, name=f"{self.name}*{c:g}")

    def __repr__(self) -> str:
        return f"GkpLattice(name={self.name!r}, m={self.m}, d={self.d})"


def build(S: np.ndarray, name: str = "custom", tol: float = 1e-9) -> GkpLattice:
    """Validate a generator matrix and derive A, d and the dual generator."""
    S = np.array(S, dtype=float)
    n = S.shape[0]
    if S.ndim != 2 or S.shape != (n, n) or n % 2 or n == 0:
        raise InvalidArgument(f"generator must be an even square matrix, got shape {S.shape}")
    if abs(np.linalg.det(S)) < 1e-12:
        raise DegenerateLattice("generator matrix is singular")
    A = as_integer_matrix(symplectic_gram(S), tol)
    det_a = integer_det(A)
    if det_a <= 0:
        raise DegenerateLattice("symplectic Gram matrix is singular")
    d = math.isqrt(det_a)
    if d * d != det_a:
        raise DimensionError(f"det(A) = {det_a} is not a perfect square")
    S_dual = np.linalg.solve(A.astype(float), S)
    S.setflags(write=False)
    A.setflags(write=False)
    S_dual.setflags(write=False)
    return GkpLattice(S=S, A=A, d=d, S_dual=S_dual, name=name)


@dataclass(frozen=True, eq=False)
class LogicalFrame:
    """Base Pauli representatives (rows x0, y0, z0) plus the sign gauge."""

    L0: Optional[np.ndarray]
    mu: tuple[int, ...]
    upsilon: tuple[int, int, int] = (0, 0, 0)

    def rep(self, pauli: str) -> np.ndarray:
        if self.L0 is None:
            raise UnsupportedDimension("frame carries no logical representatives")
        if pauli == "I":
            return np.zeros(self.L0.shape[1])
        return self.L0[PAULI_LABELS.index(pauli)]

    def with_gauge(self, mu=None, upsilon=None) -> "LogicalFrame":
        return replace(
            self,
            mu=self.mu if mu is None else tuple(int(x) % 2 for x in mu),
            upsilon=self.upsilon if upsilon is None else tuple(int(x) % 2 for x in upsilon),
        )


def trivial_frame(lat: GkpLattice, L0: Optional[np.ndarray] = None) -> LogicalFrame:
    if L0 is not None:
        L0 = np.array(L0, dtype=float)
        L0.setflags(write=False)
    return LogicalFrame(L0=L0, mu=(0,) * lat.dim)


######################################################################
# LLL reduction and enumeration
######################################################################


def lll_reduce(S: np.ndarray, delta: float = 0.75) -> tuple[np.ndarray, np.ndarray]:
    """LLL-reduce the rows of ``S``; returns (R, R @ S) with R unimodular."""
    B = np.array(S, dtype=float)
    n = B.shape[0]
    R = np.eye(n, dtype=np.int64)

    def gram_schmidt(B):
        Bs = np.zeros_like(B)
        mu = np.zeros((n, n))
        for i in range(n):
            v = B[i].copy()
            for j in range(i):
                mu[i, j] = B[i] @ Bs[j] / (Bs[j] @ Bs[j])
                v -= mu[i, j] * Bs[j]
            Bs[i] = v
        return Bs, mu

    Bs, mu = gram_schmidt(B)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = int(np.rint(mu[k, j]))
            if q:
                B[k] -= q * B[j]
                R[k] -= q * R[j]
                mu[k, : j + 1] -= q * np.append(mu[j, :j], 1.0)
        if Bs[k] @ Bs[k] >= (delta - mu[k, k - 1] ** 2) * (Bs[k - 1] @ Bs[k - 1]):
            k += 1
        else:
            B[[k, k - 1]] = B[[k - 1, k]]
            R[[k, k - 1]] = R[[k - 1, k]]
            Bs, mu = gram_schmidt(B)
            k = max(k - 1, 1)
    return R, R @ np.asarray(S, dtype=float)


def _short_vectors(basis: np.ndarray, radius: float, cap: int) -> np.ndarray:
    """Integer combinations of ``basis`` rows with norm <= radius (Fincke-Pohst)."""
    n = basis.shape[0]
    G = basis @ basis.T
    U = np.linalg.cholesky(G).T  # G = U^T U, U upper triangular
    q = np.diag(U) ** 2
    mu = U / np.diag(U)[:, None]
    r2 = radius * radius * (1 + 1e-12) + 1e-15
    found: list[np.ndarray] = []
    x = np.zeros(n, dtype=np.int64)

    def recurse(i: int, remaining: float) -> None:
        c = -float(mu[i, i + 1 :] @ x[i + 1 :])
        span = math.sqrt(max(remaining, 0.0) / q[i])
        for xi in range(math.ceil(c - span - 1e-12), math.floor(c + span + 1e-12) + 1):
            rest = remaining - q[i] * (xi - c) ** 2
            if rest < -1e-12:
                continue
            x[i] = xi
            if i == 0:
                found.append(x.copy())
                if len(found) > cap:
                    raise CapacityError(f"more than {cap} lattice points within radius {radius}")
            else:
                recurse(i - 1, rest)
        x[i] = 0

    recurse(n - 1, r2)
    coeffs = np.array(found, dtype=np.int64).reshape(-1, n)
    return coeffs @ basis


def enumerate_points(
    lat: GkpLattice, radius: float, dual: bool = False, cap: int = MAX_POINTS
) -> np.ndarray:
    """All lattice (or dual) points with norm <= radius, sorted by norm then lexicographically."""
    if radius <= 0:
        raise InvalidArgument("radius must be positive")
    _, basis = lll_reduce(lat.S_dual if dual else lat.S)
    pts = _short_vectors(basis, radius, cap)
    pts = pts[np.linalg.norm(pts, axis=1) <= radius * (1 + 1e-12)]
    # Clean floating dust so exact zeros sort consistently.
    pts = np.where(np.abs(pts) < 1e-12, 0.0, pts)
    keys = np.round(pts, 9)
    order = np.lexsort(tuple(keys[:, ::-1].T) + (np.round(np.linalg.norm(pts, axis=1), 9),))
    return pts[order]


def shortest_length(lat: GkpLattice, dual: bool = False, exclude_lattice: bool = False) -> float:
    """Minimum nonzero norm in the lattice or its dual (optionally over dual minus lattice)."""
    _, basis = lll_reduce(lat.S_dual if dual else lat.S)
    rows = [b for b in basis if not (exclude_lattice and lat.in_lattice(b))]
    if not rows:
        raise UnsupportedDimension("dual lattice equals the lattice (d = 1)")
    radius = min(np.linalg.norm(b) for b in rows)
    pts = enumerate_points(lat, radius, dual=dual)
    best = math.inf
    for p in pts:
        norm = float(np.linalg.norm(p))
        if norm < 1e-9 or (exclude_lattice and lat.in_lattice(p)):
            continue
        best = min(best, norm)
    return best


######################################################################
# Pauli classes
######################################################################


def _coset_key(lat: GkpLattice, p: np.ndarray) -> tuple[int, ...]:
    scale = lat.d * lat.d
    a = lat.coords(p)
    return tuple(int(v) % scale for v in np.rint(np.mod(a, 1.0) * scale))


def pauli_class(lat: GkpLattice, frame: LogicalFrame, p: np.ndarray) -> Optional[str]:
    """Logical Pauli label of a dual vector, or None if p is not in the dual lattice."""
    if lat.d != 2:
        raise UnsupportedDimension(f"pauli_class needs a qubit code, got d = {lat.d}")
    p = np.asarray(p, dtype=float)
    if not lat.in_dual(p):
        return None
    for label in ("I",) + PAULI_LABELS:
        if lat.in_lattice(p - frame.rep(label)):
            return label
    raise InvalidArgument("frame representatives do not cover the dual quotient")


def derive_logical_basis(lat: GkpLattice) -> np.ndarray:
    """Minimum-length representatives of the three nontrivial classes of a qubit code.

    The two shortest classes become X and Z (ties broken by enumeration order)
    and the remaining class is Y.
    """
    if lat.d != 2:
        raise UnsupportedDimension(f"logical basis needs d = 2, got {lat.d}")
    radius = shortest_length(lat, dual=True, exclude_lattice=True)
    reps: dict[tuple[int, ...], np.ndarray] = {}
    zero_key = _coset_key(lat, np.zeros(lat.dim))
    while len(reps) < 3:
        for p in enumerate_points(lat, radius, dual=True):
            key = _coset_key(lat, p)
            if key != zero_key and key not in reps:
                reps[key] = p
        radius *= 1.25
    ordered = sorted(reps.values(), key=lambda v: round(float(np.linalg.norm(v)), 9))
    x0, z0, y0 = ordered
    return np.vstack([x0, y0, z0])


######################################################################
# Packing metrics
######################################################################


def unit_ball_volume(n: int) -> float:
    return math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1))


@dataclass(frozen=True)
class PackingReport:
    min_stab_len: float
    min_pauli_len: Optional[float]
    packing_ratio: float
    max_correctable_radius: float
    m: int = field(repr=False, default=1)
    d: int = field(repr=False, default=1)

    def scale(self) -> float:
        """(Delta / (d V_2m))^(1/2m), the dual packing radius."""
        return self.max_correctable_radius / 2

    def gaussian_error_estimate(self, sigma: float) -> float:
        if sigma <= 0:
            return 0.0
        if math.isinf(sigma):
            return 1.0
        return float(erfc(self.scale() / (sigma * math.sqrt(self.m))))


def packing_ratio(basis: np.ndarray, min_len: float) -> float:
    n = basis.shape[0]
    vol = math.sqrt(abs(np.linalg.det(basis @ basis.T)))
    return unit_ball_volume(n) * min_len**n / (2**n * vol)


def packing_report(lat: GkpLattice) -> PackingReport:
    """Shortest stabilizer and logical lengths plus sphere-packing estimates.

    The packing ratio is that of the dual lattice, whose points index the
    logical operators.
    """
    n = lat.dim
    min_stab = shortest_length(lat)
    min_dual = shortest_length(lat, dual=True)
    min_pauli = shortest_length(lat, dual=True, exclude_lattice=True) if lat.d > 1 else None
    delta = packing_ratio(lat.S_dual, min_dual)
    radius = 2 * (delta / (lat.d * unit_ball_volume(n))) ** (1 / n)
    return PackingReport(
        min_stab_len=min_stab,
        min_pauli_len=min_pauli,
        packing_ratio=delta,
        max_correctable_radius=radius,
        m=lat.m,
        d=lat.d,
    )


######################################################################
# Catalog
######################################################################

_R2 = math.sqrt(2.0)
_Q2 = 2**0.25


def _direct_sum(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


def _single_mode_L0(S: np.ndarray) -> np.ndarray:
    s1, s2 = S
    return np.vstack([s1 / 2, (s1 + s2) / 2, s2 / 2])


def _d2m_generator(m: int) -> np.ndarray:
    n = 2 * m
    S = np.zeros((n, n))
    for i in range(n - 1):
        S[i, i] = 1
        S[i, i + 1] = -1
    S[n - 1, n - 2] = 1
    S[n - 1, n - 1] = 1
    return S


def _d2m_L0(m: int) -> np.ndarray:
    n = 2 * m
    L0 = np.zeros((3, n))
    L0[0] = 0.5
    L0[1] = 0.5
    L0[1, 0] = -0.5
    L0[2, 0] = 1
    return L0


def _e8_generator() -> np.ndarray:
    S = np.zeros((8, 8))
    S[0, 0] = 2
    for i in range(1, 7):
        S[i, i - 1] = -1
        S[i, i] = 1
    S[7] = 0.5
    return S


GENERATORS = {
    "square": lambda: _R2 * np.eye(2),
    "qunaught": lambda: np.eye(2),
    "diamond": lambda: np.array([[1.0, 1.0], [1.0, -1.0]]),
    "hexagonal": lambda: 2 / 3**0.25 * np.array([[1.0, 0.0], [-0.5, math.sqrt(3) / 2]]),
    "rectangular_qubit": lambda: _Q2 * np.diag([1.0, _R2]),
    "tesseract": lambda: _Q2
    * np.array(
        [
            [1, 0, 0, 0],
            [0, 1 / _R2, 0, 1 / _R2],
            [0, 0, 1, 0],
            [0, 1 / _R2, 0, -1 / _R2],
        ]
    ),
    "d4": lambda: np.array(
        [[1.0, 0, 1, 0], [1, 0, 0, -1], [0, 1, -1, 0], [1, 0, 0, 1]]
    ),
    "d4_qunaught": lambda: _Q2
    * np.array(
        [
            [1, 0, 0, 0],
            [-0.5, -1 / _R2, 0.5, 0],
            [0, 1 / _R2, 0, 1 / _R2],
            [0, 1 / _R2, 0, -1 / _R2],
        ]
    ),
    "four_mode": lambda: _Q2
    * np.array(
        [
            [1, 0, 0, 0, 0, 0, 0, 0],
            [0, 1 / _R2, 0, 1 / _R2, 0, 0, 0, 0],
            [0, 0, 1, 0, 0, 0, 0, 0],
            [0, 1 / _R2, 0, -1 / _R2, 0, 0, 0, 0],
            [0, 0, 0, 0, 1, 0, 0, 0],
            [0, 0, 0, 0, 0, 1 / _R2, 0, 1 / _R2],
            [0, 0, 0, 0, 0, 0, 1, 0],
            [0.5, 1 / _R2, 0.5, 0, 0.5, 1 / _R2, 0.5, 0],
        ]
    ),
}

STANDARD_L0 = {
    "tesseract": lambda: _Q2
    * np.array([[0.5, 0, 0.5, 0], [0.5, 1 / _R2, 0.5, 0], [0, 1 / _R2, 0, 0]]),
    "d4": lambda: np.array(
        [[0.5, 0.5, 0.5, 0.5], [-0.5, 0.5, 0.5, 0.5], [1.0, 0, 0, 0]]
    ),
    "four_mode": lambda: _Q2
    * np.array(
        [
            [0.5, 1 / _R2, 0.5, 0, 0, 0, 0, 0],
            [0.5, 0, 0.5, 0, 0, 1 / _R2, 0, 0],
            [0, 1 / _R2, 0, 0, 0, 1 / _R2, 0, 0],
        ]
    ),
}

CATALOG_NAMES = (
    "square",
    "rectangular",
    "rectangular_qubit",
    "diamond",
    "hexagonal",
    "qunaught",
    "tesseract",
    "d4",
    "d4_qunaught",
    "d2m",
    "e8",
    "four_mode",
)


def _frame_is_consistent(lat: GkpLattice, L0: np.ndarray) -> bool:
    x0, y0, z0 = L0
    return (
        all(lat.in_dual(p) and not lat.in_lattice(p) for p in L0)
        and lat.in_lattice(x0 + z0 - y0)
        and all(lat.in_lattice(2 * p) for p in L0)
    )


def catalog(name: str, **params) -> tuple[GkpLattice, LogicalFrame]:
    """Named code from the built-in catalog, with the trivial gauge.

    Parameters: ``eta`` for "rectangular" (a d = 1 rectangular qunaught,
    default sqrt(2)), ``m`` for "d2m" (default 2) and ``a`` for "e8"
    (scaling so that the code holds four qudits of dimension a; default 2).
    """
    if name == "rectangular":
        eta = float(params.get("eta", _R2))
        if eta <= 0:
            raise InvalidArgument("eta must be positive")
        lat = build(np.diag([eta, 1 / eta]), name=f"rectangular(eta={eta:g})")
        return lat, trivial_frame(lat)
    if name == "d2m":
        m = int(params.get("m", 2))
        if m < 1:
            raise InvalidArgument("d2m needs m >= 1")
        lat = build(_d2m_generator(m), name=f"d2m(m={m})")
        L0 = _d2m_L0(m)
        if not _frame_is_consistent(lat, L0):
            L0 = derive_logical_basis(lat)
        return lat, _consistent_frame(lat, trivial_frame(lat, L0))
    if name == "e8":
        a = params.get("a", 2)
        if a <= 0:
            raise InvalidArgument("e8 scaling must be positive")
        lat = build(math.sqrt(a) * _e8_generator(), name=f"e8(a={a})")
        return lat, trivial_frame(lat)
    if name not in GENERATORS:
        raise InvalidArgument(f"unknown catalog code {name!r}; choose from {', '.join(CATALOG_NAMES)}")
    lat = build(GENERATORS[name](), name=name)
    if lat.d != 2:
        return lat, trivial_frame(lat)
    if name in STANDARD_L0:
        L0 = STANDARD_L0[name]()
    elif lat.m == 1:
        L0 = _single_mode_L0(lat.S)
    else:
        L0 = derive_logical_basis(lat)
    return lat, _consistent_frame(lat, trivial_frame(lat, L0))


def _consistent_frame(lat: GkpLattice, frame: LogicalFrame) -> LogicalFrame:
    """Flip the Y sign bit when the zero frame breaks Y = i X Z (diamond, four-mode)."""
    from .gauge import upsilon_consistent

    if upsilon_consistent(lat, frame):
        return frame
    return frame.with_gauge(upsilon=(frame.upsilon[0], 1 - frame.upsilon[1], frame.upsilon[2]))
