"""Lattice identity tests, code splitting and merging, and concatenated constructions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConstructionError, InvalidArgument, InvalidSplit
from .gauge import (
    GaugeState,
    gauge_setting_translation,
    nu_pauli_exponent,
    update_after_basis_change,
    upsilon_consistent,
    validate_gauge,
)
from .lattice import (
    INTEGRALITY_TOL,
    PAULI_LABELS,
    GkpLattice,
    LogicalFrame,
    build,
    derive_logical_basis,
    enumerate_points,
    lll_reduce,
    pauli_class,
    trivial_frame,
)
from .symplectic import omega

__all__ = [
    "QubitStabilizerCode",
    "MergeSpec",
    "SplitResult",
    "same_lattice",
    "sublattice",
    "split",
    "merge",
    "required_presplit_gauges",
    "concatenate",
    "concatenate_multimode",
    "lll_reduce",
    "binary_matrix",
]


def _as_matrix(S) -> np.ndarray:
    return np.asarray(S.S if isinstance(S, GkpLattice) else S, dtype=float)


def _integral_ratio(S1: np.ndarray, S2: np.ndarray) -> bool:
    if abs(np.linalg.det(S2)) < 1e-12:
        raise InvalidArgument("generator matrix is singular")
    X = S1 @ np.linalg.inv(S2)
    return bool(np.all(np.abs(X - np.rint(X)) <= INTEGRALITY_TOL))


def sublattice(S1, S2) -> bool:
    """True iff the lattice of S1 is contained in the lattice of S2."""
    S1, S2 = _as_matrix(S1), _as_matrix(S2)
    if S1.shape != S2.shape:
        raise InvalidArgument(f"dimension mismatch: {S1.shape} vs {S2.shape}")
    if abs(np.linalg.det(S1)) < 1e-12:
        raise InvalidArgument("generator matrix is singular")
    return _integral_ratio(S1, S2)


def same_lattice(S1, S2) -> bool:
    return sublattice(S1, S2) and sublattice(S2, S1)


######################################################################
# Qubit stabilizer codes
######################################################################


def _gf2_rank(M: np.ndarray) -> int:
    M = np.array(M, dtype=np.uint8) % 2
    rank = 0
    rows, cols = M.shape
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if M[r, c]), None)
        if piv is None:
            continue
        M[[rank, piv]] = M[[piv, rank]]
        for r in range(rows):
            if r != rank and M[r, c]:
                M[r] ^= M[rank]
        rank += 1
    return rank


def gf2_solve(M: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    """One solution of M x = rhs over GF(2) (free variables set to 0), or None."""
    M = np.array(M, dtype=np.uint8) % 2
    rhs = np.array(rhs, dtype=np.uint8) % 2
    rows, cols = M.shape
    aug = np.concatenate([M, rhs[:, None]], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if aug[i, c]), None)
        if piv is None:
            continue
        aug[[r, piv]] = aug[[piv, r]]
        for i in range(rows):
            if i != r and aug[i, c]:
                aug[i] ^= aug[r]
        pivots.append(c)
        r += 1
    if np.any(aug[r:, cols]):
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = aug[i, cols]
    return x


@dataclass(frozen=True)
class QubitStabilizerCode:
    """[[n, k]] stabilizer code given by Pauli-string generators."""

    generators: tuple[str, ...]

    def __post_init__(self):
        gens = tuple(g.strip().upper() for g in self.generators)
        if not gens:
            raise InvalidArgument("a stabilizer code needs at least one generator")
        n = len(gens[0])
        for g in gens:
            if len(g) != n or set(g) - set("IXYZ"):
                raise InvalidArgument(f"invalid Pauli string {g!r}")
        object.__setattr__(self, "generators", gens)
        B = binary_matrix(self)
        for a, b in itertools.combinations(range(len(gens)), 2):
            if _symplectic_product(B[a], B[b]) % 2:
                raise InvalidArgument(f"generators {gens[a]} and {gens[b]} anticommute")
        if _gf2_rank(B) != len(gens):
            raise InvalidArgument("generators are not independent")

    @property
    def n(self) -> int:
        return len(self.generators[0])

    @property
    def k(self) -> int:
        return self.n - len(self.generators)

    @classmethod
    def parse(cls, text: str) -> "QubitStabilizerCode":
        """One Pauli string per line; blank lines and '#' comments are ignored."""
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        return cls(tuple(ln for ln in lines if ln))

    @classmethod
    def repetition(cls, n: int, axis: str = "Z") -> "QubitStabilizerCode":
        gens = []
        for j in range(n - 1):
            s = ["I"] * n
            s[j] = s[j + 1] = axis
            gens.append("".join(s))
        return cls(tuple(gens))

    def to_text(self) -> str:
        return "\n".join(self.generators) + "\n"


def binary_matrix(code: QubitStabilizerCode) -> np.ndarray:
    """Interleaved binary matrix: column 2j marks X on qubit j, column 2j+1 marks Z."""
    B = np.zeros((len(code.generators), 2 * code.n), dtype=np.int64)
    for r, g in enumerate(code.generators):
        for j, c in enumerate(g):
            B[r, 2 * j] = c in "XY"
            B[r, 2 * j + 1] = c in "ZY"
    return B


def _symplectic_product(u: np.ndarray, v: np.ndarray) -> int:
    return int(np.sum(u[0::2] * v[1::2] + u[1::2] * v[0::2]))


######################################################################
# Concatenation
######################################################################


def _direct_sum(blocks: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    i = 0
    for b in blocks:
        out[i : i + b.shape[0], i : i + b.shape[0]] = b
        i += b.shape[0]
    return out


def promote_to_full_rank(B: np.ndarray) -> np.ndarray:
    """Stack B on rows holding a single 2, choosing the 2 positions so T is full rank.

    The default places the 2s on the last columns; other placements are
    tried in lexicographic order of column sets when that is singular.
    """
    r, n = B.shape
    free = n - r
    default = tuple(range(n - free, n))
    others = (c for c in itertools.combinations(range(n), free) if c != default)
    for cols in itertools.chain([default], others):
        T = np.zeros((n, n), dtype=np.int64)
        T[:r] = B
        for i, c in enumerate(cols):
            T[r + i, c] = 2
        if abs(round(np.linalg.det(T))) > 0:
            return T
    raise ConstructionError("no placement of the 2 rows gives a full-rank matrix")


@dataclass(frozen=True)
class ConcatenatedCode:
    lattice: GkpLattice
    frame: LogicalFrame
    T: np.ndarray
    L: np.ndarray
    S_dual_formula: np.ndarray


def concatenate(base: GkpLattice, code: QubitStabilizerCode, reduce: bool = True) -> ConcatenatedCode:
    """Lift a qubit stabilizer code over copies of a single-mode qubit code.

    Each qubit uses the base code with x0 = s1/2 and z0 = s2/2, so the logical
    generator block is L = S_base^{(+)n} / 2 and the lattice is T L.
    """
    if base.m != 1 or base.d != 2:
        raise InvalidArgument("concatenation base must be a single-mode qubit code (det = 2)")
    B = binary_matrix(code)
    T = promote_to_full_rank(B)
    L = _direct_sum([np.asarray(base.S)] * code.n) / 2
    S_q = T @ L
    S_dual_formula = -(np.linalg.inv(L) @ np.linalg.inv(T)).T @ omega(code.n)
    if reduce:
        _, S_q = lll_reduce(S_q)
    lat = build(S_q, name=f"concat({base.name},{'/'.join(code.generators)})")
    L0 = derive_logical_basis(lat) if lat.d == 2 else None
    return ConcatenatedCode(lat, trivial_frame(lat, L0), T, L, S_dual_formula)


def _hermite_basis(G: np.ndarray) -> np.ndarray:
    """Row basis of the integer row span of G (exact integer elimination)."""
    rows = [[int(x) for x in r] for r in G]
    n = len(rows[0])
    basis = []
    for c in range(n):
        while True:
            nz = [r for r in rows if r[c] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda r: abs(r[c]))
            p = nz[0]
            for r in nz[1:]:
                q = r[c] // p[c]
                for j in range(n):
                    r[j] -= q * p[j]
        nz = [r for r in rows if r[c] != 0]
        if nz:
            basis.append(nz[0])
            rows = [r for r in rows if r is not nz[0]]
    return np.array(basis, dtype=np.int64)


def concatenate_multimode(
    base: GkpLattice, base_frame: LogicalFrame, code: QubitStabilizerCode, reduce: bool = True
) -> tuple[GkpLattice, LogicalFrame]:
    """Concatenate copies of a (possibly multimode) qubit code with a stabilizer code.

    The lattice is generated by every base stabilizer together with the
    translations x0, z0 of each qubit combined according to the stabilizer
    generators; a basis is extracted exactly in the coordinates of the dual
    of the separable lattice.
    """
    if base.d != 2 or base_frame.L0 is None:
        raise InvalidArgument("base must be a qubit code with logical representatives")
    n = code.n
    S_sep = _direct_sum([np.asarray(base.S)] * n)
    fine = _direct_sum([np.asarray(base.S_dual)] * n)
    x0, _, z0 = base_frame.L0
    rows = list(S_sep)
    k = base.dim
    for bits in binary_matrix(code):
        v = np.zeros(n * k)
        for j in range(n):
            v[j * k : (j + 1) * k] += bits[2 * j] * x0 + bits[2 * j + 1] * z0
        rows.append(v)
    coords = np.linalg.solve(fine.T, np.array(rows).T).T
    if np.max(np.abs(coords - np.rint(coords))) > INTEGRALITY_TOL:
        raise ConstructionError("generating vectors are not in the separable dual lattice")
    basis = _hermite_basis(np.rint(coords).astype(np.int64))
    S_q = basis @ fine
    if reduce:
        _, S_q = lll_reduce(S_q)
    lat = build(S_q, name=f"concat({base.name},{'/'.join(code.generators)})")
    L0 = derive_logical_basis(lat) if lat.d == 2 else None
    return lat, trivial_frame(lat, L0)


######################################################################
# Splitting and merging
######################################################################


@dataclass(frozen=True)
class SplitResult:
    lat_A: GkpLattice
    frame_A: LogicalFrame
    lat_B: GkpLattice
    frame_B: LogicalFrame
    fix_translation: Optional[np.ndarray] = None


def _separable(lat_A: GkpLattice, lat_B: GkpLattice) -> np.ndarray:
    return _direct_sum([np.asarray(lat_A.S), np.asarray(lat_B.S)])


def check_hierarchy(lat_A: GkpLattice, lat_B: GkpLattice, lat_C: GkpLattice) -> bool:
    """Lambda_A + Lambda_B <= Lambda_C <= Lambda_C* <= Lambda_A* + Lambda_B*."""
    S_AB = _separable(lat_A, lat_B)
    S_AB_dual = _direct_sum([np.asarray(lat_A.S_dual), np.asarray(lat_B.S_dual)])
    return (
        sublattice(S_AB, lat_C.S)
        and sublattice(lat_C.S, lat_C.S_dual)
        and sublattice(lat_C.S_dual, S_AB_dual)
    )


def _split_mu(lat_C: GkpLattice, mu_C, S_AB: np.ndarray) -> tuple[int, ...]:
    R = S_AB @ np.linalg.inv(lat_C.S)
    return update_after_basis_change(lat_C, R, mu_C)


def required_presplit_gauges(lat_C: GkpLattice, lat_A: GkpLattice, lat_B: GkpLattice) -> list[tuple[int, ...]]:
    """Gauges of C whose split image is valid on both A and B (exhaustive search)."""
    S_AB = _separable(lat_A, lat_B)
    out = []
    for mu in itertools.product((0, 1), repeat=lat_C.dim):
        mu_AB = _split_mu(lat_C, mu, S_AB)
        if validate_gauge(lat_A, mu_AB[: lat_A.dim]) and validate_gauge(lat_B, mu_AB[lat_A.dim :]):
            out.append(mu)
    return out


def _class_representatives(lat: GkpLattice, frame: LogicalFrame, per_class: int = 4) -> dict[str, list[np.ndarray]]:
    reps: dict[str, list[np.ndarray]] = {p: [] for p in PAULI_LABELS}
    radius = 1.01 * max(np.linalg.norm(frame.L0, axis=1))
    for p in enumerate_points(lat, radius * 1.5, dual=True):
        label = pauli_class(lat, frame, p)
        if label in reps and len(reps[label]) < per_class:
            reps[label].append(p)
    return reps


def _frame_sign_rows(lat: GkpLattice, frame: LogicalFrame, label: str, p: np.ndarray) -> tuple[np.ndarray, int]:
    """Coefficient row over upsilon and the upsilon-independent bit of nu^P(p)."""
    row = np.zeros(3, dtype=np.int64)
    if label == "I":
        return row, nu_pauli_exponent_identity(lat, frame, p)
    zero = frame.with_gauge(upsilon=(0, 0, 0))
    row[PAULI_LABELS.index(label)] = 1
    return row, nu_pauli_exponent(lat, zero, label, p)


def nu_pauli_exponent_identity(lat: GkpLattice, frame: LogicalFrame, p: np.ndarray) -> int:
    from .gauge import lower_triangle, nu_exponent

    a = np.rint(lat.coords(p)).astype(np.int64)
    return nu_exponent(lower_triangle(lat.A), a, frame.mu)


def _consistency_row(lat: GkpLattice, frame: LogicalFrame) -> tuple[np.ndarray, int]:
    """Linear constraint on upsilon from Y = i X Z."""
    x0, _, z0 = frame.L0
    w = float(x0 @ omega(lat.m) @ z0)
    k = round(w - 0.5)
    zero = frame.with_gauge(upsilon=(0, 0, 0))
    y_bit = nu_pauli_exponent(lat, zero, "Y", x0 + z0)
    # upsilon_y + y_bit = upsilon_x + upsilon_z + k
    return np.array([1, 1, 1], dtype=np.int64), (y_bit + k) % 2


def split(
    lat_C: GkpLattice,
    frame_C: LogicalFrame,
    target_A: tuple[GkpLattice, LogicalFrame],
    target_B: tuple[GkpLattice, LogicalFrame],
) -> SplitResult:
    """Reinterpret a code C as two separable codes A (first modes) and B.

    The stabilizer gauge is converted by the basis change S_AB = R S_C. The
    Pauli frames of A and B are fixed by requiring every short
    representative p = p_A + p_B of a C logical to satisfy
    nu_C(p) = nu_A(p_A) nu_B(p_B) where compatible with Y = i X Z on each
    part; the linear system is solved over GF(2) with the base
    representatives taking precedence. When the converted
    gauge is invalid, ``fix_translation`` holds the tau whose half
    translation T(tau/2), applied before splitting, moves C to a gauge
    whose split is valid.
    """
    lat_A, frame_A = target_A
    lat_B, frame_B = target_B
    if lat_A.dim + lat_B.dim != lat_C.dim:
        raise InvalidSplit("mode partition does not match the code size")
    if not check_hierarchy(lat_A, lat_B, lat_C):
        raise InvalidSplit("lattice hierarchy A+B <= C <= C* <= A*+B* is violated")
    nA = lat_A.dim
    mu_AB = _split_mu(lat_C, frame_C.mu, _separable(lat_A, lat_B))
    mu_A, mu_B = mu_AB[:nA], mu_AB[nA:]
    fix = None
    if not (validate_gauge(lat_A, mu_A) and validate_gauge(lat_B, mu_B)):
        candidates = required_presplit_gauges(lat_C, lat_A, lat_B)
        if not candidates:
            raise InvalidSplit("no stabilizer gauge of C splits into valid gauges")
        target = min(candidates, key=lambda mu: (sum(a != b for a, b in zip(mu, frame_C.mu)), mu))
        fix = gauge_setting_translation(lat_C, frame_C.mu, target)
        return SplitResult(lat_A, frame_A.with_gauge(mu_A), lat_B, frame_B.with_gauge(mu_B), fix)

    fA = frame_A.with_gauge(mu_A, (0, 0, 0))
    fB = frame_B.with_gauge(mu_B, (0, 0, 0))
    equations = []
    for offset, (lat, f) in enumerate(((lat_A, fA), (lat_B, fB))):
        row, bit = _consistency_row(lat, f)
        full = np.zeros(6, dtype=np.int64)
        full[3 * offset : 3 * offset + 3] = row
        equations.append((full, bit, True))
    reps = _class_representatives(lat_C, frame_C)
    ordered = [(label, frame_C.rep(label)) for label in ("X", "Z", "Y")]
    ordered += sorted(
        ((label, p) for label, vecs in reps.items() for p in vecs),
        key=lambda t: float(np.linalg.norm(t[1])),
    )
    for label, p in ordered:
        pA, pB = p[:nA], p[nA:]
        cA, cB = pauli_class(lat_A, fA, pA), pauli_class(lat_B, fB, pB)
        if cA is None or cB is None:
            raise InvalidSplit("C logical does not decompose into A and B logicals")
        rowA, bitA = _frame_sign_rows(lat_A, fA, cA, pA)
        rowB, bitB = _frame_sign_rows(lat_B, fB, cB, pB)
        rhs = (nu_pauli_exponent(lat_C, frame_C, label, p) + bitA + bitB) % 2
        equations.append((np.concatenate([rowA, rowB]), rhs, False))

    # Y = iXZ on each part is mandatory. Representatives (base ones first)
    # are matched while they stay compatible: the algebra can force a sign
    # between a C logical and the AB product of its representative.
    rows: list[np.ndarray] = []
    rhs_bits: list[int] = []
    for row, bit, required in equations:
        if gf2_solve(np.array(rows + [row]), np.array(rhs_bits + [bit])) is not None:
            rows.append(row)
            rhs_bits.append(bit)
        elif required:
            raise InvalidSplit("Pauli frame equations are inconsistent for this gauge")
    sol = gf2_solve(np.array(rows), np.array(rhs_bits))
    return SplitResult(
        lat_A, fA.with_gauge(upsilon=sol[:3]), lat_B, fB.with_gauge(upsilon=sol[3:]), None
    )


@dataclass(frozen=True)
class MergeSpec:
    lam_m: np.ndarray
    outcome: int = 1

    def __post_init__(self):
        if self.outcome not in (1, -1):
            raise InvalidArgument("merge outcome must be +1 or -1")


def merge(
    part_A: tuple[GkpLattice, LogicalFrame],
    part_B: tuple[GkpLattice, LogicalFrame],
    spec: MergeSpec,
    target_S: np.ndarray,
    target_L0: Optional[np.ndarray] = None,
    replace_row: Optional[int] = None,
) -> tuple[GkpLattice, GaugeState]:
    """Merge two codes by measuring T(lam_m) and re-expressing the result in basis ``target_S``.

    The last generator of B is replaced by lam_m unless ``replace_row``
    says otherwise. The merged Pauli frame uses base representatives
    ``target_L0`` (derived by enumeration if omitted) and signs
    nu_A(p_A) nu_B(p_B) for p0_C = p_A + p_B.
    """
    lat_A, frame_A = part_A
    lat_B, frame_B = part_B
    lam = np.asarray(spec.lam_m, dtype=float)
    S_AB = _separable(lat_A, lat_B)
    if lam.shape != (S_AB.shape[0],):
        raise InvalidArgument("merge vector has the wrong dimension")
    if _integral_ratio(lam[None, :], S_AB):
        raise InvalidArgument("merge vector already lies in the separable lattice")
    row = S_AB.shape[0] - 1 if replace_row is None else replace_row
    S_prime = S_AB.copy()
    S_prime[row] = lam
    if abs(np.linalg.det(S_prime)) < 1e-9:
        raise InvalidArgument("replacing this generator by the merge vector gives a singular basis")
    mu_prime = list(frame_A.mu) + list(frame_B.mu)
    mu_prime[row] = 0 if spec.outcome == 1 else 1
    lat_prime = build(S_prime, name="merged")
    target_S = np.asarray(target_S, dtype=float)
    if not same_lattice(target_S, S_prime):
        raise InvalidArgument("target basis does not span the merged lattice")
    R = target_S @ np.linalg.inv(S_prime)
    mu_C = update_after_basis_change(lat_prime, R, mu_prime)
    lat_C = build(target_S, name="merged")
    if lat_C.d != 2:
        return lat_C, GaugeState(mu_C, (0, 0, 0))
    L0 = derive_logical_basis(lat_C) if target_L0 is None else np.asarray(target_L0, dtype=float)
    nA = lat_A.dim
    ups = []
    for p0 in L0:
        pA, pB = p0[:nA], p0[nA:]
        bits = 0
        for lat, f, q in ((lat_A, frame_A, pA), (lat_B, frame_B, pB)):
            label = pauli_class(lat, f, q)
            if label is None:
                raise InvalidArgument("merged representative does not split into A and B logicals")
            bits += nu_pauli_exponent_identity(lat, f, q) if label == "I" else nu_pauli_exponent(lat, f, label, q)
        ups.append(bits % 2)
    frame_C = LogicalFrame(L0, mu_C, tuple(ups))
    if not upsilon_consistent(lat_C, frame_C):
        # The product sign of the Y representative can disagree with i X Z
        # on the merged code space; Y follows from X and Z.
        ups[1] ^= 1
    return lat_C, GaugeState(mu_C, tuple(ups))
