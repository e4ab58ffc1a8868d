"""Classical dissipation model for qubit-based error correction.

A phase-space point e (translation units) relaxes under the modular
gradient flow of Phi = |q_m|^2 / 2 with q_m = 2 pi wrap(S Omega e). In the
stabilizer coordinates z = S Omega e the flow reads dz/dt = -G wrap(z) with
G = S S^T (time rescaled by (2 pi)^2), and it stops at a dual-lattice point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ClassificationError, FlowStalled, InvalidArgument
from .lattice import GkpLattice, LogicalFrame, pauli_class
from .symplectic import L_UNIT, omega

__all__ = [
    "FlowConfig",
    "SmearConfig",
    "ProbabilityEstimate",
    "HessianReport",
    "wrap",
    "flow_relax",
    "relax_batch",
    "classify_error",
    "classify_batch",
    "smeared_error_prob",
    "ancilla_decay_error_prob",
    "error_map_grid",
    "hessian_rates",
    "sigma_from_epsilon",
    "straight_path",
    "zigzag_path",
    "isthmus_waypoints",
]

BOUNDARY = "boundary"


@dataclass(frozen=True)
class FlowConfig:
    step: float = 0.01
    max_steps: int = 100_000
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if self.step <= 0 or self.convergence_tol <= 0 or self.max_steps < 1:
            raise InvalidArgument("flow step, tolerance and step budget must be positive")


def sigma_from_epsilon(epsilon: float) -> float:
    """Peak width sqrt(tanh(arcsinh(2 eps) / 2)) in quadrature units."""
    if epsilon <= 0:
        raise InvalidArgument("epsilon must be positive")
    return math.sqrt(math.tanh(math.asinh(2 * epsilon) / 2))


@dataclass(frozen=True)
class SmearConfig:
    """Gaussian smearing of the initial point.

    ``sigma`` is in quadrature units; the flow samples in translation units
    use sigma / sqrt(2 pi).
    """

    epsilon: float
    mc_samples: int = 20_000
    seed: int = 0
    sigma: float = field(init=False)

    def __post_init__(self):
        if self.mc_samples < 1:
            raise InvalidArgument("mc_samples must be positive")
        object.__setattr__(self, "sigma", sigma_from_epsilon(self.epsilon))

    @property
    def sigma_translation(self) -> float:
        return self.sigma / L_UNIT


@dataclass(frozen=True)
class ProbabilityEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: Optional[int] = None

    def as_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr, "samples": self.samples, "seed": self.seed}


def wrap(z: np.ndarray) -> np.ndarray:
    """Map to [-1/2, 1/2) componentwise."""
    return z - np.floor(z + 0.5)


def relax_batch(lat: GkpLattice, E: np.ndarray, cfg: FlowConfig = FlowConfig()) -> tuple[np.ndarray, np.ndarray]:
    """Relax many points at once; returns (fixed points, converged mask)."""
    S = np.asarray(lat.S)
    W = omega(lat.m)
    E = np.atleast_2d(np.asarray(E, dtype=float))
    Z = E @ (S @ W).T
    G = S @ S.T
    done = np.zeros(len(Z), dtype=bool)
    active = np.arange(len(Z))
    for _ in range(cfg.max_steps):
        if active.size == 0:
            break
        w = wrap(Z[active])
        # Inside the ball |w| < 1/2 the flow decreases |w| monotonically and
        # never crosses a cell face, so the limit is round(z).
        settled = np.einsum("ij,ij->i", w, w) < 0.25
        done[active[settled]] = True
        active = active[~settled]
        Z[active] -= cfg.step * (w[~settled] @ G.T)
    fixed = -np.rint(Z) @ np.linalg.inv(S).T @ W.T
    return fixed, done


def flow_relax(lat: GkpLattice, e: np.ndarray, cfg: FlowConfig = FlowConfig()) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    if not np.all(np.isfinite(e)):
        raise InvalidArgument("initial point must be finite")
    fixed, done = relax_batch(lat, e[None, :], cfg)
    if not done[0]:
        raise FlowStalled("flow did not settle within max_steps", last=fixed[0])
    return fixed[0]


def classify_error(lat: GkpLattice, frame: LogicalFrame, e: np.ndarray, cfg: FlowConfig = FlowConfig()) -> str:
    fixed = flow_relax(lat, e, cfg)
    label = pauli_class(lat, frame, fixed)
    if label is None:
        raise ClassificationError(f"fixed point {fixed} is not a dual-lattice point")
    return label


def classify_batch(lat: GkpLattice, frame: LogicalFrame, E: np.ndarray, cfg: FlowConfig = FlowConfig()) -> list[str]:
    fixed, done = relax_batch(lat, E, cfg)
    cache: dict[tuple[int, ...], str] = {}
    labels = []
    for p, ok in zip(fixed, done):
        if not ok:
            labels.append(BOUNDARY)
            continue
        key = tuple(np.rint(lat.dual_coords(p)).astype(int) % 2)
        if key not in cache:
            label = pauli_class(lat, frame, p)
            if label is None:
                raise ClassificationError(f"fixed point {p} is not a dual-lattice point")
            cache[key] = label
        labels.append(cache[key])
    return labels


def _identity_mask(lat: GkpLattice, E: np.ndarray, cfg: FlowConfig) -> np.ndarray:
    fixed, done = relax_batch(lat, E, cfg)
    coords = np.linalg.solve(np.asarray(lat.S).T, fixed.T).T
    in_lattice = np.all(np.abs(coords - np.rint(coords)) < 1e-6, axis=1)
    # Stalled points sit on separatrices; they are counted as failures.
    return in_lattice & done


def _rng(seed: Optional[int], index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([0 if seed is None else seed, index]))


def _estimate(failures: int, n: int, seed: Optional[int]) -> ProbabilityEstimate:
    p = failures / n
    return ProbabilityEstimate(p, math.sqrt(max(p * (1 - p), 0.0) / n), n, seed)


def smeared_error_prob(
    lat: GkpLattice,
    e: np.ndarray,
    smear: SmearConfig,
    cfg: FlowConfig = FlowConfig(),
    stream: int = 0,
) -> ProbabilityEstimate:
    """Monte Carlo estimate of 1 - P(flow of e + noise ends in the stabilizer lattice)."""
    e = np.asarray(e, dtype=float)
    rng = _rng(smear.seed, stream)
    E = e + smear.sigma_translation * rng.standard_normal((smear.mc_samples, lat.dim))
    ok = _identity_mask(lat, E, cfg)
    return _estimate(int(np.count_nonzero(~ok)), smear.mc_samples, smear.seed)


def straight_path(target: np.ndarray) -> np.ndarray:
    return np.vstack([np.zeros(len(target)), np.asarray(target, dtype=float)])


def zigzag_path(target: np.ndarray, waypoints: Sequence[np.ndarray]) -> np.ndarray:
    """Polyline 0 -> waypoints... -> target."""
    pts = [np.zeros(len(target))] + [np.asarray(w, dtype=float) for w in waypoints] + [np.asarray(target, dtype=float)]
    return np.vstack(pts)


def _points_on_path(path: np.ndarray, eta: np.ndarray) -> np.ndarray:
    seg = np.diff(path, axis=0)
    lengths = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(lengths)]) / lengths.sum()
    idx = np.clip(np.searchsorted(cum, eta, side="right") - 1, 0, len(seg) - 1)
    local = (eta - cum[idx]) / np.where(lengths[idx] > 0, (cum[idx + 1] - cum[idx]), 1.0)
    return path[idx] + local[:, None] * seg[idx]


def ancilla_decay_error_prob(
    lat: GkpLattice,
    j: int,
    smear: SmearConfig,
    waypoints: Optional[Sequence[np.ndarray]] = None,
    cfg: FlowConfig = FlowConfig(),
    stream: int = 0,
) -> ProbabilityEstimate:
    """Average over eta ~ U[0, 1] of the smeared error probability of a decay at
    fraction eta of the controlled translation along s_j.

    With ``waypoints`` the translation follows the polyline 0 -> waypoints -> s_j
    and eta is uniform in arc length. Each Monte Carlo sample draws its own eta.
    """
    if not 0 <= j < lat.dim:
        raise InvalidArgument(f"stabilizer index {j} out of range")
    s = np.asarray(lat.S)[j]
    path = straight_path(s) if not waypoints else zigzag_path(s, waypoints)
    rng = _rng(smear.seed, stream)
    eta = rng.random(smear.mc_samples)
    E = _points_on_path(path, eta) + smear.sigma_translation * rng.standard_normal((smear.mc_samples, lat.dim))
    ok = _identity_mask(lat, E, cfg)
    return _estimate(int(np.count_nonzero(~ok)), smear.mc_samples, smear.seed)


def error_map_grid(
    lat: GkpLattice,
    frame: LogicalFrame,
    plane: tuple[int, int],
    resolution: int,
    span: tuple[float, float] = (-0.25, 1.25),
    cfg: FlowConfig = FlowConfig(),
) -> tuple[np.ndarray, list[str]]:
    """Classify a resolution x resolution grid u s_i + v s_j; returns ((u, v) rows, labels)."""
    if resolution < 8:
        raise InvalidArgument("resolution must be at least 8")
    i, j = plane
    if not (0 <= i < lat.dim and 0 <= j < lat.dim) or i == j:
        raise InvalidArgument(f"invalid plane {plane}")
    axis = np.linspace(span[0], span[1], resolution)
    uv = np.array([(u, v) for u in axis for v in axis])
    S = np.asarray(lat.S)
    E = uv[:, :1] * S[i] + uv[:, 1:] * S[j]
    return uv, classify_batch(lat, frame, E, cfg)


@dataclass(frozen=True)
class HessianReport:
    eigenvalues: np.ndarray
    note: str = ""

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])


# Published reference values whose closed form and number disagree.
_HESSIAN_DISCREPANCY = {
    "tesseract": "reference closed form l^2 * 2^(1/4) (= 7.47) disagrees with its quoted value 8.9; "
    "the computed minimum l^2 * sqrt(2) = 8.89 matches the number",
}


def hessian_rates(lat: GkpLattice) -> HessianReport:
    """Eigenvalues of l^2 Omega^T S^T S Omega in non-decreasing order."""
    S = np.asarray(lat.S)
    W = omega(lat.m)
    H = L_UNIT**2 * W.T @ S.T @ S @ W
    vals = np.sort(np.linalg.eigvalsh((H + H.T) / 2))
    return HessianReport(vals, _HESSIAN_DISCREPANCY.get(lat.name, ""))


def isthmus_waypoints(
    lat: GkpLattice, frame: LogicalFrame, j: int, samples: int = 200, cfg: FlowConfig = FlowConfig()
) -> list[np.ndarray]:
    """Corner for a two-leg controlled translation 0 -> w -> s_j that stays correctable.

    Returns [] when the straight path already classifies as I everywhere
    (ideal flow). Otherwise tries w in {+-s_k, s_j +- s_k}, preferring the
    fewest non-identity points and then the shortest total path.
    """
    S = np.asarray(lat.S)
    target = S[j]
    eta = np.linspace(0.0, 1.0, samples + 2)[1:-1]

    def bad(path: np.ndarray) -> int:
        labels = classify_batch(lat, frame, _points_on_path(path, eta), cfg)
        return sum(label != "I" for label in labels)

    if bad(straight_path(target)) == 0:
        return []
    candidates = []
    for k in range(lat.dim):
        if k == j:
            continue
        for w in (S[k], -S[k], target + S[k], target - S[k]):
            path = zigzag_path(target, [w])
            length = float(np.sum(np.linalg.norm(np.diff(path, axis=0), axis=1)))
            candidates.append((bad(path), round(length, 9), k, w))
    best = min(candidates, key=lambda c: c[:3])
    return [best[3]]
