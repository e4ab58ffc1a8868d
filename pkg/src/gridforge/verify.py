"""Fock-space verification suites behind ``gridforge fock verify``.

Each check returns a record {name, value, threshold, passed}. The suites are
deterministic for a given seed.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np

from . import symplectic as sp
from .fock import (
    FockState,
    OperatorSpec,
    apply,
    apply_envelope,
    apply_translation,
    build_codeword,
    damping_channel,
    decay_error_prob,
    dissipation_cycle,
    epsilon_to_beta,
    expectation_T,
    inject_ancilla_decay,
    kraus_operators,
    logical_expectation,
    nullifier_residual,
    number_diagonal,
    sbs_round,
    stabilizer_expectations,
    vacuum,
)
from .fock import _shift_frame
from .gauge import update_after_gaussian
from .lattice import GkpLattice, LogicalFrame, catalog

__all__ = [
    "SUITES",
    "run_suite",
    "mod4_populations",
    "hadamard_eigenstates",
    "codespace_fidelity",
    "sbs_ensemble",
    "fitted_contraction_rate",
    "predicted_rate",
]

BETA = 0.2


def _check(name: str, value: float, threshold: float, ok: bool) -> dict:
    return {"name": name, "value": float(value), "threshold": float(threshold), "passed": bool(ok)}


def _at_least(name: str, value: float, threshold: float) -> dict:
    return _check(name, value, threshold, value >= threshold)


def _at_most(name: str, value: float, threshold: float) -> dict:
    return _check(name, value, threshold, value <= threshold)


######################################################################
# Helpers shared with the test suite
######################################################################


def mod4_populations(state: FockState) -> np.ndarray:
    """Population of total excitation number in each class n mod 4."""
    pops = state.total_number_populations()
    n = np.arange(len(pops))
    return np.array([pops[n % 4 == r].sum() for r in range(4)])


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def hadamard_eigenstates(lat: GkpLattice, frame: LogicalFrame, beta: float, dims) -> tuple[FockState, FockState]:
    """Logical Hadamard eigenstates cos(pi/8)|0> + sin(pi/8)|1> and its orthogonal partner.

    The relative phase between the Z code words is read off the +X code word,
    so the construction does not assume a phase convention.
    """
    z0 = build_codeword(lat, frame, "+Z", beta, dims).amplitudes
    z1 = build_codeword(lat, frame, "-Z", beta, dims).amplitudes
    x = build_codeword(lat, frame, "+X", beta, dims).amplitudes
    z1 = z1 * np.exp(1j * np.angle(np.vdot(z1, x) / np.vdot(z0, x)))
    c, s = math.cos(math.pi / 8), math.sin(math.pi / 8)
    dims = tuple(dims)
    return FockState(dims, _unit(c * z0 + s * z1)), FockState(dims, _unit(s * z0 - c * z1))


def codespace_fidelity(state: FockState, words: Iterable[FockState]) -> float:
    """Squared norm of the projection onto the span of ``words``."""
    V = np.stack([w.amplitudes.reshape(-1) for w in words], axis=1)
    Q, _ = np.linalg.qr(V)
    psi = _unit(state.amplitudes.reshape(-1))
    return float(np.linalg.norm(Q.conj().T @ psi) ** 2)


def sbs_ensemble(
    lat: GkpLattice, frame: LogicalFrame, eps: float, cycles: int, trajectories: int, seed: int, dims
) -> np.ndarray:
    """Gauge-signed finite-energy stabilizer expectations after each cycle, from vacuum.

    Returns an array of shape (trajectories, cycles + 1, 2m).
    """
    beta = epsilon_to_beta(eps)
    out = np.zeros((trajectories, cycles + 1, lat.dim))
    for t in range(trajectories):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        state, fr = vacuum(dims), frame
        out[t, 0] = stabilizer_expectations(state, lat, fr.mu, beta)
        for k in range(cycles):
            state, fr = dissipation_cycle(state, lat, fr, eps, rng)
            out[t, k + 1] = stabilizer_expectations(state, lat, fr.mu, beta)
    return out


def fitted_contraction_rate(mean_trace: np.ndarray, floor: float = 0.2) -> float:
    """Per-cycle rate r from 1 - <T> ~ exp(-r k), fitted while 1 - <T> > floor."""
    gap = 1.0 - np.asarray(mean_trace)
    stop = int(np.argmax(gap <= floor)) if np.any(gap <= floor) else len(gap)
    if stop < 2:
        raise ValueError("too few points above the floor to fit a rate")
    k = np.arange(stop)
    return float(-np.polyfit(k, np.log(gap[:stop]), 1)[0])


def predicted_rate(s: np.ndarray, eps: float) -> float:
    return float(np.linalg.norm(s)) * math.pi * eps / math.sqrt(2)


######################################################################
# Suites
######################################################################


def suite_codewords(seed: int = 0) -> list[dict]:
    out = []
    qlat, qfr = catalog("qunaught")
    for mu, residue in (((0, 0), 0), ((1, 1), 1)):
        word = build_codeword(qlat, qfr.with_gauge(mu), "code", BETA, (50,))
        out.append(_at_least(f"qunaught mu={mu} population on n = {residue} mod 4", mod4_populations(word)[residue], 0.999))

    lat, fr = catalog("square")
    plus, minus = hadamard_eigenstates(lat, fr, BETA, (50,))
    out.append(_at_least("square H+ population on n = 0 mod 4", mod4_populations(plus)[0], 0.999))
    out.append(_at_least("square H- population on n = 2 mod 4", mod4_populations(minus)[2], 0.999))

    for which in ("+X", "-X", "+Y", "-Y", "+Z", "-Z"):
        word = build_codeword(lat, fr, which, BETA, (40,))
        out.append(_at_least(f"square {which} min stabilizer", stabilizer_expectations(word, lat, fr.mu, BETA).min(), 0.99))

    wide = build_codeword(lat, fr, "+Z", 2.0, (40,))
    out.append(_at_least("large envelope overlap with vacuum", abs(np.vdot(vacuum((40,)).amplitudes, wide.amplitudes)) ** 2, 0.99))

    vac = expectation_T(vacuum((50,)), np.asarray(lat.S)[0]).real
    out.append(_at_most("vacuum <T(s1)> minus exp(-pi)", abs(vac - math.exp(-math.pi)), 1e-10))

    # The modular nullifier is only approximate; it sharpens as beta shrinks.
    beta = 0.1
    for which in ("+Z", "-Z"):
        word = build_codeword(lat, fr, which, beta, (60,))
        worst = max(nullifier_residual(word, s, beta) for s in np.asarray(lat.S))
        out.append(_at_most(f"square {which} nullifier residual at beta=0.1", worst, 0.1))

    d4, d4fr = catalog("d4")
    word = build_codeword(d4, d4fr, "+Z", BETA, (35, 35))
    out.append(_at_least("d4 +Z min stabilizer", stabilizer_expectations(word, d4, d4fr.mu, BETA).min(), 0.99))
    return out


def _tomography(state: FockState, lat: GkpLattice, frame: LogicalFrame, beta: float = BETA) -> np.ndarray:
    return np.array([logical_expectation(state, lat, frame, p, beta) for p in "XYZ"])


def _coherent(alphas, dims) -> FockState:
    state = vacuum(dims)
    for j, a in enumerate(alphas):
        state = apply(state, OperatorSpec("displacement", (j,), {"alpha": a}))
    return state


def _quadrature_means(state: FockState) -> np.ndarray:
    out = []
    for j in range(state.m):
        a = np.diag(np.sqrt(np.arange(1, state.dims[j])), 1)
        psi = np.moveaxis(state.amplitudes, j, 0)
        mean_a = np.vdot(psi, np.tensordot(a, psi, axes=(1, 0)))
        # Quadratures in translation units: q = sqrt(2) Re<a> / l.
        out += [math.sqrt(2) * mean_a.real / sp.L_UNIT, math.sqrt(2) * mean_a.imag / sp.L_UNIT]
    return np.array(out)


def suite_gates(seed: int = 0) -> list[dict]:
    out = []
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    N = 30
    raw = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    raw[:, N // 2 :] = 0
    raw[N // 2 :, :] = 0
    probe = FockState((N, N), _unit(raw))

    turned = apply(probe, OperatorSpec("rotation", (0,), {"theta": 2 * math.pi}))
    out.append(_at_most("full rotation is the identity", 1 - abs(np.vdot(probe.amplitudes, turned.amplitudes)), 1e-12))

    u, v = np.array([0.3, -0.2, 0.1, 0.25]), np.array([-0.15, 0.2, 0.3, -0.1])
    uv = apply_translation(apply_translation(probe, v), u).amplitudes
    vu = apply_translation(apply_translation(probe, u), v).amplitudes
    ratio = np.vdot(probe.amplitudes, uv) / np.vdot(probe.amplitudes, vu)
    expected = np.exp(2j * math.pi * (v @ sp.omega(2) @ u))
    out.append(_at_most("translation commutation phase", abs(ratio - expected), 1e-8))

    for spec in (
        OperatorSpec("rotation", (0,), {"theta": 0.7}),
        OperatorSpec("beamsplitter", (0, 1)),
        OperatorSpec("kerr", (1,), {"theta": 0.3}),
        OperatorSpec("crosskerr", (0, 1), {"theta": 0.4}),
    ):
        a = apply_envelope(apply(probe, spec), BETA, normalize=False).amplitudes
        b = apply(apply_envelope(probe, BETA, normalize=False), spec).amplitudes
        # Inside 60% of the levels the padded Gaussian path is exact to round-off.
        out.append(_at_most(f"{spec.kind} commutes with the envelope", np.linalg.norm(a - b), 1e-8))

    coh = _coherent([0.6 + 0.3j, -0.4 + 0.5j], (N, N))
    for label, spec, M in (
        ("rotation", OperatorSpec("rotation", (0,), {"theta": 0.9}), sp.rotation(0.9, 0, 2)),
        ("beamsplitter", OperatorSpec("beamsplitter", (0, 1)), sp.beamsplitter(0, 1, 2)),
        ("shear", OperatorSpec("shear", (0,), {"c": 0.3}), sp.shear(0.3, 0, 2)),
    ):
        moved = _quadrature_means(apply(coh, spec))
        out.append(_at_most(f"{label} moves quadrature means by M", np.max(np.abs(moved - M @ _quadrature_means(coh))), 1e-3))

    lat, fr = catalog("square")
    quarter = OperatorSpec("rotation", (0,), {"theta": math.pi / 2})
    kerr = OperatorSpec("kerr", (0,), {"theta": math.pi / 8})
    worst = 0.0
    for which in ("+X", "+Y", "+Z", "-Z"):
        word = build_codeword(lat, fr, which, BETA, (50,))
        twice = apply(apply(word, kerr), kerr)
        worst = max(worst, np.max(np.abs(_tomography(twice, lat, fr) - _tomography(apply(word, quarter), lat, fr))))
    out.append(_at_most("two Kerr gates match the quarter rotation", worst, 0.02))

    plus, minus = hadamard_eigenstates(lat, fr, BETA, (50,))
    out.append(_at_most("Kerr phase on H+ is 1", abs(np.vdot(plus.amplitudes, apply(plus, kerr).amplitudes) - 1), 1e-3))
    out.append(_at_most("Kerr phase on H- is i", abs(np.vdot(minus.amplitudes, apply(minus, kerr).amplitudes) - 1j), 1e-3))

    out += _two_mode_gates()
    out.append(_cross_kerr_check(lat, fr))
    return out


def _two_mode_gates() -> list[dict]:
    out = []
    dims = (35, 35)
    d4, d4fr = catalog("d4")
    x = build_codeword(d4, d4fr, "+X", BETA, dims)
    M = sp.rotation(math.pi / 2, 0, 2)
    g = update_after_gaussian(d4, d4fr, M)
    after = _tomography(apply(x, OperatorSpec("rotation", (0,), {"theta": math.pi / 2})), d4, d4fr.with_gauge(g.mu, g.upsilon))
    out.append(_at_least("d4 mode rotation maps X to Y", after[1], 0.98))

    tilted = _tomography(apply(x, OperatorSpec("kerr", (0,), {"theta": math.pi / 4})), d4, d4fr)
    phase = math.atan2(tilted[1], tilted[0])
    out.append(_at_most("d4 T gate relative phase error (rad)", abs(phase - math.pi / 4), 0.03))

    tess, tfr = catalog("tesseract")
    M = sp.rotation(math.pi / 2, 0, 2) @ sp.rotation(math.pi / 2, 1, 2) @ sp.beamsplitter(0, 1, 2)
    g = update_after_gaussian(tess, tfr, M)
    new = tfr.with_gauge(g.mu, g.upsilon)
    gate = (
        OperatorSpec("beamsplitter", (0, 1)),
        OperatorSpec("rotation", (0,), {"theta": math.pi / 2}),
        OperatorSpec("rotation", (1,), {"theta": math.pi / 2}),
    )
    for src, dst in (("+X", 2), ("+Z", 0)):
        state = build_codeword(tess, tfr, src, BETA, dims)
        for spec in gate:
            state = apply(state, spec)
        label = "XYZ"[dst]
        out.append(_at_least(f"tesseract Hadamard maps {src[1]} to {label}", _tomography(state, tess, new)[dst], 0.98))
    return out


def _cross_kerr_check(lat: GkpLattice, fr: LogicalFrame) -> dict:
    """Controlled Hadamard from a cross-Kerr gate on two square codes.

    Input (H+ + H-)/sqrt2 on both modes; the truth action flips the sign of
    the H- H- component.
    """
    N, beta = 25, 0.3
    plus, minus = hadamard_eigenstates(lat, fr, beta, (N,))
    hp, hm = plus.amplitudes, minus.amplitudes
    both = _unit(hp + hm)
    state = FockState((N, N), np.outer(both, both))
    truth = _unit(np.outer(hp, hp) + np.outer(hp, hm) + np.outer(hm, hp) - np.outer(hm, hm))
    out = apply(state, OperatorSpec("crosskerr", (0, 1), {"theta": math.pi / 4}))
    fidelity = abs(np.vdot(truth, out.amplitudes)) ** 2
    return _at_most("cross-Kerr controlled-Hadamard fidelity loss", 1 - fidelity, 0.05)


def suite_sbs(seed: int = 0) -> list[dict]:
    out = []
    for name, dims, trajectories in (("square", (50,), 16), ("tesseract", (35, 35), 16)):
        lat, fr = catalog(name)
        final = sbs_ensemble(lat, fr, 0.1, 50, trajectories, seed, dims)[:, -1, :].mean(axis=0)
        out.append(_at_least(f"{name} ensemble min <T_j> after 50 cycles from vacuum", final.min(), 0.9))

    lat, fr = catalog("square")
    eps = 0.05
    beta = epsilon_to_beta(eps)
    word = build_codeword(lat, fr, "+Z", beta, (50,))
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    after = sbs_round(word, lat, 0, eps, fr.mu[0], rng).state
    shifted = _shift_frame(lat, fr, 0)
    span = [build_codeword(lat, shifted, w, beta, (50,)) for w in ("+Z", "-Z")]
    out.append(_at_least("one round keeps a code word in the code space", codespace_fidelity(after, span), 0.99))

    eps = 0.02
    trace = sbs_ensemble(lat, fr, eps, 40, 32, seed, (60,)).mean(axis=(0, 2))
    ratio = fitted_contraction_rate(trace) / predicted_rate(np.asarray(lat.S)[0], eps)
    out.append(_check("fitted contraction rate over |s| pi eps / sqrt2", ratio, 2.0, 0.5 <= ratio <= 2.0))
    return out


def suite_decay(seed: int = 0) -> list[dict]:
    out = []
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    out.append(_check("no decay injected at zero rate", 0, 0, all(inject_ancilla_decay(rng, 0.1, 0.0) is None for _ in range(1000))))

    K = kraus_operators(0.3, 20)
    completeness = sum(k.conj().T @ k for k in K)
    out.append(_at_most("Kraus completeness at N=20", np.max(np.abs(completeness - np.eye(20))), 1e-10))

    psi = _unit(rng.standard_normal(12) + 1j * rng.standard_normal(12))
    psi[9:] = 0
    psi = _unit(psi)
    rho = np.outer(psi, psi.conj())
    n = number_diagonal(12)
    before = float(np.real(np.trace(np.diag(n) @ rho)))
    after = float(np.real(np.trace(np.diag(n) @ damping_channel(rho, 0.25))))
    out.append(_at_most("damping scales <n> by 1 - gamma", abs(after - 0.75 * before), 1e-10))
    out.append(_at_most("zero damping is the identity", np.max(np.abs(damping_channel(rho, 0.0) - rho)), 1e-14))

    lat, fr = catalog("square")
    for eps in (0.05, 0.1):
        res = decay_error_prob(lat, fr, eps, 20, 240, seed, (50,))
        out.append(_check(f"square decay error at eps={eps} near 1/2", res.probability, 0.5, abs(res.probability - 0.5) <= 0.1))

    tess, tfr = catalog("tesseract")
    res = decay_error_prob(tess, tfr, 0.044, 40, 600, seed, (50, 50))
    out.append(_check("tesseract decay error at eps=0.044 is 0.11 +- 0.04", res.probability, 0.11, abs(res.probability - 0.11) <= 0.04))
    return out


SUITES: dict[str, Callable[[int], list[dict]]] = {
    "codewords": suite_codewords,
    "gates": suite_gates,
    "sbs": suite_sbs,
    "decay": suite_decay,
}


def run_suite(name: str, seed: int = 0) -> list[dict]:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seed)
