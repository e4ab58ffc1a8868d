"""Integral-lattice search over two Givens angles for four-dimensional codes.

Both families rotate a fixed basis by O = G(2,3,theta1) G(2,4,theta2) and
scale by d^(1/4). Integrality of the symplectic Gram matrix reduces to a
ternary Diophantine equation whose integer solutions fix the angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .errors import InvalidArgument
from .lattice import GENERATORS, build
from .symplectic import givens

__all__ = [
    "SearchSolution",
    "legendre_representable",
    "search_tesseract",
    "search_d4",
    "FAMILIES",
]


@dataclass(frozen=True)
class SearchSolution:
    d: int
    abc: tuple[int, int, int]
    angles: tuple[float, float]
    S: np.ndarray


def legendre_representable(d: int) -> bool:
    """True iff d is a sum of three squares, i.e. not of the form 4^f (8g + 7)."""
    if d < 0:
        raise InvalidArgument("d must be non-negative")
    while d and d % 4 == 0:
        d //= 4
    return d % 8 != 7


def _check_d(d: int) -> int:
    if int(d) != d or d < 1:
        raise InvalidArgument(f"code dimension must be a positive integer, got {d}")
    return int(d)


def _rotated_basis(d: int, base: np.ndarray, theta1: float, theta2: float) -> np.ndarray:
    return d**0.25 * base @ givens(2, 3, theta1) @ givens(2, 4, theta2)


def _solution(d: int, abc: tuple[int, int, int], direction: tuple[float, float, float], base: np.ndarray) -> SearchSolution:
    # direction = (cos t1 cos t2, sin t1 cos t2, sin t2)
    x, y, z = direction
    theta2 = math.asin(max(-1.0, min(1.0, z)))
    theta1 = math.atan2(y, x)  # atan2(0, 0) = 0 covers the cos t2 = 0 branch
    S = _rotated_basis(d, base, theta1, theta2)
    lat = build(S, name=f"search(d={d},abc={abc})")
    if lat.d != d:
        raise ArithmeticError(f"search produced d = {lat.d}, expected {d}")
    return SearchSolution(d, abc, (theta1, theta2), np.asarray(lat.S))


def _tesseract_triples(d: int, full_orbit: bool) -> Iterator[tuple[int, int, int]]:
    r = math.isqrt(d)
    rng = range(-r, r + 1) if full_orbit else range(r + 1)
    for a in rng:
        for b in rng:
            for c in rng:
                if a * a + b * b + c * c != d:
                    continue
                if full_orbit or a >= c >= b:
                    yield (a, b, c)


def search_tesseract(d: int, full_orbit: bool = False) -> list[SearchSolution]:
    """Solutions of d = a^2 + b^2 + c^2 as hypercubic two-mode codes.

    By default only the canonical ordering a >= c >= b >= 0 is returned; for
    d = 2 that representative is the catalog tesseract itself.
    """
    d = _check_d(d)
    sd = math.sqrt(d)
    return [
        _solution(d, abc, (abc[0] / sd, abc[1] / sd, abc[2] / sd), np.eye(4))
        for abc in _tesseract_triples(d, full_orbit)
    ]


def _d4_form(a: int, b: int, c: int) -> int:
    return 3 * a * a + 4 * a * b + 4 * b * b + c * c


def _d4_canonical(abc: tuple[int, int, int]) -> tuple[int, int, int]:
    # The form is invariant under c -> -c, (a, b) -> (-a, -b) and b -> -a - b.
    a, b, c = abc
    c = abs(c)
    orbit = [(a, b), (-a, -b), (a, -a - b), (-a, a + b)]
    return max(orbit) + (c,)


def search_d4(d: int, full_orbit: bool = False) -> list[SearchSolution]:
    """Solutions of 4d = 3a^2 + 4ab + 4b^2 + c^2 built on the D4 qunaught basis.

    The angles follow from (cos t1 cos t2, sin t1 cos t2, sin t2) =
    (a/2 + b, a/sqrt 2, c/2) / sqrt d. Symmetry-related triples are
    collapsed to one canonical representative unless ``full_orbit``.
    """
    d = _check_d(d)
    bound = int(2 * math.sqrt(d)) + 1
    base = GENERATORS["d4_qunaught"]()
    sd = math.sqrt(d)
    seen: set[tuple[int, int, int]] = set()
    out = []
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            for c in range(-bound, bound + 1):
                if _d4_form(a, b, c) != 4 * d:
                    continue
                key = (a, b, c) if full_orbit else _d4_canonical((a, b, c))
                if key in seen:
                    continue
                seen.add(key)
                ka, kb, kc = key
                direction = ((ka / 2 + kb) / sd, ka / math.sqrt(2) / sd, kc / 2 / sd)
                out.append(_solution(d, key, direction, base))
    return out


FAMILIES: dict[str, Callable[..., list[SearchSolution]]] = {
    "tesseract": search_tesseract,
    "d4": search_d4,
}
