"""Seeded random generators for property suites and the selftest."""

from __future__ import annotations

import numpy as np

from .ascale import solve_a_inverse
from .exppoly import ExpTerm, PiecewiseExpPoly

RATES = (1.0, 0.5, 1.5, 2.0, 0.75 + 0.5j)


def random_exppoly(rng: np.random.Generator, nterms: int = 3, max_power: int = 2, complex_coeffs: bool = True) -> PiecewiseExpPoly:
    """Independent random terms on each half-line (jumps of every order at 0)."""

    def side():
        out = []
        for _ in range(nterms):
            c = rng.normal() + (1j * rng.normal() if complex_coeffs else 0)
            n = int(rng.integers(0, max_power + 1))
            mu = RATES[int(rng.integers(0, len(RATES)))]
            out.append(ExpTerm(c, n, mu))
        return tuple(out)

    return PiecewiseExpPoly(side(), side())


def random_smooth(rng: np.random.Generator, order: int, **kw) -> PiecewiseExpPoly:
    """A^{-order} of a random function: continuous derivatives through 2*order - 1."""
    f = random_exppoly(rng, **kw)
    for _ in range(order):
        f = solve_a_inverse(f)
    return f


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0, real: bool = False) -> np.ndarray:
    a = rng.normal(size=(n, n))
    if not real:
        a = a + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2
