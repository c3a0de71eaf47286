"""A-scale machinery for A = -d^2/dx^2 + 1 on L2(R).

Fundamental solutions m_j, the defect bases spanned by them, the resolvent
(A - E)^{-1} inside the exp-poly class, the distributional extension A+
(which maps jumps at the origin to delta-derivatives) and the splitting of
a function into a smooth part plus a defect-basis part.

Sign convention for delta-derivatives: <u, delta> = u(0), <u, delta'> = -u'(0).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidIndex, NotInScale, OddIndex, ValidationError
from .exppoly import (
    JUMP_TOL,
    ExpTerm,
    PiecewiseExpPoly,
    apply_a,
    derivative_jumps,
    differentiate,
    trace,
)

RESONANCE_TOL = 1e-12


def double_factorial(n: int) -> int:
    """n!! with the convention (-1)!! = 0!! = 1."""
    if n < -1:
        raise ValueError(f"double factorial undefined for {n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@lru_cache(maxsize=None)
def fundamental_solution(index: int) -> PiecewiseExpPoly:
    """m_index: decaying solution of (-D^2+1)^j m_{2j} = delta, with m_{2j-1} = m_{2j}'."""
    if int(index) != index or index <= 0:
        raise InvalidIndex(f"fundamental solution index must be a positive integer, got {index!r}")
    index = int(index)
    if index % 2:
        return differentiate(fundamental_solution(index + 1))
    j = index // 2
    pref = 1.0 / (math.factorial(j - 1) * 2**j)
    terms = [
        ExpTerm(pref * math.comb(2 * j - 2 - r, r) * double_factorial(2 * j - 3 - 2 * r), r, 1.0)
        for r in range(j)
    ]
    return PiecewiseExpPoly.even(terms)


def defect_basis(p: int) -> list[PiecewiseExpPoly]:
    """[m_{2j}, m_{2j-1}] for j = p+1 down to p/2+1 (length p+2)."""
    if p < 0:
        raise ValidationError(f"p must be nonnegative, got {p}")
    if p % 2:
        raise OddIndex(f"p must be even, got {p}")
    out = []
    for j in range(p + 1, p // 2, -1):
        out.append(fundamental_solution(2 * j))
        out.append(fundamental_solution(2 * j - 1))
    return out


def _particular(terms, kappa: complex) -> list[ExpTerm]:
    """Decaying particular solution of (-D^2 + kappa^2) y = g on one half-line."""
    groups: dict[int, tuple[complex, dict[int, complex]]] = {}
    for t in terms:
        for key, (mu, poly) in groups.items():
            if abs(mu - t.rate) <= 1e-14:
                poly[t.power] = poly.get(t.power, 0j) + t.coeff
                break
        else:
            groups[len(groups)] = (t.rate, {t.power: t.coeff})
    out = []
    k2 = kappa * kappa
    for mu, poly in groups.values():
        n = max(poly)
        q = [poly.get(k, 0j) for k in range(n + 1)]
        p = [0j] * (n + 3)
        if abs(mu - kappa) <= RESONANCE_TOL:
            # (2 mu P' - P'') = Q, degree raised by one, P(0) free (set 0)
            for k in range(n, -1, -1):
                p[k + 1] = (q[k] + (k + 2) * (k + 1) * p[k + 2]) / (2 * mu * (k + 1))
        else:
            d = k2 - mu * mu
            for k in range(n, -1, -1):
                p[k] = (q[k] - 2 * mu * (k + 1) * p[k + 1] + (k + 2) * (k + 1) * p[k + 2]) / d
        out.extend(ExpTerm(c, k, mu) for k, c in enumerate(p) if c != 0)
    return out


def solve_shifted(g: PiecewiseExpPoly, E: complex = 0.0) -> PiecewiseExpPoly:
    """(A - E)^{-1} g: the decaying f with (-D^2 + 1 - E) f = g pointwise and f, f' continuous at 0.

    E must lie off [1, inf); the decay rate of the homogeneous part is sqrt(1 - E).
    """
    kappa = cmath.sqrt(1 - complex(E))
    if not kappa.real > 0:
        raise ValidationError(f"E={E} lies on the essential spectrum [1, inf)")
    part = PiecewiseExpPoly(tuple(_particular(g.right, kappa)), tuple(_particular(g.left, kappa)))
    s0 = trace(part, "+") - trace(part, "-")
    s1 = trace(part, "+", 1) - trace(part, "-", 1)
    a = 0.5 * (s1 / kappa - s0)
    b = 0.5 * (s1 / kappa + s0)
    hom = PiecewiseExpPoly(
        (ExpTerm(a, 0, kappa),) if a != 0 else (),
        (ExpTerm(b, 0, kappa),) if b != 0 else (),
    )
    return part + hom


def solve_a_inverse(g: PiecewiseExpPoly) -> PiecewiseExpPoly:
    """A^{-1} g; apply_a(solve_a_inverse(g)) == g."""
    return solve_shifted(g, 0.0)


@dataclass(frozen=True)
class DistributionalValue:
    """regular(x) + sum_k delta_coeffs[k] * delta^(k)(x)."""

    regular: PiecewiseExpPoly = field(default_factory=PiecewiseExpPoly.zero)
    delta_coeffs: tuple[complex, ...] = ()

    def __post_init__(self):
        d = [complex(c) for c in self.delta_coeffs]
        while d and d[-1] == 0:
            d.pop()
        object.__setattr__(self, "delta_coeffs", tuple(d))

    def coeff(self, k: int) -> complex:
        return self.delta_coeffs[k] if k < len(self.delta_coeffs) else 0j

    def delta_vector(self, length: int) -> np.ndarray:
        if len(self.delta_coeffs) > length:
            raise ValidationError(f"delta order {len(self.delta_coeffs) - 1} exceeds {length - 1}")
        return np.array([self.coeff(k) for k in range(length)], dtype=complex)

    def __add__(self, other: "DistributionalValue") -> "DistributionalValue":
        n = max(len(self.delta_coeffs), len(other.delta_coeffs))
        return DistributionalValue(
            self.regular + other.regular,
            tuple(self.coeff(k) + other.coeff(k) for k in range(n)),
        )

    def __mul__(self, a) -> "DistributionalValue":
        return DistributionalValue(self.regular * a, tuple(complex(a) * c for c in self.delta_coeffs))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def is_regular(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.delta_coeffs)

    def to_json(self) -> dict:
        return {
            "regular": self.regular.to_json(),
            "delta": [[c.real, c.imag] for c in self.delta_coeffs],
        }


def distributional_apply_a(f) -> DistributionalValue:
    """A+ f: (-D^2 + 1) in the sense of distributions.

    For a piecewise function, -f'' = -f''(pointwise) - f'_s delta - f_s delta'.
    Distributions are accepted too, so A+ can be iterated.
    """
    if isinstance(f, DistributionalValue):
        base = distributional_apply_a(f.regular)
        n = len(f.delta_coeffs)
        d = [0j] * (n + 2)
        for k, c in enumerate(f.delta_coeffs):
            d[k] += c
            d[k + 2] -= c
        return base + DistributionalValue(PiecewiseExpPoly.zero(), tuple(d))
    jump0 = trace(f, "+") - trace(f, "-")
    jump1 = trace(f, "+", 1) - trace(f, "-", 1)
    return DistributionalValue(apply_a(f), (-jump1, -jump0))


def jump_matrix(p: int) -> np.ndarray:
    """Jumps of derivatives of orders p..2p+1 (rows) of the defect basis (columns)."""
    basis = defect_basis(p)
    return np.column_stack([derivative_jumps(b, 2 * p + 1)[p:] for b in basis])


@dataclass(frozen=True)
class ScaleElement:
    """f = smooth + sum_j singular_coeffs[j] * defect_basis(p)[j]."""

    p: int
    smooth: PiecewiseExpPoly
    singular_coeffs: np.ndarray

    @property
    def basis(self) -> list[PiecewiseExpPoly]:
        return defect_basis(self.p)

    @property
    def singular_part(self) -> PiecewiseExpPoly:
        out = PiecewiseExpPoly.zero()
        for c, b in zip(self.singular_coeffs, self.basis):
            out = out + c * b
        return out

    def reconstruct(self) -> PiecewiseExpPoly:
        return self.smooth + self.singular_part


def decompose(f: PiecewiseExpPoly, p: int, tol: float = JUMP_TOL) -> ScaleElement:
    """Split f in W^p_2 (piecewise) as u + m with u in D(A^{p+1}) and m in span(defect_basis(p))."""
    basis = defect_basis(p)
    jumps = derivative_jumps(f, 2 * p + 1)
    scale = max(1.0, f.max_coeff())
    low = np.abs(jumps[:p])
    if low.size and low.max() > tol * scale:
        k = int(np.argmax(low > tol * scale))
        raise NotInScale(f"derivative of order {k} jumps by {jumps[k]:.3g}; not in W^{p}_2")
    coeffs = np.linalg.solve(jump_matrix(p), jumps[p:])
    sing = PiecewiseExpPoly.zero()
    for c, b in zip(coeffs, basis):
        sing = sing + c * b
    smooth = f - sing
    rest = derivative_jumps(smooth, 2 * p + 1)
    assert np.abs(rest).max() <= 1e-8 * max(1.0, np.abs(jumps).max()), "jump map not inverted"
    return ScaleElement(p, smooth, coeffs)
