"""Exact algebra of piecewise exponential-polynomial functions on R minus {0}.

A :class:`PiecewiseExpPoly` is a pair of finite sums, one for each half-line,

    f(x) = sum c * x**n * exp(-mu * x)           for x > 0
    f(x) = sum c * |x|**n * exp(-mu * |x|)       for x < 0

with Re(mu) > 0.  Both halves are stored in the ``|x|`` convention, so
even and odd functions have identical (resp. negated) left and right term
lists.  Every operation here is closed-form: derivatives, the action of
``-D^2 + 1``, quasi-derivatives, one-sided traces and L2 inner products.

Example:
    >>> f = PiecewiseExpPoly.even([ExpTerm(0.5, 0, 1.0)])
    >>> trace(f, "+", 1)
    (-0.5+0j)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import NotInSobolevSpace, ValidationError

RATE_TOL = 1e-14
JUMP_TOL = 1e-10


@dataclass(frozen=True)
class ExpTerm:
    """One term ``coeff * |x|**power * exp(-rate * |x|)``."""

    coeff: complex
    power: int
    rate: complex

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "rate", complex(self.rate))
        if int(self.power) != self.power or self.power < 0:
            raise ValidationError(f"power must be a nonnegative integer, got {self.power!r}")
        object.__setattr__(self, "power", int(self.power))
        if not self.rate.real > 0:
            raise ValidationError(f"rate must have positive real part, got {self.rate!r}")


def _normalize(terms: Iterable[ExpTerm]) -> tuple[ExpTerm, ...]:
    merged: list[list] = []  # [power, rate, coeff]
    exact: dict = {}
    for t in terms:
        slot = exact.get((t.power, t.rate))
        if slot is None:
            for cand in merged:
                if cand[0] == t.power and abs(cand[1] - t.rate) <= RATE_TOL:
                    slot = cand
                    break
        if slot is None:
            slot = [t.power, t.rate, 0j]
            merged.append(slot)
            exact[(t.power, t.rate)] = slot
        slot[2] += t.coeff
    out = [ExpTerm(c, n, mu) for n, mu, c in merged if c != 0]
    out.sort(key=lambda t: (t.power, t.rate.real, t.rate.imag))
    return tuple(out)


@dataclass(frozen=True)
class PiecewiseExpPoly:
    right: tuple[ExpTerm, ...] = field(default_factory=tuple)
    left: tuple[ExpTerm, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "right", _normalize(self.right))
        object.__setattr__(self, "left", _normalize(self.left))

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "PiecewiseExpPoly":
        return cls((), ())

    @classmethod
    def even(cls, terms: Sequence[ExpTerm]) -> "PiecewiseExpPoly":
        terms = tuple(terms)
        return cls(terms, terms)

    @classmethod
    def odd(cls, terms: Sequence[ExpTerm]) -> "PiecewiseExpPoly":
        """sign(x) * g(|x|) for g given by ``terms``."""
        terms = tuple(terms)
        return cls(terms, tuple(ExpTerm(-t.coeff, t.power, t.rate) for t in terms))

    @classmethod
    def term(cls, coeff: complex, power: int, rate: complex, side: str = "both") -> "PiecewiseExpPoly":
        t = (ExpTerm(coeff, power, rate),)
        if side == "both":
            return cls(t, t)
        if side == "+":
            return cls(t, ())
        if side == "-":
            return cls((), t)
        raise ValidationError(f"side must be '+', '-' or 'both', got {side!r}")

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: "PiecewiseExpPoly") -> "PiecewiseExpPoly":
        if not isinstance(other, PiecewiseExpPoly):
            return NotImplemented
        return PiecewiseExpPoly(self.right + other.right, self.left + other.left)

    def __neg__(self) -> "PiecewiseExpPoly":
        return self * -1

    def __sub__(self, other: "PiecewiseExpPoly") -> "PiecewiseExpPoly":
        if not isinstance(other, PiecewiseExpPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, a) -> "PiecewiseExpPoly":
        a = complex(a)
        if a == 0:
            return PiecewiseExpPoly.zero()
        return PiecewiseExpPoly(
            tuple(ExpTerm(a * t.coeff, t.power, t.rate) for t in self.right),
            tuple(ExpTerm(a * t.coeff, t.power, t.rate) for t in self.left),
        )

    __rmul__ = __mul__

    def __truediv__(self, a) -> "PiecewiseExpPoly":
        return self * (1.0 / complex(a))

    def conj(self) -> "PiecewiseExpPoly":
        return PiecewiseExpPoly(
            tuple(ExpTerm(t.coeff.conjugate(), t.power, t.rate.conjugate()) for t in self.right),
            tuple(ExpTerm(t.coeff.conjugate(), t.power, t.rate.conjugate()) for t in self.left),
        )

    def is_zero(self) -> bool:
        return not self.right and not self.left

    def __call__(self, x):
        """Evaluate at x (scalar or array); x == 0 evaluates to the mean value."""
        x = np.asarray(x, dtype=float)
        r = _eval_side(self.right, np.abs(x))
        l = _eval_side(self.left, np.abs(x))
        out = np.where(x > 0, r, np.where(x < 0, l, 0.5 * (r + l)))
        return out[()] if out.ndim == 0 else out

    def max_coeff(self) -> float:
        return max((abs(t.coeff) for t in self.right + self.left), default=0.0)

    def allclose(self, other: "PiecewiseExpPoly", atol: float = 1e-12) -> bool:
        diff = self - other
        return diff.max_coeff() <= atol

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        def side(ts):
            return [
                {"c": [t.coeff.real, t.coeff.imag], "n": t.power, "mu": [t.rate.real, t.rate.imag]}
                for t in ts
            ]

        return {"right": side(self.right), "left": side(self.left)}

    @classmethod
    def from_json(cls, data: dict) -> "PiecewiseExpPoly":
        def side(items):
            out = []
            for it in items:
                c, mu = it["c"], it["mu"]
                c = complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                mu = complex(*mu) if isinstance(mu, (list, tuple)) else complex(mu)
                out.append(ExpTerm(c, int(it["n"]), mu))
            return tuple(out)

        try:
            return cls(side(data.get("right", [])), side(data.get("left", [])))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed function JSON: {exc}") from exc


def _eval_side(terms, t):
    acc = np.zeros(np.shape(t), dtype=complex)
    for term in terms:
        acc = acc + term.coeff * t**term.power * np.exp(-term.rate * t)
    return acc


def _d_side(terms) -> list[ExpTerm]:
    """d/dt of sum c t^n e^{-mu t}."""
    out = []
    for t in terms:
        if t.power > 0:
            out.append(ExpTerm(t.coeff * t.power, t.power - 1, t.rate))
        out.append(ExpTerm(-t.coeff * t.rate, t.power, t.rate))
    return out


def differentiate(f: PiecewiseExpPoly) -> PiecewiseExpPoly:
    """Exact derivative away from the origin."""
    right = _d_side(f.right)
    # on x < 0, d/dx = -d/d|x|
    left = [ExpTerm(-t.coeff, t.power, t.rate) for t in _d_side(f.left)]
    return PiecewiseExpPoly(tuple(right), tuple(left))


def apply_a(f: PiecewiseExpPoly) -> PiecewiseExpPoly:
    """Pointwise (-D^2 + 1) f on each half-line (no distributional part)."""
    return f - differentiate(differentiate(f))


def quasi_derivative(f: PiecewiseExpPoly, tau: int) -> PiecewiseExpPoly:
    """f^[2k] = (-D^2+1)^k f and f^[2k+1] = D f^[2k]."""
    if tau < 0:
        raise ValidationError("tau must be nonnegative")
    g = f
    for _ in range(tau // 2):
        g = apply_a(g)
    if tau % 2:
        g = differentiate(g)
    return g


def _side_integral(a: Sequence[ExpTerm], b: Sequence[ExpTerm]) -> complex:
    # int_0^inf t^(n+m) e^{-(mu + conj nu) t} dt = (n+m)! / (mu + conj nu)^(n+m+1)
    total = 0j
    for s in a:
        for t in b:
            k = s.power + t.power
            total += s.coeff * t.coeff.conjugate() * math.factorial(k) / (s.rate + t.rate.conjugate()) ** (k + 1)
    return total


def l2_inner(f: PiecewiseExpPoly, g: PiecewiseExpPoly) -> complex:
    """(f, g) in L2(R), conjugate-linear in g."""
    return _side_integral(f.right, g.right) + _side_integral(f.left, g.left)


def l2_norm(f: PiecewiseExpPoly) -> float:
    return math.sqrt(max(l2_inner(f, f).real, 0.0))


def trace(f: PiecewiseExpPoly, side: str, k: int = 0) -> complex:
    """One-sided limit of the k-th derivative at 0 from ``side`` ('+' or '-')."""
    if side not in ("+", "-"):
        raise ValidationError(f"side must be '+' or '-', got {side!r}")
    g = f
    for _ in range(k):
        g = differentiate(g)
    terms = g.right if side == "+" else g.left
    return complex(sum((t.coeff for t in terms if t.power == 0), 0j))


def mean_jump(f: PiecewiseExpPoly, tau: int) -> tuple[complex, complex]:
    """(f_r^[tau], f_s^[tau]): half-sum and jump of the quasi-derivative at 0."""
    q = quasi_derivative(f, tau)
    plus, minus = trace(q, "+"), trace(q, "-")
    return 0.5 * (plus + minus), plus - minus


def quasi_traces(f: PiecewiseExpPoly, taumax: int) -> tuple[np.ndarray, np.ndarray]:
    """Means and jumps of f^[tau] for tau = 0..taumax, built incrementally."""
    means = np.zeros(taumax + 1, dtype=complex)
    jumps = np.zeros(taumax + 1, dtype=complex)
    even = f
    for tau in range(taumax + 1):
        q = even if tau % 2 == 0 else differentiate(even)
        plus, minus = trace(q, "+"), trace(q, "-")
        means[tau], jumps[tau] = 0.5 * (plus + minus), plus - minus
        if tau % 2:
            even = apply_a(even)
    return means, jumps


def derivative_jumps(f: PiecewiseExpPoly, kmax: int) -> np.ndarray:
    """Jumps of the ordinary derivatives f^(k), k = 0..kmax."""
    out = np.zeros(kmax + 1, dtype=complex)
    g = f
    for k in range(kmax + 1):
        out[k] = trace(g, "+") - trace(g, "-")
        g = differentiate(g)
    return out


def check_sobolev(f: PiecewiseExpPoly, p: int, tol: float = JUMP_TOL) -> None:
    """Raise NotInSobolevSpace unless f^(k) is continuous at 0 for k < p."""
    if p <= 0:
        return
    jumps = derivative_jumps(f, p - 1)
    scale = max(1.0, f.max_coeff())
    bad = np.nonzero(np.abs(jumps) > tol * scale)[0]
    if bad.size:
        k = int(bad[0])
        raise NotInSobolevSpace(f"derivative of order {k} jumps by {jumps[k]:.3g} at 0 (p={p})")


def sobolev_inner(f: PiecewiseExpPoly, g: PiecewiseExpPoly, p: int) -> complex:
    """(f, g)_p = (A^{p/2} f, A^{p/2} g) for even p, f and g in W^p_2(R)."""
    if p < 0 or p % 2:
        raise ValidationError(f"p must be even and nonnegative, got {p}")
    check_sobolev(f, p)
    check_sobolev(g, p)
    return l2_inner(quasi_derivative(f, p), quasi_derivative(g, p))


def sobolev_norm(f: PiecewiseExpPoly, p: int) -> float:
    return math.sqrt(max(sobolev_inner(f, f, p).real, 0.0))
