"""Boundary triples and quasi-triples for the concrete families.

Coordinates at the origin are built from mean values f_r and jumps f_s of
quasi-derivatives (see :func:`zrp.exppoly.mean_jump`).  Every triple comes
with an exact Green-identity residual, which is zero up to rounding for any
pair of functions in the class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .exppoly import (
    PiecewiseExpPoly,
    apply_a,
    check_sobolev,
    l2_inner,
    mean_jump,
    quasi_derivative,
    quasi_traces,
    trace,
)

#: Canonical regularization for the (delta, delta') family: <f, delta> = f_r, <f, delta'> = -f'_r.
R_CANONICAL = np.diag([0.5, -0.5]).astype(complex)


@dataclass(frozen=True)
class BoundaryData:
    gamma0: np.ndarray
    gamma1: np.ndarray

    def __post_init__(self):
        g0 = np.atleast_1d(np.asarray(self.gamma0, dtype=complex))
        g1 = np.atleast_1d(np.asarray(self.gamma1, dtype=complex))
        if g0.shape != g1.shape:
            raise ValidationError(f"gamma0 and gamma1 differ in length: {g0.shape} vs {g1.shape}")
        object.__setattr__(self, "gamma0", g0)
        object.__setattr__(self, "gamma1", g1)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.gamma0, self.gamma1])

    def __len__(self):
        return len(self.gamma0)


def _as_hermitian(R, n: int, name: str = "R") -> np.ndarray:
    if R is None:
        return None
    R = np.asarray(R, dtype=complex)
    if R.shape != (n, n):
        raise ValidationError(f"{name} must be {n}x{n}, got shape {R.shape}")
    if np.abs(R - R.conj().T).max() > 1e-12:
        raise ValidationError(f"{name} is not Hermitian")
    return R


def boundary_pairing(a: BoundaryData, b: BoundaryData) -> complex:
    """(Gamma1 a, Gamma0 b) - (Gamma0 a, Gamma1 b) in C^n."""
    return np.vdot(b.gamma0, a.gamma1) - np.vdot(b.gamma1, a.gamma0)


def boundary_data_l2(f: PiecewiseExpPoly, R=None) -> BoundaryData:
    """(Gamma0^R f, Gamma1 f) for the (delta, delta') family.

    At the canonical R this is ((f_r, -f'_r), (f'_s, f_s)); other Hermitian R
    shift Gamma0 by (R_canonical - R) Gamma1.
    """
    fr, fs = mean_jump(f, 0)
    dr, ds = mean_jump(f, 1)
    g0 = np.array([fr, -dr])
    g1 = np.array([ds, fs])
    R = _as_hermitian(R, 2)
    if R is not None:
        g0 = g0 + (R_CANONICAL - R) @ g1
    return BoundaryData(g0, g1)


def stacked_boundary_data(f: PiecewiseExpPoly, p: int, R=None) -> BoundaryData:
    """BVS of the power A_N^{p+1}: blocks Gamma0 (A*)^k f for k = 0..p and Gamma1 (A*)^{p-k} f."""
    if p < 1:
        raise ValidationError(f"p must be a positive integer, got {p}")
    R = _as_hermitian(R, 2)
    g0_blocks, g1_blocks = [], []
    for k in range(p + 1):
        bd = boundary_data_l2(quasi_derivative(f, 2 * k), R)
        g0_blocks.append(bd.gamma0)
        g1_blocks.append(bd.gamma1)
    return BoundaryData(np.concatenate(g0_blocks), np.concatenate(g1_blocks[::-1]))


def quasi_boundary_data_sobolev(f: PiecewiseExpPoly, p: int) -> BoundaryData:
    """Quasi-triple of A_M in W^p_2.

    Gamma0 = (f_r, -f_r^[1], ..., f_r^[p], -f_r^[p+1]),
    Gamma1 = (f_s^[2p+1], f_s^[2p], ..., f_s^[p+1], f_s^[p]).
    """
    if p < 2 or p % 2:
        raise ValidationError(f"p must be even and positive, got {p}")
    check_sobolev(f, p)
    means, jumps = quasi_traces(f, 2 * p + 1)
    sign = np.where(np.arange(p + 2) % 2, -1, 1)
    return BoundaryData(sign * means[: p + 2], jumps[p:][::-1])


def _relative(lhs: complex, rhs: complex, parts, relative: bool) -> float:
    res = abs(lhs - rhs)
    if not relative:
        return float(res)
    return float(res / max(1.0, sum(abs(x) for x in parts)))


def green_residual_l2(f: PiecewiseExpPoly, g: PiecewiseExpPoly, R=None, relative: bool = False) -> float:
    """|(A*f, g) - (f, A*g) - (Gamma1 f, Gamma0 g) + (Gamma0 f, Gamma1 g)|."""
    a = l2_inner(apply_a(f), g)
    b = l2_inner(f, apply_a(g))
    bf, bg = boundary_data_l2(f, R), boundary_data_l2(g, R)
    c = np.vdot(bg.gamma0, bf.gamma1)
    d = np.vdot(bg.gamma1, bf.gamma0)
    return _relative(a - b, c - d, (a, b, c, d), relative)


def green_residual_powers(f: PiecewiseExpPoly, g: PiecewiseExpPoly, p: int, relative: bool = False) -> float:
    """Green identity of the stacked triple for (A_N^*)^{p+1}, both sides exact."""
    fq = quasi_derivative(f, 2 * p + 2)
    gq = quasi_derivative(g, 2 * p + 2)
    a = l2_inner(fq, g)
    b = l2_inner(f, gq)
    bf, bg = stacked_boundary_data(f, p), stacked_boundary_data(g, p)
    c = np.vdot(bg.gamma0, bf.gamma1)
    d = np.vdot(bg.gamma1, bf.gamma0)
    return _relative(a - b, c - d, (a, b, c, d), relative)


def green_sums_powers(f: PiecewiseExpPoly, g: PiecewiseExpPoly, p: int) -> complex:
    """sum_tau (-1)^tau [f_r^[tau] conj(g_s^[2p+1-tau]) - f_s^[2p+1-tau] conj(g_r^[tau])].

    Coordinate form of the stacked pairing; equals (f, g^[2p+2]) - (f^[2p+2], g).
    """
    total = 0j
    n = 2 * p + 1
    for tau in range(n + 1):
        fr, _ = mean_jump(f, tau)
        _, gs = mean_jump(g, n - tau)
        _, fs = mean_jump(f, n - tau)
        gr, _ = mean_jump(g, tau)
        total += (-1) ** tau * (fr * np.conj(gs) - fs * np.conj(gr))
    return total


def sobolev_quasi_adjoint(f: PiecewiseExpPoly, p: int) -> PiecewiseExpPoly:
    """A_M^(*) f = A^{-p} f^[2p+2] on L_m = W^p_2 cap W^{2p+2}_2(R minus 0)."""
    from .ascale import solve_a_inverse

    h = quasi_derivative(f, 2 * p + 2)
    for _ in range(p):
        h = solve_a_inverse(h)
    return h


def green_residual_sobolev(f: PiecewiseExpPoly, g: PiecewiseExpPoly, p: int, relative: bool = False) -> float:
    """Green identity of the quasi-triple in (.,.)_p.

    The left side is evaluated honestly: A_M^(*) f = A^{-p} f^[2p+2] is built
    with the exact resolvent and paired in the W^p_2 inner product.
    """
    from .exppoly import sobolev_inner

    check_sobolev(f, p)
    check_sobolev(g, p)
    a = sobolev_inner(sobolev_quasi_adjoint(f, p), g, p)
    b = sobolev_inner(f, sobolev_quasi_adjoint(g, p), p)
    bf, bg = quasi_boundary_data_sobolev(f, p), quasi_boundary_data_sobolev(g, p)
    c = np.vdot(bg.gamma0, bf.gamma1)
    d = np.vdot(bg.gamma1, bf.gamma0)
    return _relative(a - b, c - d, (a, b, c, d), relative)


# -- R^3 point interaction ---------------------------------------------------


@dataclass(frozen=True)
class RadialFunction3D:
    """Radial function f(x) = h(|x|) / |x| on R^3; h is a one-sided exp-poly (right half only)."""

    h: PiecewiseExpPoly

    def __post_init__(self):
        if self.h.left:
            object.__setattr__(self, "h", PiecewiseExpPoly(self.h.right, ()))

    def __add__(self, other):
        return RadialFunction3D(self.h + other.h)

    def __sub__(self, other):
        return RadialFunction3D(self.h - other.h)

    def __mul__(self, a):
        return RadialFunction3D(self.h * a)

    __rmul__ = __mul__

    def inner(self, other: "RadialFunction3D") -> complex:
        """L2(R^3) inner product: 4 pi int_0^inf h_f conj(h_g) dr."""
        return 4 * np.pi * l2_inner(self.h, other.h)

    def norm(self) -> float:
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def apply(self, mu: float) -> "RadialFunction3D":
        """(-Delta + mu^2) pointwise away from the origin: h -> -h'' + mu^2 h."""
        from .exppoly import differentiate

        return RadialFunction3D(self.h * mu**2 - differentiate(differentiate(self.h)))

    @classmethod
    def yukawa(cls, c: complex, kappa: float) -> "RadialFunction3D":
        return cls(PiecewiseExpPoly.term(c, 0, kappa, side="+"))


def boundary_data_3d(c: complex, kappa: float, mu: float, u0: complex = 0.0) -> BoundaryData:
    """Triple for f = c e^{-kappa r}/r + (smooth part with value u0 at 0).

    Gamma1 f = lim r f = c, Gamma0 f = lim (f - Gamma1 f e^{-mu r}/r) = c (mu - kappa) + u0.
    """
    if not kappa > 0:
        raise ValidationError(f"kappa must be positive, got {kappa}")
    return BoundaryData(np.array([c * (mu - kappa) + u0]), np.array([c]))


def boundary_data_radial(f: RadialFunction3D, mu: float) -> BoundaryData:
    """Same triple evaluated on a general radial h/r: Gamma1 = h(0), Gamma0 = h'(0) + mu h(0)."""
    h0 = trace(f.h, "+")
    h1 = trace(f.h, "+", 1)
    return BoundaryData(np.array([h1 + mu * h0]), np.array([h0]))
