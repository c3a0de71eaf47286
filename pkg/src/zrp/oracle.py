"""Finite-difference oracle: grid matrices on [-L, L] with Dirichlet walls, and quadrature.

The 3-point stencil discretizes -D^2 + 1.  A delta interaction of strength
beta adds beta/h at the center node; the nonlocal family adds its rank-two
coupling with h-weighted sums standing in for (f, q).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import eigh, eigh_tridiagonal

from .bvs import R_CANONICAL
from .errors import UnsupportedFamily, ValidationError
from .exppoly import PiecewiseExpPoly, _eval_side
from .extensions import ExtensionSpec, Family

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class GridOperator:
    L: float
    h: float
    matrix: np.ndarray
    family: ExtensionSpec
    x: np.ndarray
    # (diagonal, off-diagonal) when the matrix is tridiagonal
    tridiagonal: tuple | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())


def _delta_strength(spec: ExtensionSpec) -> float:
    B = spec.B
    if spec.R is not None and np.abs(spec.R - R_CANONICAL).max() > 0:
        raise UnsupportedFamily("the oracle only covers the canonical regularization")
    if abs(B[0, 1]) + abs(B[1, 0]) + abs(B[1, 1]) > 0 or abs(B[0, 0].imag) > 0:
        raise UnsupportedFamily("the oracle covers B = diag(beta, 0) only (free or delta interaction)")
    return float(B[0, 0].real)


def discretize(spec: ExtensionSpec, L: float, h: float) -> GridOperator:
    if not (L > 0 and h > 0 and h < L):
        raise ValidationError(f"need 0 < h < L, got L={L}, h={h}")
    N = int(round(L / h))
    x = h * np.arange(-N + 1, N)
    n, c = x.size, N - 1
    diag = np.full(n, 2.0 / h**2 + 1.0)
    off = np.full(n - 1, -1.0 / h**2)
    if spec.family is Family.L2:
        diag[c] += _delta_strength(spec) / h
        M = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
        return GridOperator(L, h, M.astype(complex), spec, x, (diag, off))
    if spec.family is not Family.NONLOCAL:
        raise UnsupportedFamily(f"no finite-difference oracle for family {spec.family.value}")
    b = spec.B
    q = np.real(spec.q(x))
    M = (np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)).astype(complex)
    M[c, c] += b[0, 0] / h
    M[c, :] += b[0, 1] * q
    M[:, c] += b[1, 0] * q
    M += b[1, 1] * h * np.outer(q, q)
    gop = GridOperator(L, h, M, spec, x)
    if gop.hermiticity_defect() > HERMITIAN_TOL:
        raise AssertionError("grid matrix is not Hermitian")
    return gop


def lowest_eigenvalues(gop: GridOperator, k: int) -> list[float]:
    if k < 0 or k > gop.size:
        raise ValidationError(f"k must lie in 0..{gop.size}, got {k}")
    if k == 0:
        return []
    if gop.tridiagonal is not None:
        d, e = gop.tridiagonal
        w = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, k - 1))
    else:
        M = gop.matrix
        # real symmetric storage is several times faster when the couplings are real
        if not np.any(M.imag):
            M = M.real
        w = eigh(M, eigvals_only=True, subset_by_index=[0, k - 1])
    return [float(v) for v in np.sort(w)]


def quadrature_inner(f: PiecewiseExpPoly, g: PiecewiseExpPoly, L: float, h: float) -> complex:
    """(f, g) by composite Simpson on [0, L] for each half-line, with one-sided limits at 0."""
    n = int(round(L / h))
    n += n % 2
    t = np.linspace(0.0, L, n + 1)
    total = 0j
    for fs, gs in ((f.right, g.right), (f.left, g.left)):
        y = _eval_side(fs, t) * np.conj(_eval_side(gs, t))
        total += simpson(y.real, x=t) + 1j * simpson(y.imag, x=t)
    return complex(total)
