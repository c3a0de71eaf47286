"""Bound states of the realizations and exact eigenpair residuals.

Every family reduces to a small matrix M(E) whose kernel gives the
eigenfunction coefficients.  Roots of det M(E) are bracketed on a uniform
E-grid and refined with Brent's method; double roots (no sign change) are
caught as dips of |det| and polished on the smallest singular value.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .ascale import defect_basis, fundamental_solution, solve_a_inverse, solve_shifted
from .bvs import RadialFunction3D, boundary_data_l2
from .errors import ValidationError, WindowInvalid
from .exppoly import PiecewiseExpPoly, l2_inner, quasi_traces
from .extensions import (
    ExtensionSpec,
    Family,
    ambient_inner,
    ambient_norm,
    apply_extension,
    boundary_data,
    sobolev_gamma1_matrix,
)

TANGENT_TOL = 1e-10
NULL_TOL = 1e-7
# below this |E| the resolvent is summed as a Neumann series (rate-1 resonance)
NEUMANN_RADIUS = 0.05


@dataclass(frozen=True)
class Scan:
    emin: float
    emax: float
    step: float = 0.01
    refinement_tol: float = 1e-12

    def validate(self, threshold: float) -> None:
        if not (math.isfinite(self.emin) and math.isfinite(self.emax)):
            raise WindowInvalid("scan window must be finite")
        if self.emin >= self.emax:
            raise WindowInvalid(f"emin={self.emin} must be below emax={self.emax}")
        if self.emax >= threshold:
            raise WindowInvalid(f"emax={self.emax} must lie below the threshold {threshold}")
        if not self.step > 0:
            raise WindowInvalid(f"step must be positive, got {self.step}")
        if not self.refinement_tol > 0:
            raise WindowInvalid("refinement_tol must be positive")

    def grid(self) -> np.ndarray:
        n = int(math.ceil((self.emax - self.emin) / self.step - 1e-9))
        return np.linspace(self.emin, self.emin + n * self.step, n + 1).clip(max=self.emax)

    def to_json(self) -> dict:
        return {"E_min": self.emin, "E_max": self.emax, "step": self.step, "refinement_tol": self.refinement_tol}


@dataclass
class SpectrumReport:
    family: ExtensionSpec
    eigenvalues: list = field(default_factory=list)
    eigenfunctions: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    tangent_root: list = field(default_factory=list)
    scan: Scan | None = None

    def to_json(self) -> dict:
        fns = []
        for f in self.eigenfunctions:
            fns.append({"h": f.h.to_json()} if isinstance(f, RadialFunction3D) else f.to_json())
        return {
            "family": self.family.family.value,
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "eigenfunctions": fns,
            "residuals": [float(r) for r in self.residuals],
            "tangent_root": list(self.tangent_root),
            "scan": self.scan.to_json() if self.scan else None,
        }


# -- resolvent near the resonance ---------------------------------------------


def resolvent(g: PiecewiseExpPoly, E: float) -> PiecewiseExpPoly:
    """(A - E)^{-1} g, summed as sum E^n A^{-n-1} g when |E| is small.

    Closed-form coefficients carry 1/E^k cancellations when g has rate 1 and
    sqrt(1 - E) is close to 1; the series uses only the exact resonant branch.
    """
    if E == 0:
        return solve_a_inverse(g)
    if abs(E) >= NEUMANN_RADIUS:
        return solve_shifted(g, E)
    nterms = int(math.ceil(math.log(1e-18) / math.log(abs(E)))) + 1
    term = solve_a_inverse(g)
    out = term
    for n in range(1, nterms):
        term = solve_a_inverse(term)
        out = out + E**n * term
    return out


# -- per-family systems ---------------------------------------------------------


def _l2_system(spec: ExtensionSpec, E: float):
    kappa = math.sqrt(1 - E)
    funcs = [
        PiecewiseExpPoly.term(1.0, 0, kappa),
        PiecewiseExpPoly.odd([PiecewiseExpPoly.term(1.0, 0, kappa).right[0]]),
    ]
    cols = []
    for phi in funcs:
        bd = boundary_data_l2(phi, spec.R)
        cols.append(spec.B @ bd.gamma0 - bd.gamma1)
    return np.column_stack(cols), funcs


def _sobolev_system(spec: ExtensionSpec, E: float):
    basis = defect_basis(spec.p)
    # A (A - E)^{-1} m_j = m_j + E (A - E)^{-1} m_j
    funcs = [b + E * resolvent(b, E) if E != 0 else b for b in basis]
    sign = np.where(np.arange(spec.p + 2) % 2, -1, 1)
    Q = np.column_stack([sign * quasi_traces(h, spec.p + 1)[0] for h in funcs])
    return spec.B @ Q - sobolev_gamma1_matrix(spec.p), funcs


def _nonlocal_system(spec: ExtensionSpec, E: float):
    kappa = math.sqrt(1 - E)
    q = spec.q
    b = spec.B
    e = PiecewiseExpPoly.term(1.0, 0, kappa)
    w = resolvent(q, E)
    # f = a e - s w with s = b21 f(0) + b22 (f, q) and f'_s = -2 kappa a = b11 f(0) + b12 (f, q)
    eq, w0, wq = l2_inner(e, q), w(0.0), l2_inner(w, q)
    M = np.array(
        [
            [-2 * kappa - b[0, 0] - b[0, 1] * eq, b[0, 0] * w0 + b[0, 1] * wq],
            [-b[1, 0] - b[1, 1] * eq, 1 + b[1, 0] * w0 + b[1, 1] * wq],
        ],
        dtype=complex,
    )
    return M, [e, -w]


_SYSTEMS = {Family.L2: _l2_system, Family.SOBOLEV: _sobolev_system, Family.NONLOCAL: _nonlocal_system}


# -- root finding ---------------------------------------------------------------


def _hadamard(M: np.ndarray) -> float:
    return float(max(1.0, np.prod(np.linalg.norm(M, axis=0))))


def _smin(system, E) -> float:
    M, _ = system(E)
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[-1] / max(1.0, s[0]))


def find_roots(system, scan: Scan) -> list[tuple[float, bool]]:
    """Roots of det M(E) in the window as (E, tangent) pairs."""
    grid = scan.grid()
    dets = np.array([np.linalg.det(system(E)[0]) for E in grid])
    mags = np.abs(dets)
    # det is real up to a constant phase for Hermitian data
    theta = 0.5 * np.angle(np.sum(dets**2)) if mags.max() > 0 else 0.0
    rot = dets * np.exp(-1j * theta)
    real_ok = np.abs(rot.imag).max() <= 1e-8 * max(mags.max(), 1e-300)
    vals = rot.real

    def fdet(E):
        return (np.linalg.det(system(E)[0]) * np.exp(-1j * theta)).real

    roots: list[tuple[float, bool]] = []
    if real_ok:
        for i in range(len(grid)):
            if vals[i] == 0:
                nb = [vals[j] for j in (i - 1, i + 1) if 0 <= j < len(grid)]
                roots.append((float(grid[i]), len(nb) == 2 and nb[0] * nb[1] > 0))
            elif i + 1 < len(grid) and vals[i + 1] != 0 and np.sign(vals[i]) != np.sign(vals[i + 1]):
                r = brentq(fdet, grid[i], grid[i + 1], xtol=scan.refinement_tol, rtol=4 * np.finfo(float).eps, maxiter=500)
                roots.append((float(r), False))
    # dips of |det| with no sign change: tangent roots (or any root of a complex det)
    for i in range(1, len(grid) - 1):
        if not (mags[i] <= mags[i - 1] and mags[i] <= mags[i + 1]):
            continue
        # a zero within half a step leaves |det| at most ~1/3 of the far neighbour (1/9 if tangent)
        if not mags[i] <= 0.5 * max(mags[i - 1], mags[i + 1]):
            continue
        if real_ok and (np.sign(vals[i - 1]) != np.sign(vals[i]) or np.sign(vals[i]) != np.sign(vals[i + 1]) or vals[i] == 0):
            continue
        lo, hi = grid[i - 1], grid[i + 1]
        res = minimize_scalar(lambda E: abs(np.linalg.det(system(E)[0])), bounds=(lo, hi), method="bounded",
                              options={"xatol": scan.refinement_tol})
        E0 = float(res.x)
        M0, _ = system(E0)
        if abs(np.linalg.det(M0)) > TANGENT_TOL * _hadamard(M0):
            continue
        # polish on the smallest singular value, which is V-shaped at a semisimple root
        w = max(scan.step * 1e-3, 1e-6)
        res = minimize_scalar(lambda E: _smin(system, E), bounds=(max(lo, E0 - w), min(hi, E0 + w)), method="bounded",
                              options={"xatol": scan.refinement_tol})
        E1 = float(res.x) if res.fun <= _smin(system, E0) else E0
        if all(abs(E1 - r) > 1e3 * scan.refinement_tol for r, _ in roots):
            roots.append((E1, real_ok))
    roots.sort()
    return roots


def _normalize(funcs: list, spec: ExtensionSpec) -> list:
    """Orthonormalize; fix the phase so the first nonzero boundary coordinate is real positive."""
    out = []
    for f in funcs:
        for g in out:
            f = f - ambient_inner(f, g, spec) * g
        n = ambient_norm(f, spec)
        if n < 1e-12:
            continue
        f = f / n
        v = _boundary_vector(f, spec)
        nz = np.nonzero(np.abs(v) > 1e-8 * max(np.abs(v).max(), 1e-300))[0]
        if nz.size:
            ph = v[nz[0]] / abs(v[nz[0]])
            f = f * np.conj(ph)
        out.append(f)
    return out


def _boundary_vector(f, spec: ExtensionSpec) -> np.ndarray:
    if spec.family is Family.NONLOCAL:
        from .extensions import boundary_data_nonlocal

        return boundary_data_nonlocal(f, spec.k).stacked()
    return boundary_data(f, spec).stacked()


def _combine(c, funcs):
    f = PiecewiseExpPoly.zero()
    for ci, phi in zip(c, funcs):
        f = f + complex(ci) * phi
    return f


def bound_states(spec: ExtensionSpec, scan: Scan) -> SpectrumReport:
    if spec.family is Family.POINT3D:
        return bound_state_3d(spec.B[0, 0].real, spec.mu)
    if spec.family not in _SYSTEMS:
        raise ValidationError(f"no bound-state solver for family {spec.family.value}")
    scan.validate(1.0)
    system = lambda E: _SYSTEMS[spec.family](spec, E)  # noqa: E731
    report = SpectrumReport(spec, scan=scan)
    for E, tangent in find_roots(system, scan):
        M, funcs = system(E)
        _, s, vh = np.linalg.svd(M)
        null = vh.conj()[s <= NULL_TOL * max(1.0, s[0])]
        if null.shape[0] == 0:
            null = vh.conj()[-1:]
        efs = _normalize([_combine(c, funcs) for c in null], spec)
        for f in efs:
            report.eigenvalues.append(E)
            report.eigenfunctions.append(f)
            report.residuals.append(eigencheck(f, E, spec))
            report.tangent_root.append(bool(tangent))
    return report


def bound_states_l2(spec: ExtensionSpec, scan: Scan) -> SpectrumReport:
    """Ansatz a e^{-kappa|x|} + b sign(x) e^{-kappa|x|}, kappa = sqrt(1 - E)."""
    if spec.family is not Family.L2:
        raise ValidationError("bound_states_l2 needs an L2 family spec")
    return bound_states(spec, scan)


def bound_states_sobolev(spec: ExtensionSpec, scan: Scan) -> SpectrumReport:
    """Eigenfunctions A (A - E)^{-1} m with m in the defect span; det(B Q(E) - Gamma1-hat|M) = 0."""
    if spec.family is not Family.SOBOLEV:
        raise ValidationError("bound_states_sobolev needs a Sobolev family spec")
    return bound_states(spec, scan)


def bound_states_nonlocal(spec: ExtensionSpec, scan: Scan) -> SpectrumReport:
    """Even ansatz a e^{-kappa|x|} - s (A - E)^{-1} q; E is reported for A_q + 1."""
    if spec.family is not Family.NONLOCAL:
        raise ValidationError("bound_states_nonlocal needs a nonlocal family spec")
    return bound_states(spec, scan)


def bound_state_3d(b: float, mu: float) -> SpectrumReport:
    """f = e^{-kappa r}/r with kappa = mu - 1/b and E = mu^2 - kappa^2 when kappa > 0."""
    if b == 0:
        raise ValidationError("b must be nonzero")
    spec = ExtensionSpec.point3d(b, mu)
    report = SpectrumReport(spec)
    kappa = mu - 1.0 / b
    if kappa > 0:
        E = mu * mu - kappa * kappa
        f = RadialFunction3D.yukawa(math.sqrt(kappa / (2 * math.pi)), kappa)
        report.eigenvalues.append(E)
        report.eigenfunctions.append(f)
        report.residuals.append(eigencheck(f, E, spec))
        report.tangent_root.append(False)
    return report


def eigencheck(f, E: float, spec: ExtensionSpec) -> float:
    """||apply_extension(f) - E f|| in the family's norm (L2, W^p_2 or L2(R^3))."""
    return ambient_norm(apply_extension(f, spec) - f * E, spec)
