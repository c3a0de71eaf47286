"""Seeded property suites; ``zrp selftest`` reports the worst residual of each.

Every suite takes its own generator derived from (seed, suite name), so the
output does not depend on which suites run or in what order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .ascale import defect_basis, fundamental_solution
from .bvs import (
    boundary_data_l2,
    green_residual_l2,
    green_residual_powers,
    green_residual_sobolev,
    quasi_boundary_data_sobolev,
)
from .exppoly import apply_a, derivative_jumps, mean_jump
from .extensions import (
    AdmissibilityData,
    ExtensionSpec,
    admissibility_witness,
    ambient_inner,
    apply_extension,
    b_constraint_residual,
    cayley_u_from_b,
    psi_coordinates,
    regularized_apply,
    sample_domain,
    u_constraint_residual,
    verify_regular_identity,
)
from .oracle import discretize, lowest_eigenvalues
from .sampling import random_exppoly, random_hermitian, random_smooth
from .spectral import Scan, bound_state_3d, bound_states_l2, bound_states_sobolev


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_residual: float
    tolerance: float
    trials: int

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)

    def to_json(self) -> dict:
        return {"max_residual": self.max_residual, "tolerance": self.tolerance, "trials": self.trials, "pass": self.passed}


def suite_rng(seed: int, name: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def green(rng, trials):
    worst = 0.0
    for _ in range(trials):
        R = random_hermitian(rng, 2)
        f, g = random_exppoly(rng), random_exppoly(rng)
        worst = max(worst, green_residual_l2(f, g, R, relative=True))
        for p in (1, 2, 3):
            worst = max(worst, green_residual_powers(random_exppoly(rng), random_exppoly(rng), p, relative=True))
        for p in (2, 4):
            f, g = _sobolev_pair(rng, p)
            worst = max(worst, green_residual_sobolev(f, g, p, relative=True))
    return worst


def _sobolev_pair(rng, p):
    out = []
    for _ in range(2):
        f = random_smooth(rng, p + 1)
        for b in defect_basis(p):
            f = f + complex(rng.normal(), rng.normal()) * b
        out.append(f)
    return out


def ladder(rng, trials):
    worst = 0.0
    for j in range(2, 6):
        worst = max(worst, (apply_a(fundamental_solution(2 * j)) - fundamental_solution(2 * j - 2)).max_coeff())
    for j in range(1, 6):
        # quasi-derivative m^[2j-1] = D A^{j-1} m_{2j} = D m_2; the ordinary one alternates in sign
        _, jump = mean_jump(fundamental_solution(2 * j), 2 * j - 1)
        worst = max(worst, abs(jump + 1))
        ordinary = derivative_jumps(fundamental_solution(2 * j), 2 * j - 1)[2 * j - 1]
        worst = max(worst, abs(ordinary - (-1) ** j))
    return worst


def regularization(rng, trials):
    worst = 0.0
    for _ in range(trials):
        B, R = random_hermitian(rng, 2), random_hermitian(rng, 2)
        spec = ExtensionSpec.l2(B, R)
        f = random_exppoly(rng)
        bd = boundary_data_l2(f, R)
        c = psi_coordinates(regularized_apply(f, spec), spec)
        worst = max(worst, float(np.abs(c - (B @ bd.gamma0 - bd.gamma1)).max()))
        B4 = random_hermitian(rng, 4)
        spec = ExtensionSpec.sobolev(B4, 2)
        f, _ = _sobolev_pair(rng, 2)
        bd = quasi_boundary_data_sobolev(f, 2)
        c = psi_coordinates(regularized_apply(f, spec), spec)
        worst = max(worst, float(np.abs(c - (B4 @ bd.gamma0 - bd.gamma1)).max() / max(1.0, np.abs(bd.stacked()).max())))
    return worst


def symmetry(rng, trials):
    worst = 0.0
    for t in range(trials):
        specs = [
            ExtensionSpec.l2(random_hermitian(rng, 2), random_hermitian(rng, 2)),
            ExtensionSpec.sobolev(random_hermitian(rng, 4), 2),
            ExtensionSpec.nonlocal_(random_hermitian(rng, 2), k=1 + t % 2),
            ExtensionSpec.point3d(float(rng.normal()), mu=float(rng.uniform(0.5, 2))),
            ExtensionSpec.rank_one(float(rng.normal()), float(rng.normal())),
        ]
        for spec in specs:
            f, g = sample_domain(spec, rng, 2)
            a = ambient_inner(apply_extension(f, spec), g, spec)
            b = ambient_inner(f, apply_extension(g, spec), spec)
            worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
    return worst


def cayley(rng, trials):
    """Fraction of disagreements between the B-form and U-form constraints."""
    bad = 0
    for t in range(trials):
        n = int(rng.integers(1, 5))
        B = random_hermitian(rng, n)
        U = cayley_u_from_b(B)
        g0 = rng.normal(size=n) + 1j * rng.normal(size=n)
        g1 = B @ g0 if t % 2 == 0 else rng.normal(size=n) + 1j * rng.normal(size=n)
        scale = max(1.0, np.abs(g0).max(), np.abs(g1).max())
        in_b = b_constraint_residual(B, g0, g1) <= 1e-10 * scale * max(1.0, np.abs(B).max())
        in_u = u_constraint_residual(U, g0, g1) <= 1e-10 * scale * max(1.0, np.abs(B).max())
        bad += in_b != in_u
    return bad / trials


def delta_spectra(rng, trials):
    worst = 0.0
    for beta in (-0.5, -1.0, -2.0, -4.0):
        rep = bound_states_l2(ExtensionSpec.l2([[beta, 0], [0, 0]]), Scan(-5.0, 0.99, 0.01))
        worst = max(worst, abs(rep.eigenvalues[0] - (1 - beta**2 / 4)), *rep.residuals)
        if len(rep.eigenvalues) != 1:
            return math.inf
    for gamma in (1.5, 2.0, 4.0):
        rep = bound_states_l2(ExtensionSpec.l2([[0, 0], [0, gamma]]), Scan(-5.0, 0.99, 0.01))
        worst = max(worst, abs(rep.eigenvalues[0] - (1 - 4 / gamma**2)), *rep.residuals)
    return worst


def delta_oracle(rng, trials):
    worst = 0.0
    for beta in (-0.5, -1.0, -2.0, -4.0):
        ev = lowest_eigenvalues(discretize(ExtensionSpec.l2([[beta, 0], [0, 0]]), 20.0, 0.01), 1)[0]
        worst = max(worst, abs(ev - (1 - beta**2 / 4)))
    return worst


def point3d(rng, trials):
    worst = 0.0
    for mu, b in ((1.0, 2.0), (1.0, -1.0), (2.0, 1.0)):
        rep = bound_state_3d(b, mu)
        kappa = mu - 1 / b
        worst = max(worst, abs(rep.eigenvalues[0] - (mu**2 - kappa**2)), *rep.residuals)
    return worst


def rank_one(rng, trials):
    worst = 0.0
    a = 6 / 5
    for _ in range(trials):
        u = random_smooth(rng, 2)
        for alpha in (0.5, -0.5, 2.0, -2.0):
            for r in (0.0, a):
                worst = max(worst, verify_regular_identity(u, alpha, r))
    return worst


def admissibility(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 4))
        G = random_hermitian(rng, n)
        R = random_hermitian(rng, n)
        # B = (G - R)^{-1} + Y with Y u = 0 for u = (G - R) v, so B (G - R) v = v
        X = np.linalg.inv(G - R)
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        u = (G - R) @ v
        u /= np.linalg.norm(u)
        P = np.eye(n) - np.outer(u, u.conj())
        B = X + P @ random_hermitian(rng, n) @ P
        B = (B + B.conj().T) / 2
        data = AdmissibilityData(G, n)
        eta = admissibility_witness(B, R, data)
        if eta is None:
            return math.inf
        worst = max(worst, float(np.abs(B @ G @ eta - (np.eye(n) + B @ R) @ eta).max()))
    return worst


def sobolev_spectrum(rng, trials):
    rep = bound_states_sobolev(ExtensionSpec.sobolev(np.diag([-2.0, 0, 0, 0]), 2), Scan(-5.0, 0.99, 0.01))
    if not rep.eigenvalues:
        return math.inf
    return max(rep.residuals)


# name -> (function, trials, tolerance)
SUITES = {
    "green_identities": (green, 20, 1e-9),
    "fundamental_solutions": (ladder, 1, 1e-13),
    "regularization_identity": (regularization, 20, 1e-12),
    "symmetry": (symmetry, 10, 1e-9),
    "cayley_equivalence": (cayley, 200, 0.0),
    "delta_spectra": (delta_spectra, 1, 1e-10),
    "delta_oracle": (delta_oracle, 1, 1e-3),
    "point_interaction_3d": (point3d, 1, 1e-12),
    "rank_one_regular": (rank_one, 5, 1e-12),
    "admissibility_witness": (admissibility, 20, 1e-10),
    "sobolev_spectrum": (sobolev_spectrum, 1, 1e-8),
}


def run_suite(name: str, seed: int) -> SuiteResult:
    fn, trials, tol = SUITES[name]
    return SuiteResult(name, float(fn(suite_rng(seed, name), trials)), tol, trials)
