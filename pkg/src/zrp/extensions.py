"""Self-adjoint realizations: constraints, actions, regularization and inverse problem.

A realization is described by an :class:`ExtensionSpec`: a family tag, a
Hermitian coupling matrix ``B`` and (where it applies) a Hermitian
regularization ``R``.  Its domain is the set of f with
``B @ gamma0(f) == gamma1(f)``; the realization acts as the quasi-adjoint.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .ascale import (
    DistributionalValue,
    decompose,
    defect_basis,
    distributional_apply_a,
    fundamental_solution,
)
from .bvs import (
    R_CANONICAL,
    BoundaryData,
    RadialFunction3D,
    boundary_data_l2,
    boundary_data_radial,
    quasi_boundary_data_sobolev,
)
from .errors import (
    CayleySingular,
    DegenerateDenominator,
    DimensionMismatch,
    NotInDomain,
    NotInScale,
    NotInSobolevSpace,
    ValidationError,
)
from .exppoly import (
    JUMP_TOL,
    PiecewiseExpPoly,
    apply_a,
    check_sobolev,
    derivative_jumps,
    l2_inner,
    l2_norm,
    mean_jump,
    trace,
)

DOMAIN_TOL = 1e-10
RANK_TOL = 1e-10


class Family(str, enum.Enum):
    L2 = "l2"
    SOBOLEV = "sobolev"
    NONLOCAL = "nonlocal"
    POINT3D = "3d"
    RANK_ONE = "rank_one"


def hermitian(M, n: int | None = None, name: str = "B", tol: float = 1e-12) -> np.ndarray:
    """Validate (never symmetrize) a Hermitian matrix."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise ValidationError(f"{name} must be {n}x{n}, got {M.shape[0]}x{M.shape[1]}")
    defect = np.abs(M - M.conj().T)
    if defect.max() > tol:
        i, j = np.unravel_index(int(np.argmax(defect)), defect.shape)
        raise ValidationError(
            f"{name} is not Hermitian: entry ({i},{j})={M[i, j]} vs conj of ({j},{i})={M[j, i]}"
        )
    return M


@dataclass(frozen=True)
class ExtensionSpec:
    """Family + coupling B (+ regularization R).

    Orders: L2 -> 2, Sobolev(p) -> p+2, Nonlocal(k) -> 2, Point3D(mu) -> 1, RankOne -> 1.
    For RANK_ONE, B = [[b]] and R = [[r]] with defect vector ``eta``.
    """

    family: Family
    B: np.ndarray
    R: np.ndarray | None = None
    p: int = 0
    k: int = 1
    mu: float = 1.0
    eta: PiecewiseExpPoly | None = field(default=None, compare=False)

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam is Family.SOBOLEV and (self.p < 2 or self.p % 2):
            raise ValidationError(f"Sobolev family needs even p >= 2, got {self.p}")
        if fam is Family.NONLOCAL and self.k < 1:
            raise ValidationError(f"nonlocal family needs k >= 1, got {self.k}")
        if fam is Family.POINT3D and not self.mu > 0:
            raise ValidationError(f"mu must be positive, got {self.mu}")
        n = self.order
        object.__setattr__(self, "B", hermitian(self.B, n, "B"))
        if self.R is not None:
            object.__setattr__(self, "R", hermitian(self.R, n, "R"))
        if fam is Family.RANK_ONE and self.eta is None:
            object.__setattr__(self, "eta", default_rank_one_eta())

    @property
    def order(self) -> int:
        return {
            Family.L2: 2,
            Family.SOBOLEV: self.p + 2,
            Family.NONLOCAL: 2,
            Family.POINT3D: 1,
            Family.RANK_ONE: 1,
        }[self.family]

    @property
    def q(self) -> PiecewiseExpPoly:
        return fundamental_solution(2 * self.k)

    @classmethod
    def l2(cls, B, R=None) -> "ExtensionSpec":
        return cls(Family.L2, B, R)

    @classmethod
    def sobolev(cls, B, p: int) -> "ExtensionSpec":
        return cls(Family.SOBOLEV, B, p=p)

    @classmethod
    def nonlocal_(cls, B, k: int = 1) -> "ExtensionSpec":
        return cls(Family.NONLOCAL, B, k=k)

    @classmethod
    def point3d(cls, b: float, mu: float = 1.0) -> "ExtensionSpec":
        return cls(Family.POINT3D, [[b]], mu=mu)

    @classmethod
    def rank_one(cls, b: float, r: float, eta: PiecewiseExpPoly | None = None) -> "ExtensionSpec":
        return cls(Family.RANK_ONE, [[b]], [[r]], eta=eta)


# -- boundary data per family ------------------------------------------------


def _split(f: PiecewiseExpPoly, basis: list[PiecewiseExpPoly], kmax: int):
    """Least-squares split of the jumps of f (orders 0..kmax) over ``basis``; returns (coeffs, misfit)."""
    J = np.column_stack([derivative_jumps(b, kmax) for b in basis])
    jf = derivative_jumps(f, kmax)
    c, *_ = np.linalg.lstsq(J, jf, rcond=None)
    misfit = float(np.abs(J @ c - jf).max()) if jf.size else 0.0
    return c, misfit / max(1.0, f.max_coeff())


def nonlocal_basis(k: int) -> list[PiecewiseExpPoly]:
    return [fundamental_solution(2), fundamental_solution(2 * k + 2)]


def boundary_data_nonlocal(f: PiecewiseExpPoly, k: int) -> BoundaryData:
    """Gamma0 f = (f(0), (f, q)), Gamma1 f = (f'_s, f_s^[2k+1]) with q = m_{2k}."""
    q = fundamental_solution(2 * k)
    f0, _ = mean_jump(f, 0)
    _, d1 = mean_jump(f, 1)
    _, dk = mean_jump(f, 2 * k + 1)
    return BoundaryData(np.array([f0, l2_inner(f, q)]), np.array([d1, dk]))


def default_rank_one_eta() -> PiecewiseExpPoly:
    m4 = fundamental_solution(4)
    return m4 / l2_norm(m4)


def rank_one_split(f: PiecewiseExpPoly, eta: PiecewiseExpPoly) -> tuple[PiecewiseExpPoly, complex]:
    """f = u + beta*eta with u in D(A^2) (continuous through order 3); eta must jump at order 3."""
    je = derivative_jumps(eta, 3)
    jf = derivative_jumps(f, 3)
    if abs(je[3]) < JUMP_TOL or np.abs(je[:3]).max() > JUMP_TOL:
        raise ValidationError("eta must be C^2 with a jump in its third derivative")
    beta = jf[3] / je[3]
    u = f - beta * eta
    if np.abs(derivative_jumps(u, 3)).max() > JUMP_TOL * max(1.0, f.max_coeff()):
        raise NotInScale("f is not of the form u + beta*eta with u in D(A^2)")
    return u, beta


def boundary_data(f, spec: ExtensionSpec) -> BoundaryData:
    fam = spec.family
    if fam is Family.L2:
        return boundary_data_l2(f, spec.R)
    if fam is Family.SOBOLEV:
        return quasi_boundary_data_sobolev(f, spec.p)
    if fam is Family.NONLOCAL:
        return boundary_data_nonlocal(f, spec.k)
    if fam is Family.POINT3D:
        return boundary_data_radial(f, spec.mu)
    u, beta = rank_one_split(f, spec.eta)
    r = spec.R[0, 0] if spec.R is not None else 0.0
    return BoundaryData(np.array([l2_inner(apply_a(u), spec.eta) + r * beta]), np.array([-beta]))


def constraint_matrix(spec: ExtensionSpec) -> np.ndarray:
    """[B | -I]: f is in the domain iff this times (gamma0, gamma1) vanishes."""
    n = spec.order
    return np.hstack([spec.B, -np.eye(n)])


def constraint_residual(f, spec: ExtensionSpec) -> float:
    bd = boundary_data(f, spec)
    v = bd.stacked()
    return float(np.abs(constraint_matrix(spec) @ v).max() / max(1.0, np.abs(v).max()))


def representable(f, spec: ExtensionSpec) -> bool:
    fam = spec.family
    try:
        if fam is Family.POINT3D:
            return isinstance(f, RadialFunction3D)
        if not isinstance(f, PiecewiseExpPoly):
            return False
        if fam is Family.SOBOLEV:
            check_sobolev(f, spec.p)
        elif fam is Family.NONLOCAL:
            _, misfit = _split(f, nonlocal_basis(spec.k), 2 * spec.k + 1)
            return misfit <= DOMAIN_TOL
        elif fam is Family.RANK_ONE:
            rank_one_split(f, spec.eta)
    except (NotInSobolevSpace, NotInScale, ValidationError):
        return False
    return True


def in_domain(f, spec: ExtensionSpec, tol: float = DOMAIN_TOL) -> bool:
    """f lies in the representable domain (L_m for quasi-triples) and satisfies B gamma0 = gamma1."""
    if not representable(f, spec):
        return False
    return constraint_residual(f, spec) <= tol


# -- Sobolev closure ---------------------------------------------------------


@lru_cache(maxsize=None)
def _gamma1_matrix(p: int) -> np.ndarray:
    return np.column_stack([quasi_boundary_data_sobolev(b, p).gamma1 for b in defect_basis(p)])


def sobolev_gamma1_matrix(p: int) -> np.ndarray:
    """Gamma1-hat restricted to the defect basis: columns are Gamma1-hat of each basis element."""
    return _gamma1_matrix(p).copy()


def sobolev_singular_part(f: PiecewiseExpPoly, spec: ExtensionSpec) -> PiecewiseExpPoly:
    """m_B(f) = (Gamma1-hat on M)^{-1} B Gamma0-hat f."""
    bd = quasi_boundary_data_sobolev(f, spec.p)
    c = np.linalg.solve(sobolev_gamma1_matrix(spec.p), spec.B @ bd.gamma0)
    out = PiecewiseExpPoly.zero()
    for cj, b in zip(c, defect_basis(spec.p)):
        out = out + cj * b
    return out


def in_closure_domain(f: PiecewiseExpPoly, spec: ExtensionSpec, tol: float = DOMAIN_TOL) -> bool:
    """Membership in the domain of the closure of A'_B (Sobolev family), within the class.

    f in W^p_2 and f - m_B(f) in W^{p+2}_2; equivalently the last two rows of
    B Gamma0-hat f = Gamma1-hat f hold.
    """
    if spec.family is not Family.SOBOLEV:
        return in_domain(f, spec, tol)
    try:
        check_sobolev(f, spec.p)
    except NotInSobolevSpace:
        return False
    w = f - sobolev_singular_part(f, spec)
    jumps = derivative_jumps(w, spec.p + 1)
    return float(np.abs(jumps).max()) <= tol * max(1.0, f.max_coeff())


# -- actions -----------------------------------------------------------------


def nonlocal_apply(f: PiecewiseExpPoly, b, k: int = 1, tol: float = DOMAIN_TOL) -> PiecewiseExpPoly:
    """A_q f = -f'' + b21 q f(0) + b22 (f, q) q with q = m_{2k}; domain f_s = 0, f'_s = b11 f(0) + b12 (f, q)."""
    b = hermitian(b, 2, "b")
    q = fundamental_solution(2 * k)
    f0, fs = mean_jump(f, 0)
    _, ds = mean_jump(f, 1)
    fq = l2_inner(f, q)
    scale = max(1.0, f.max_coeff())
    if abs(fs) > tol * scale or abs(ds - b[0, 0] * f0 - b[0, 1] * fq) > tol * scale:
        raise NotInDomain("nonlocal point interaction requires f_s = 0 and f'_s = b11 f(0) + b12 (f, q)")
    return apply_a(f) - f + (b[1, 0] * f0 + b[1, 1] * fq) * q


def apply_extension(f, spec: ExtensionSpec):
    """Image of f under the realization.

    Sobolev: the closure acts as A(f - m_B(f)) on its domain, which for core
    elements is A u with u the smooth part of ``decompose(f, p)``.
    Nonlocal: A_q f + f, i.e. the perturbation of A = -D^2 + 1.
    """
    fam = spec.family
    if fam is Family.SOBOLEV:
        if not in_closure_domain(f, spec):
            raise NotInDomain("f is not in the domain of the Sobolev realization")
        return apply_a(f - sobolev_singular_part(f, spec))
    if fam is Family.NONLOCAL:
        # the model operator is -D^2 + 1, so the realization is A_q + 1
        return nonlocal_apply(f, spec.B, spec.k) + f
    if not in_domain(f, spec):
        raise NotInDomain(f"f is not in the domain of the {fam.value} realization")
    if fam is Family.L2:
        return apply_a(f)
    if fam is Family.POINT3D:
        return f.apply(spec.mu)
    u, _ = rank_one_split(f, spec.eta)
    return apply_a(u)


def ambient_inner(f, g, spec: ExtensionSpec) -> complex:
    from .exppoly import sobolev_inner

    if spec.family is Family.SOBOLEV:
        return sobolev_inner(f, g, spec.p)
    if spec.family is Family.POINT3D:
        return f.inner(g)
    return l2_inner(f, g)


def ambient_norm(f, spec: ExtensionSpec) -> float:
    return float(np.sqrt(max(ambient_inner(f, f, spec).real, 0.0)))


# -- potentials and regularization ---------------------------------------------


@dataclass(frozen=True)
class PotentialRecovery:
    """psi_j = Psi e_j as distributions, and their delta-derivative coefficient matrix (columns)."""

    psi: list
    coeff_matrix: np.ndarray
    note: str


def _l2_defect_basis() -> list[PiecewiseExpPoly]:
    return defect_basis(0)


def recover_potential(spec: ExtensionSpec) -> PotentialRecovery:
    """Psi d = -A^{p+1} (Gamma1 restricted to the defect space)^{-1} d.

    With this Psi the boundary map Gamma0 is exactly Psi*_R, so the realization
    is A+ + Psi B Psi*_R restricted to f with a regular image.
    """
    fam = spec.family
    if fam is Family.POINT3D:
        # (-Delta + mu^2) e^{-mu r}/r = 4 pi delta, and Gamma1(e^{-mu r}/r) = 1
        coeff = -4 * np.pi
        return PotentialRecovery(
            [{"type": "delta_3d", "coeff": coeff}],
            np.array([[coeff]], dtype=complex),
            "psi = -4*pi*delta_3d; the triple's Green identity carries the factor -4*pi",
        )
    if fam is Family.L2:
        basis, power = _l2_defect_basis(), 1
        G = np.column_stack([boundary_data_l2(b).gamma1 for b in basis])
    elif fam is Family.SOBOLEV:
        basis, power = defect_basis(spec.p), spec.p + 1
        G = sobolev_gamma1_matrix(spec.p)
    else:
        raise ValidationError(f"inverse problem not available for family {fam.value}")
    Ginv = np.linalg.inv(G)
    psi = []
    for j in range(len(basis)):
        pre = PiecewiseExpPoly.zero()
        for i, b in enumerate(basis):
            pre = pre + Ginv[i, j] * b
        d = distributional_apply_a(pre)
        for _ in range(power - 1):
            d = distributional_apply_a(d)
        d = -d
        if d.regular.max_coeff() > 1e-12:
            raise AssertionError("psi has a regular part; defect basis is not annihilated")
        coeffs = [0j if abs(c) < 1e-13 else c for c in d.delta_coeffs]
        psi.append(DistributionalValue(PiecewiseExpPoly.zero(), tuple(coeffs)))
    width = max(len(d.delta_coeffs) for d in psi)
    M = np.column_stack([d.delta_vector(width) for d in psi])
    return PotentialRecovery(psi, M, "Gamma0 = Psi*_R")


def regularized_apply(f: PiecewiseExpPoly, spec: ExtensionSpec) -> DistributionalValue:
    """(A+ + Psi B Psi*_R) f as a distribution; its singular part vanishes iff f is in the domain."""
    rec = recover_potential(spec)
    if spec.family is Family.L2:
        bd = boundary_data_l2(f, spec.R)
        base = distributional_apply_a(f)
    elif spec.family is Family.SOBOLEV:
        try:
            el = decompose(f, spec.p)
        except NotInScale:
            raise
        bd = quasi_boundary_data_sobolev(f, spec.p)
        sing = distributional_apply_a(el.singular_part)
        for _ in range(spec.p):
            sing = distributional_apply_a(sing)
        base = DistributionalValue(apply_a(el.smooth)) + sing
    else:
        raise ValidationError(f"regularized_apply not available for family {spec.family.value}")
    coupling = spec.B @ bd.gamma0
    out = base
    for c, psi in zip(coupling, rec.psi):
        out = out + c * psi
    return out


def psi_coordinates(value: DistributionalValue, spec: ExtensionSpec) -> np.ndarray:
    """Coefficients of the singular part of ``value`` over the psi basis."""
    rec = recover_potential(spec)
    M = rec.coeff_matrix
    width = max(M.shape[0], len(value.delta_coeffs))
    if width > M.shape[0]:
        M = np.vstack([M, np.zeros((width - M.shape[0], M.shape[1]))])
    d = value.delta_vector(width)
    c, *_ = np.linalg.lstsq(M, d, rcond=None)
    if np.abs(M @ c - d).max() > 1e-9 * max(1.0, np.abs(d).max()):
        raise AssertionError("singular part is not in the span of psi")
    return c


# -- Cayley transform ----------------------------------------------------------


def cayley_u_from_b(B) -> np.ndarray:
    """U = (I - iB)(I + iB)^{-1}."""
    B = hermitian(B)
    n = B.shape[0]
    eye = np.eye(n)
    return (eye - 1j * B) @ np.linalg.inv(eye + 1j * B)


def b_from_u(U, tol: float = 1e-10) -> np.ndarray:
    """B = i (I + U)^{-1} (U - I); fails when -1 is an eigenvalue of U."""
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    n = U.shape[0]
    if np.abs(U.conj().T @ U - np.eye(n)).max() > 1e-10:
        raise ValidationError("U is not unitary")
    eye = np.eye(n)
    s = np.linalg.svd(eye + U, compute_uv=False)
    if s.min() <= tol:
        raise CayleySingular("U has eigenvalue -1; the extension has no B-parametrization")
    B = 1j * np.linalg.solve(eye + U, U - eye)
    return (B + B.conj().T) / 2


def b_constraint_residual(B, g0, g1) -> float:
    return float(np.abs(np.asarray(B) @ g0 - g1).max())


def u_constraint_residual(U, g0, g1) -> float:
    """|(I - U) g0 - i (I + U) g1|."""
    eye = np.eye(np.asarray(U).shape[0])
    return float(np.abs((eye - U) @ g0 - 1j * (eye + U) @ g1).max())


# -- admissibility ---------------------------------------------------------------


@dataclass(frozen=True)
class AdmissibilityData:
    """P_N A on N cap D(A) in coordinates.

    ``gram`` is n x d: column j holds P_N A eta_j in an orthonormal basis of N,
    for an orthonormal basis eta_j of N cap D(A); ``embedding`` (n x d) gives
    the eta_j themselves.  When N is contained in D(A) (d == n, embedding = I)
    gram is the Hermitian matrix ((A eta_i, eta_j)).
    """

    gram: np.ndarray
    dim_intersection: int
    embedding: np.ndarray | None = None

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.gram, dtype=complex))
        d = int(self.dim_intersection)
        if G.shape[1] != d:
            raise DimensionMismatch(f"gram has {G.shape[1]} columns but dim_intersection={d}")
        E = self.embedding
        if E is None:
            if G.shape[0] != d:
                raise DimensionMismatch("embedding required when N is not contained in D(A)")
            E = np.eye(d, dtype=complex)
            hermitian(G, d, "gram")
        E = np.atleast_2d(np.asarray(E, dtype=complex))
        if E.shape != G.shape:
            raise DimensionMismatch(f"embedding shape {E.shape} differs from gram shape {G.shape}")
        object.__setattr__(self, "gram", G)
        object.__setattr__(self, "embedding", E)

    @property
    def n(self) -> int:
        return self.gram.shape[0]


def admissibility_witness(B, R, data: AdmissibilityData, tol: float = RANK_TOL) -> np.ndarray | None:
    """A nonzero eta in N cap D(A) with B P_N A eta = (I + B R) eta, or None."""
    n = data.n
    B = hermitian(B, n, "B")
    R = hermitian(R, n, "R")
    if data.dim_intersection == 0:
        return None
    M = B @ data.gram - (np.eye(n) + B @ R) @ data.embedding
    _, s, vh = np.linalg.svd(M)
    smax = max(s.max(), 1.0) if s.size else 1.0
    if s.size == data.dim_intersection and s.min() > tol * smax:
        return None
    c = vh.conj()[-1]
    return data.embedding @ c


def admissible(B, R, data: AdmissibilityData) -> bool:
    return admissibility_witness(B, R, data) is None


# -- regular rank-one perturbation ------------------------------------------------


def regular_rank_one_b(alpha: float, r: float, gram_a: float) -> float:
    """b = alpha / (1 + alpha ((A eta, eta) - r))."""
    den = 1 + alpha * (gram_a - r)
    if abs(den) < 1e-14:
        raise DegenerateDenominator(f"1 + alpha((A eta, eta) - r) = {den}")
    return alpha / den


def verify_regular_identity(u: PiecewiseExpPoly, alpha: float, r: float, eta: PiecewiseExpPoly | None = None) -> float:
    """Residual of A_b'(u + beta eta) = (A + alpha(., psi) psi)(u + beta eta), psi = A eta.

    beta is fixed by the domain condition b[(Au, eta) + r beta] = -beta.
    Returns the relative L2 residual.
    """
    eta = default_rank_one_eta() if eta is None else eta
    psi = apply_a(eta)
    a = l2_inner(psi, eta).real
    b = regular_rank_one_b(alpha, r, a)
    Au = apply_a(u)
    den = 1 + b * r
    if abs(den) < 1e-14:
        raise DegenerateDenominator("1 + b r = 0")
    beta = -b * l2_inner(Au, eta) / den
    f = u + beta * eta
    cond = b * (l2_inner(Au, eta) + r * beta) + beta
    lhs = Au
    rhs = apply_a(f) + alpha * l2_inner(f, psi) * psi
    res = l2_norm(lhs - rhs) + abs(cond)
    return res / max(1.0, l2_norm(lhs))


# -- domain sampling ----------------------------------------------------------------


def _candidates(spec: ExtensionSpec, rng: np.random.Generator, n_smooth: int):
    from .sampling import random_exppoly, random_smooth

    fam = spec.family
    if fam is Family.POINT3D:
        smooth = []
        for _ in range(n_smooth):
            g = random_exppoly(rng, nterms=2, max_power=2, complex_coeffs=True)
            # r * (...) vanishes at 0, so h/r is smooth there
            h = PiecewiseExpPoly(tuple(type(t)(t.coeff, t.power + 1, t.rate) for t in g.right), ())
            smooth.append(RadialFunction3D(h))
        return smooth, [RadialFunction3D.yukawa(1.0, spec.mu)]
    if fam is Family.L2:
        return [random_smooth(rng, 1) for _ in range(n_smooth)], _l2_defect_basis()
    if fam is Family.SOBOLEV:
        return [random_smooth(rng, spec.p + 1) for _ in range(n_smooth)], defect_basis(spec.p)
    if fam is Family.NONLOCAL:
        return [random_smooth(rng, spec.k + 1) for _ in range(n_smooth)], nonlocal_basis(spec.k)
    return [random_smooth(rng, 2) for _ in range(n_smooth)], [spec.eta]


def sample_domain(spec: ExtensionSpec, rng: np.random.Generator, count: int = 2, n_smooth: int = 3) -> list:
    """Random domain elements: nullspace of the constraints over smooth pieces plus the defect basis."""
    smooth, basis = _candidates(spec, rng, n_smooth)
    cands = smooth + basis
    if spec.family is Family.NONLOCAL:
        # L_m coordinates alone do not fix the domain; f_s = 0 is an extra row
        rows = []
        for c in cands:
            bd = boundary_data_nonlocal(c, spec.k)
            rows.append(np.concatenate([bd.stacked(), [mean_jump(c, 0)[1]]]))
        D = np.column_stack(rows)
        K = np.zeros((3, 5), dtype=complex)
        K[:2, :4] = constraint_matrix(spec)
        K[2, 4] = 1
    else:
        D = np.column_stack([boundary_data(c, spec).stacked() for c in cands])
        K = constraint_matrix(spec)
    M = K @ D
    _, s, vh = np.linalg.svd(M)
    smax = max(s.max() if s.size else 0.0, 1.0)
    rank = int((s > RANK_TOL * smax).sum())
    null = vh.conj()[rank:].T
    out = []
    for _ in range(count):
        w = null @ (rng.normal(size=null.shape[1]) + 1j * rng.normal(size=null.shape[1]))
        f = None
        for wi, c in zip(w, cands):
            f = wi * c if f is None else f + wi * c
        out.append(f)
    return out
