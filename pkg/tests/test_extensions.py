import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zrp.ascale import decompose, defect_basis, fundamental_solution
from zrp.bvs import boundary_data_l2, quasi_boundary_data_sobolev
from zrp.errors import CayleySingular, DegenerateDenominator, DimensionMismatch, NotInDomain, ValidationError
from zrp.exppoly import ExpTerm, PiecewiseExpPoly, apply_a, derivative_jumps, l2_inner, l2_norm, mean_jump
from zrp.extensions import (
    AdmissibilityData,
    ExtensionSpec,
    Family,
    admissibility_witness,
    admissible,
    ambient_inner,
    apply_extension,
    b_constraint_residual,
    b_from_u,
    cayley_u_from_b,
    constraint_matrix,
    default_rank_one_eta,
    in_closure_domain,
    in_domain,
    nonlocal_apply,
    psi_coordinates,
    recover_potential,
    regular_rank_one_b,
    regularized_apply,
    sample_domain,
    u_constraint_residual,
    verify_regular_identity,
)
from zrp.sampling import random_exppoly, random_hermitian, random_smooth

E1 = PiecewiseExpPoly.term(1.0, 0, 1.0)
ZERO2 = np.zeros((2, 2))
seeds = st.integers(0, 2**32 - 1)


def delta(beta):
    return ExtensionSpec.l2([[beta, 0], [0, 0]])


# -- specs and constraints ---------------------------------------------------


def test_spec_validation():
    with pytest.raises(ValidationError, match=r"\(0,1\)"):
        ExtensionSpec.l2([[0, 1], [0, 0]])
    with pytest.raises(ValidationError):
        ExtensionSpec.sobolev(np.eye(3), 2)
    with pytest.raises(ValidationError):
        ExtensionSpec.sobolev(np.eye(5), 3)
    with pytest.raises(ValidationError):
        ExtensionSpec.point3d(1.0, mu=0.0)
    assert ExtensionSpec.sobolev(np.eye(6), 4).order == 6


def test_constraint_matrix_shapes():
    K = constraint_matrix(ExtensionSpec.l2(ZERO2))
    assert np.array_equal(K, np.hstack([ZERO2, -np.eye(2)]))


def test_delta_and_delta_prime_conditions():
    # B = diag(beta, 0): beta f_r = f'_s and f_s = 0
    beta = -1.5
    f = PiecewiseExpPoly.term(1.0, 0, -beta / 2)
    assert in_domain(f, delta(beta))
    assert not in_domain(f, delta(beta + 0.1))
    # B = diag(0, gamma): -gamma f'_r = f_s and f'_s = 0
    gamma = 3.0
    g = PiecewiseExpPoly.odd([ExpTerm(1.0, 0, 2 / gamma)])
    bd = boundary_data_l2(g)
    assert bd.gamma1[1] == pytest.approx(-gamma * mean_jump(g, 1)[0])
    assert in_domain(g, ExtensionSpec.l2([[0, 0], [0, gamma]]))


def test_in_domain_examples():
    assert in_domain(E1, delta(-2))
    assert in_domain(fundamental_solution(4), ExtensionSpec.l2(ZERO2))
    assert not in_domain(fundamental_solution(2), ExtensionSpec.l2(ZERO2))


@given(seeds)
def test_zero_coupling_is_the_free_operator(seed):
    rng = np.random.default_rng(seed)
    f = random_exppoly(rng) if seed % 2 else random_smooth(rng, 1)
    smooth = np.abs(derivative_jumps(f, 1)).max() <= 1e-10 * max(1, f.max_coeff())
    assert in_domain(f, ExtensionSpec.l2(ZERO2)) == smooth


def test_apply_extension_examples():
    assert apply_extension(E1, delta(-2)).max_coeff() < 1e-15
    assert apply_extension(fundamental_solution(4), ExtensionSpec.l2(ZERO2)).allclose(fundamental_solution(2))
    rng = np.random.default_rng(1)
    u = random_smooth(rng, 3)
    assert apply_extension(u, ExtensionSpec.sobolev(np.zeros((4, 4)), 2)).allclose(apply_a(u), 1e-10)
    with pytest.raises(NotInDomain):
        apply_extension(fundamental_solution(2), ExtensionSpec.l2(ZERO2))


def test_sobolev_core_action_uses_smooth_part(rng):
    for _ in range(10):
        spec = ExtensionSpec.sobolev(random_hermitian(rng, 4), 2)
        (f,) = sample_domain(spec, rng, 1)
        assert in_domain(f, spec) and in_closure_domain(f, spec)
        assert apply_extension(f, spec).allclose(apply_a(decompose(f, 2).smooth), 1e-9)


@pytest.mark.parametrize("family", ["l2", "sobolev", "nonlocal", "3d", "rank_one"])
def test_symmetry(family):
    rng = np.random.default_rng(hash(family) % 2**32)
    worst = 0.0
    for t in range(100 if family != "sobolev" else 50):
        if family == "l2":
            spec = ExtensionSpec.l2(random_hermitian(rng, 2), random_hermitian(rng, 2))
        elif family == "sobolev":
            spec = ExtensionSpec.sobolev(random_hermitian(rng, 4), 2)
        elif family == "nonlocal":
            spec = ExtensionSpec.nonlocal_(random_hermitian(rng, 2), k=1 + t % 3)
        elif family == "3d":
            spec = ExtensionSpec.point3d(float(rng.normal()), mu=float(rng.uniform(0.3, 3)))
        else:
            spec = ExtensionSpec.rank_one(float(rng.normal()), float(rng.normal()))
        f, g = sample_domain(spec, rng, 2)
        assert in_domain(f, spec) and in_domain(g, spec)
        a = ambient_inner(apply_extension(f, spec), g, spec)
        b = ambient_inner(f, apply_extension(g, spec), spec)
        worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
    assert worst < 1e-9


def test_asymmetric_when_constraint_dropped(rng):
    # the check has teeth: pairs from D(A*) without the condition violate symmetry
    f, g = random_exppoly(rng), random_exppoly(rng)
    lhs = l2_inner(apply_a(f), g) - l2_inner(f, apply_a(g))
    assert abs(lhs) > 1e-3


# -- regularization and potentials ----------------------------------------------


def test_regularized_examples():
    spec = ExtensionSpec.l2(ZERO2)
    d = regularized_apply(fundamental_solution(2), spec)
    assert np.allclose(psi_coordinates(d, spec), [1, 0])
    assert d.regular.max_coeff() < 1e-15
    assert regularized_apply(E1, delta(-2)).is_regular(1e-14)


@given(seeds)
def test_regularized_singular_part_l2(seed):
    rng = np.random.default_rng(seed)
    B, R = random_hermitian(rng, 2), random_hermitian(rng, 2)
    spec = ExtensionSpec.l2(B, R)
    f = random_exppoly(rng)
    d = regularized_apply(f, spec)
    # [DERIVED] independent: jumps from derivative_jumps, traces from point evaluation
    j = derivative_jumps(f, 1)
    bd = boundary_data_l2(f, R)
    # first coordinate: mean value (point evaluation at 0) shifted by (R0 - R) Gamma1
    assert bd.gamma0[0] == pytest.approx(f(0.0) + ((np.diag([0.5, -0.5]) - R) @ np.array([j[1], j[0]]))[0])
    expected = B @ bd.gamma0 - np.array([j[1], j[0]])
    assert np.allclose(psi_coordinates(d, spec), expected, atol=1e-12 * max(1, np.abs(expected).max()))
    assert d.regular.allclose(apply_a(f), 1e-12)


def test_regularized_singular_part_sobolev(rng):
    for _ in range(20):
        B = random_hermitian(rng, 4)
        spec = ExtensionSpec.sobolev(B, 2)
        f = random_smooth(rng, 3)
        for b in defect_basis(2):
            f = f + complex(rng.normal(), rng.normal()) * b
        bd = quasi_boundary_data_sobolev(f, 2)
        c = psi_coordinates(regularized_apply(f, spec), spec)
        assert np.allclose(c, B @ bd.gamma0 - bd.gamma1, atol=1e-12 * max(1, np.abs(bd.stacked()).max()))


def test_recover_potential_l2_is_delta_pair():
    rec = recover_potential(ExtensionSpec.l2(ZERO2))
    assert np.array_equal(rec.coeff_matrix, np.eye(2))
    assert rec.psi[0].delta_coeffs == (1,) and rec.psi[1].delta_coeffs == (0, 1)


def test_recover_potential_3d():
    rec = recover_potential(ExtensionSpec.point3d(1.0))
    assert rec.coeff_matrix[0, 0] == pytest.approx(-4 * np.pi)


def test_recover_potential_sobolev_structure():
    # psi_j are combinations of delta-derivatives of order <= p + 1 and independent
    for p in (2, 4):
        rec = recover_potential(ExtensionSpec.sobolev(np.zeros((p + 2, p + 2)), p))
        assert rec.coeff_matrix.shape == (p + 2, p + 2)
        assert abs(np.linalg.det(rec.coeff_matrix)) > 0.5


def test_round_trip_domains(rng):
    # regularized image is regular exactly on the constraint domain
    for _ in range(20):
        spec = ExtensionSpec.l2(random_hermitian(rng, 2), random_hermitian(rng, 2))
        (f,) = sample_domain(spec, rng, 1)
        g = random_exppoly(rng)
        assert in_domain(f, spec) and regularized_apply(f, spec).is_regular(1e-10 * max(1, f.max_coeff()))
        assert not in_domain(g, spec) and not regularized_apply(g, spec).is_regular(1e-6)
        assert regularized_apply(f, spec).regular.allclose(apply_extension(f, spec), 1e-10)


# -- Cayley ------------------------------------------------------------------------


def test_cayley_examples():
    assert np.allclose(cayley_u_from_b(ZERO2), np.eye(2))
    assert np.allclose(cayley_u_from_b(np.diag([1.0, -1.0])), np.diag([-1j, 1j]))
    with pytest.raises(CayleySingular):
        b_from_u(-np.eye(2))


@given(seeds, st.integers(1, 4))
def test_cayley_round_trip_and_equivalence(seed, n):
    rng = np.random.default_rng(seed)
    B = random_hermitian(rng, n)
    U = cayley_u_from_b(B)
    assert np.allclose(U.conj().T @ U, np.eye(n), atol=1e-12)
    assert np.allclose(b_from_u(U), B, atol=1e-9 * max(1, np.abs(B).max()))
    g0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert u_constraint_residual(U, g0, B @ g0) < 1e-10 * max(1, np.abs(B).max())
    g1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert (b_constraint_residual(B, g0, g1) < 1e-8) == (u_constraint_residual(U, g0, g1) < 1e-8)


# -- admissibility -----------------------------------------------------------------------


def test_admissibility_scalar():
    data = AdmissibilityData([[2.0]], 1)
    assert not admissible([[0.5]], [[0.0]], data)
    assert admissible([[1.0]], [[0.0]], data)
    eta = admissibility_witness([[0.5]], [[0.0]], data)
    assert abs(0.5 * 2 * eta[0] - eta[0]) < 1e-12 and abs(eta[0]) > 0


def test_r_equals_gram_always_admissible(rng):
    for _ in range(50):
        n = int(rng.integers(1, 4))
        G = random_hermitian(rng, n)
        assert admissible(random_hermitian(rng, n, 3.0), G, AdmissibilityData(G, n))


def test_witness_verified(rng):
    for _ in range(20):
        n = int(rng.integers(1, 4))
        G, R = random_hermitian(rng, n), random_hermitian(rng, n)
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        u = (G - R) @ v
        u /= np.linalg.norm(u)
        P = np.eye(n) - np.outer(u, u.conj())
        B = np.linalg.inv(G - R) + P @ random_hermitian(rng, n) @ P
        B = (B + B.conj().T) / 2
        eta = admissibility_witness(B, R, AdmissibilityData(G, n))
        assert eta is not None
        assert np.abs(B @ G @ eta - (np.eye(n) + B @ R) @ eta).max() < 1e-10


def test_admissibility_partial_intersection():
    # N two-dimensional, N cap D(A) spanned by the first coordinate only
    data = AdmissibilityData(np.array([[2.0], [0.5]]), 1, np.array([[1.0], [0.0]]))
    R = np.zeros((2, 2))
    # B P_N A eta = eta: first row b11*2 + b12*0.5 = 1, second row b21*2 + b22*0.5 = 0
    B = np.array([[0.25, 1.0], [1.0, -4.0]])
    assert not admissible(B, R, data)
    assert admissible(np.eye(2), R, data)


def test_admissibility_dimensions():
    with pytest.raises(DimensionMismatch):
        AdmissibilityData([[1.0, 0.0]], 1)
    with pytest.raises(DimensionMismatch):
        AdmissibilityData(np.ones((2, 1)), 1)
    with pytest.raises(ValidationError):
        admissible(np.eye(2), np.eye(2), AdmissibilityData([[1.0]], 1))


# -- rank one ------------------------------------------------------------------------------


def test_rank_one_coupling():
    eta = default_rank_one_eta()
    a = l2_inner(apply_a(eta), eta).real
    assert a == pytest.approx(6 / 5, abs=1e-15)
    assert l2_norm(eta) == pytest.approx(1.0)
    for alpha in (0.5, -2.0, 3.0):
        assert regular_rank_one_b(alpha, a, a) == alpha
    assert regular_rank_one_b(0.0, 0.3, a) == 0.0
    assert regular_rank_one_b(1.0, 0.0, a) == pytest.approx(5 / 11)
    with pytest.raises(DegenerateDenominator):
        regular_rank_one_b(-1.0, 0.0, 1.0)


def test_rank_one_identity(rng):
    for _ in range(20):
        u = random_smooth(rng, 2)
        for alpha in (0.5, -0.5, 2.0, -2.0):
            for r in (0.0, 6 / 5):
                assert verify_regular_identity(u, alpha, r) <= 1e-12


# -- nonlocal ---------------------------------------------------------------------------------


def test_nonlocal_free_action():
    f = fundamental_solution(4)
    assert nonlocal_apply(f, ZERO2, 1).allclose(apply_a(f) - f)


def test_nonlocal_orthogonal_function_ignores_coupling():
    # odd and C^1: f(0) = 0 and (f, q) = 0 for even q
    f = PiecewiseExpPoly.odd([ExpTerm(1.0, 1, 1.0)])
    b = np.array([[1.0, 2 - 1j], [2 + 1j, -3.0]])
    assert nonlocal_apply(f, b, 2).allclose(apply_a(f) - f)


def test_nonlocal_example():
    # [DERIVED] b = [[0,1],[1,0]]; f = m_4 + t m_2 with t fixed by f'_s = (f, q): -t = 3/16 + t/4
    t = -3 / 20
    f = fundamental_solution(4) + t * fundamental_solution(2)
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = nonlocal_apply(f, b, 1)
    f0 = 0.25 + t / 2
    assert out.allclose(apply_a(f) - f + f0 * fundamental_solution(2), 1e-14)
    with pytest.raises(NotInDomain):
        nonlocal_apply(fundamental_solution(4), b, 1)


def test_family_enum_round_trip():
    assert Family("sobolev") is Family.SOBOLEV
