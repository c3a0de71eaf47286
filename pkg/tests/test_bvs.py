import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zrp.ascale import defect_basis, fundamental_solution
from zrp.bvs import (
    R_CANONICAL,
    BoundaryData,
    RadialFunction3D,
    boundary_data_3d,
    boundary_data_l2,
    boundary_data_radial,
    boundary_pairing,
    green_residual_l2,
    green_residual_powers,
    green_residual_sobolev,
    green_sums_powers,
    quasi_boundary_data_sobolev,
    sobolev_quasi_adjoint,
    stacked_boundary_data,
)
from zrp.errors import NotInSobolevSpace, ValidationError
from zrp.exppoly import ExpTerm, PiecewiseExpPoly, apply_a, l2_inner, quasi_derivative
from zrp.sampling import random_exppoly, random_hermitian, random_smooth

seeds = st.integers(0, 2**32 - 1)


def sobolev_element(rng, p):
    f = random_smooth(rng, p + 1)
    for b in defect_basis(p):
        f = f + complex(rng.normal(), rng.normal()) * b
    return f


def test_canonical_data_of_model_functions():
    e = PiecewiseExpPoly.term(1.0, 0, 1.0)
    bd = boundary_data_l2(e)
    # f_r = 1, f'_r = 0, f'_s = -2, f_s = 0
    assert np.allclose(bd.gamma0, [1, 0]) and np.allclose(bd.gamma1, [-2, 0])
    bd = boundary_data_l2(fundamental_solution(1))
    # m_1 = -sign(x) e^{-|x|}/2: jump -1, one-sided slopes +1/2
    assert np.allclose(bd.gamma1, [0, -1]) and np.allclose(bd.gamma0, [0, -0.5])


def test_regularization_shift():
    f = PiecewiseExpPoly.odd([ExpTerm(1.0, 1, 0.5)]) + PiecewiseExpPoly.term(0.3, 0, 2.0, side="+")
    R = np.array([[1.0, 0.2j], [-0.2j, -2.0]])
    a, b = boundary_data_l2(f), boundary_data_l2(f, R)
    assert np.allclose(b.gamma1, a.gamma1)
    assert np.allclose(b.gamma0, a.gamma0 + (R_CANONICAL - R) @ a.gamma1)
    with pytest.raises(ValidationError):
        boundary_data_l2(f, np.array([[0, 1], [0, 0]]))


@given(seeds)
def test_green_l2(seed):
    rng = np.random.default_rng(seed)
    R = random_hermitian(rng, 2)
    assert green_residual_l2(random_exppoly(rng), random_exppoly(rng), R, relative=True) < 1e-12


@given(seeds, st.sampled_from([1, 2, 3]))
def test_green_powers(seed, p):
    rng = np.random.default_rng(seed)
    assert green_residual_powers(random_exppoly(rng), random_exppoly(rng), p, relative=True) < 1e-12


@given(seeds, st.sampled_from([1, 2]))
def test_coordinate_sums_carry_opposite_sign(seed, p):
    rng = np.random.default_rng(seed)
    f, g = random_exppoly(rng), random_exppoly(rng)
    lhs = l2_inner(f, quasi_derivative(g, 2 * p + 2)) - l2_inner(quasi_derivative(f, 2 * p + 2), g)
    assert green_sums_powers(f, g, p) == pytest.approx(lhs, rel=1e-10, abs=1e-10)


@given(seeds, st.sampled_from([2, 4]))
def test_green_sobolev(seed, p):
    rng = np.random.default_rng(seed)
    f, g = sobolev_element(rng, p), sobolev_element(rng, p)
    assert green_residual_sobolev(f, g, p, relative=True) < 1e-11


def test_stacked_examples():
    bd = stacked_boundary_data(fundamental_solution(4), 1)
    assert np.allclose(bd.gamma0, [0.25, 0, 0.5, 0]) and np.allclose(bd.gamma1, [-1, 0, 0, 0])
    assert np.allclose(stacked_boundary_data(fundamental_solution(2), 1).gamma1, [0, 0, -1, 0])
    with pytest.raises(ValidationError):
        stacked_boundary_data(fundamental_solution(2), 0)


def test_sobolev_quasi_triple_example():
    bd = quasi_boundary_data_sobolev(fundamental_solution(6), 2)
    assert np.allclose(bd.gamma0, [0.1875, 0, 0.25, 0]) and np.allclose(bd.gamma1, [-1, 0, 0, 0])
    with pytest.raises(NotInSobolevSpace):
        quasi_boundary_data_sobolev(fundamental_solution(2), 2)
    with pytest.raises(ValidationError):
        quasi_boundary_data_sobolev(fundamental_solution(6), 3)


def test_quasi_adjoint_on_smooth_part():
    # for u in W^{2p+2}, A^{-p} u^[2p+2] = A u
    rng = np.random.default_rng(5)
    u = random_smooth(rng, 3)
    assert sobolev_quasi_adjoint(u, 2).allclose(apply_a(u), 1e-9)
    # on the defect basis the pointwise image vanishes
    assert sobolev_quasi_adjoint(fundamental_solution(6), 2).max_coeff() < 1e-14


def test_boundary_data_type():
    with pytest.raises(ValidationError):
        BoundaryData([1, 2], [1])
    a = BoundaryData([1, 0], [0, 1])
    assert boundary_pairing(a, a) == 0


def radial(rng):
    h = PiecewiseExpPoly((ExpTerm(rng.normal() + 1j * rng.normal(), int(rng.integers(0, 3)), 0.5 + rng.random()),
                          ExpTerm(rng.normal(), 1, 1.3)), ())
    return RadialFunction3D(h)


@given(seeds)
def test_green_3d(seed):
    # (A*f, g) - (f, A*g) = -4 pi [(G1 f, G0 g) - (G0 f, G1 g)]
    rng = np.random.default_rng(seed)
    mu = 0.5 + rng.random()
    f, g = radial(rng), radial(rng)
    lhs = f.apply(mu).inner(g) - f.inner(g.apply(mu))
    bf, bg = boundary_data_radial(f, mu), boundary_data_radial(g, mu)
    rhs = -4 * np.pi * boundary_pairing(bf, bg)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_yukawa_data():
    bd = boundary_data_3d(1.0, 0.5, 1.0)
    assert bd.gamma0[0] == 0.5 and bd.gamma1[0] == 1.0
    assert np.allclose(boundary_data_radial(RadialFunction3D.yukawa(1.0, 0.5), 1.0).stacked(), bd.stacked())
    # norm: 4 pi int e^{-2 kappa r} dr = 2 pi / kappa
    assert RadialFunction3D.yukawa(1.0, 0.5).norm() ** 2 == pytest.approx(4 * np.pi)
    with pytest.raises(ValidationError):
        boundary_data_3d(1.0, 0.0, 1.0)
