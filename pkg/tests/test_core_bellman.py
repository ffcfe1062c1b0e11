from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bellpara.core_bellman import (
    BellmanPoint, Coefficients, Exponents, GammaPoint, Region, REGIONS, TriplePoint,
    c_constant, check_domain, classify_gamma, classify_region, coefficients_default,
    default_coefficient_fractions, eval_A, eval_A_branch, eval_B, eval_gamma, exponents_new,
    grad_A, grad_B, hess_A, hess_B,
)
from bellpara.errors import BoundaryError, ConstraintViolation, DomainError
from bellpara.sampling import loguniform, triples

import oracles
from conftest import TRIPLES

pos = st.floats(1e-2, 1e2)


# exponents and coefficients ----------------------------------------------

@pytest.mark.parametrize("pqr", [(3, 3, 3), (2, 4, 4), (2, 3, 6), (2, 6, 2.9), (0.5, 6, 3)])
def test_bad_exponents_rejected(pqr):
    with pytest.raises(ConstraintViolation):
        exponents_new(*pqr)


def test_default_coefficients_exact_integers(e263):
    A, B, C = default_coefficient_fractions(e263)
    assert (A, B, C) == (Fraction(57024), Fraction(1), Fraction(1188))
    assert max(A * 2, B * 6, C * 3) == 114048


@pytest.mark.parametrize("pqr", TRIPLES)
def test_default_coefficients_match_fraction_oracle(pqr):
    e = Exponents(*pqr)
    c = coefficients_default(e)
    A, B, C = oracles.default_fractions(*pqr)
    assert c.A == pytest.approx(float(A), rel=1e-14)
    assert c.B == 1.0
    assert c.C == pytest.approx(float(C), rel=1e-14)
    p, q, r = (Fraction(v) for v in pqr)
    closed = 88 * p * q**4 * r / ((p - 1) * (r - 1) * (q - r))
    assert c_constant(c, e) == pytest.approx(float(closed), rel=1e-14)


def test_unit_coefficient_constant(e263):
    assert c_constant(Coefficients(1, 1, 1), e263) == 6


def test_nonpositive_coefficients_rejected():
    with pytest.raises(ConstraintViolation):
        Coefficients(1.0, 0.0, 1.0)


# classification -----------------------------------------------------------

@pytest.mark.parametrize("x, region", [
    ((2, 1.1, 1.2), Region.R3),
    ((1, 1.2, 1.5), Region.R6),
    ((1, 1, 1), Region.BOUNDARY),
    ((1, 1.3, 1.1), Region.R1),
])
def test_classify_examples(e263, x, region):
    assert classify_region(x, e263) is region


def test_classify_rejects_zero(e263):
    with pytest.raises(DomainError):
        classify_region((0, 1, 1), e263)


def test_classify_gamma_region1():
    assert classify_gamma((2, 1.5)) is Region.R1


# values --------------------------------------------------------------------

def test_value_at_triple_point_every_branch(c263, e263):
    assert eval_A(c263, e263, (1, 1, 1)) == 58213
    for reg in REGIONS:
        assert eval_A_branch(c263, e263, reg, (1, 1, 1)) == pytest.approx(58213, rel=1e-14)


def test_value_on_coordinate_plane(c263, e263):
    assert eval_A(c263, e263, (0, 1, 1)) == pytest.approx(1189, rel=1e-14)
    assert eval_A(c263, e263, (0, 0, 0)) == 0


def test_region1_example(c263, e263):
    expect = 57024 + 1.3**6 + 1188 * 1.331
    assert eval_A(c263, e263, TriplePoint(1, 1.3, 1.1)) == pytest.approx(expect, rel=1e-14)


def test_gamma_example(c263, e263):
    assert eval_gamma(c263, e263, GammaPoint(2, 1.5)) == 58808


def test_bellman_at_unit_point(c263, e263):
    assert eval_B(c263, e263, (1,) * 6) == 55835


@pytest.mark.parametrize("pqr", TRIPLES)
def test_matches_independent_transcription(pqr):
    e = Exponents(*pqr)
    c = coefficients_default(e)
    rng = np.random.default_rng(11)
    x = triples(e, 2000, rng)
    got = eval_A(c, e, x)
    want = np.array([oracles.explicit_A(c.A, c.B, c.C, *pqr, *row) for row in x])
    np.testing.assert_allclose(got, want, rtol=1e-10)


def test_gamma_consistency_many_points(exps):
    c = coefficients_default(exps)
    rng = np.random.default_rng(3)
    x = triples(exps, 10_000, rng)
    x = x[np.all(x > 0, axis=1)]
    pw = x ** exps.powers
    g = np.column_stack([pw[:, 1] / pw[:, 0], pw[:, 2] / pw[:, 0]])
    via_gamma = pw[:, 0] * eval_gamma(c, exps, g)
    np.testing.assert_allclose(eval_A(c, exps, x), via_gamma, rtol=1e-10)


@given(u=pos, v=pos, w=pos, lam=st.floats(0.1, 10))
def test_homogeneity(u, v, w, lam):
    e = Exponents(2.0, 6.0, 3.0)
    c = coefficients_default(e)
    scaled = (lam ** 0.5 * u, lam ** (1 / 6) * v, lam ** (1 / 3) * w)
    assert eval_A(c, e, scaled) == pytest.approx(lam * eval_A(c, e, (u, v, w)), rel=1e-10)


@given(u=pos, v=pos, w=pos)
def test_value_between_zero_and_power_sum(u, v, w):
    e = Exponents(3.0, 6.0, 2.0)
    c = coefficients_default(e)
    a = eval_A(c, e, (u, v, w))
    top = c.A * u**3 + c.B * v**6 + c.C * w**2
    assert -1e-12 * top <= a <= top * (1 + 1e-12)


def test_vectorized_matches_scalar(c263, e263):
    x = triples(e263, 50, np.random.default_rng(5))
    vec = eval_A(c263, e263, x)
    assert [eval_A(c263, e263, row) for row in x] == pytest.approx(list(vec), rel=1e-15)


# derivatives ----------------------------------------------------------------

def test_region6_u_derivative(c263, e263):
    x = (0.8, 1.1, 1.5)
    assert classify_region(x, e263) is Region.R6
    assert grad_A(c263, e263, x)[0] == pytest.approx(c263.A * 2 * 0.8, rel=1e-14)


def test_w_derivative_vanishes_at_plane(c263, e263):
    vals = []
    for w in (1e-2, 1e-4, 1e-6):
        v = 0.5 * (w**3) ** (1 / 6)
        assert v**6 <= w**3 <= 1
        vals.append(abs(grad_A(c263, e263, (1.0, v, w))[2]))
    assert vals[0] > vals[1] > vals[2]
    # the derivative behaves like a positive power of w
    assert vals[2] < 2e-2 * vals[0]


@given(st.integers(0, 2**32 - 1))
def test_gradient_against_finite_differences(seed):
    e = Exponents(2.0, 6.0, 3.0)
    c = coefficients_default(e)
    rng = np.random.default_rng(seed)
    x = loguniform(rng, 3, 0.1, 10)
    if classify_region(x, e, 1e-3) is Region.BOUNDARY:
        return
    fd = oracles.fd_grad(lambda y: oracles.explicit_A(c.A, c.B, c.C, 2.0, 6.0, 3.0, *y), list(x))
    scale = c.A * x[0] ** 2 + x[1] ** 6 + c.C * x[2] ** 3
    err = np.abs(np.asarray(grad_A(c, e, x)) - fd) * x / scale
    assert np.all(err < 1e-5)


@given(st.integers(0, 2**32 - 1))
def test_hessian_against_finite_differences(seed):
    e = Exponents(2.0, 6.0, 3.0)
    c = coefficients_default(e)
    rng = np.random.default_rng(seed)
    x = loguniform(rng, 3, 0.2, 5)
    if classify_region(x, e, 5e-3) is Region.BOUNDARY:
        return
    fd = np.array(oracles.fd_hess(lambda y: oracles.explicit_A(c.A, c.B, c.C, 2.0, 6.0, 3.0, *y),
                                  list(x)))
    scale = (c.A * x[0] ** 2 + x[1] ** 6 + c.C * x[2] ** 3) / np.outer(x, x)
    err = np.abs(hess_A(c, e, x) - fd) / scale
    assert np.all(err < 1e-4)


def test_region1_hessian_diagonal(c263, e263):
    h = hess_A(c263, e263, (1, 1.3, 1.1))
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    assert h[0, 0] == pytest.approx(2 * c263.A)


def test_hessian_refused_on_surface(c263, e263):
    with pytest.raises(BoundaryError):
        hess_A(c263, e263, (1, 1, 1.5))


# Bellman function -----------------------------------------------------------

def test_bellman_domain_enforced(c263, e263):
    with pytest.raises(DomainError):
        eval_B(c263, e263, (2, 1, 1, 3, 1, 1))
    with pytest.raises(DomainError):
        BellmanPoint.new(e263, 1, 1, 1, 0.5, 1, 1)
    check_domain(e263, (2, 1, 1, 4, 1, 1))


@given(u=pos, v=pos, w=pos, du=st.floats(0, 5), dv=st.floats(0, 5), dw=st.floats(0, 5))
def test_bellman_range(u, v, w, du, dv, dw):
    e = Exponents(2.0, 6.0, 3.0)
    c = coefficients_default(e)
    x = (u, v, w, u**2 * (1 + du), v**6 * (1 + dv), w**3 * (1 + dw))
    b = eval_B(c, e, x)
    top = c_constant(c, e) * (x[3] / 2 + x[4] / 6 + x[5] / 3)
    assert -1e-12 * top <= b <= top * (1 + 1e-12)


def test_bellman_gradient_linear_part(c263, e263):
    g = grad_B(c263, e263, (1, 1.3, 1.1, 2, 6, 2))
    assert g[3] == 114048 / 2
    assert g[4] == 114048 / 6
    np.testing.assert_allclose(g[:3], -np.asarray(grad_A(c263, e263, (1, 1.3, 1.1))))


def test_bellman_hessian_block(c263, e263):
    h = hess_B(c263, e263, (1, 1.3, 1.1, 2, 6, 2))
    assert np.all(h[3:, :] == 0) and np.all(h[:, 3:] == 0)
    np.testing.assert_array_equal(h[:3, :3], -hess_A(c263, e263, (1, 1.3, 1.1)))
