import numpy as np
import pytest
from hypothesis import given, strategies as st

from bellpara.core_bellman import Coefficients, Exponents, coefficients_default, eval_B
from bellpara.dyadic_model import (
    ROOT, DyadicConfig, DyadicStep, SignPattern, TreeNode, abstract_bellman_lower, average,
    bellman_induction_check, bracket_bellman, haar_diff, lambda_form, maximal_fn, phi_form,
    pi_apply, random_step, run_battery, square_fn, verify_normalized_estimate,
)
from bellpara.errors import InfeasibleMoments

import oracles

E = Exponents(2.0, 6.0, 3.0)
C = coefficients_default(E)


@st.composite
def steps(draw, depth=None, signed=False):
    n = depth if depth is not None else draw(st.integers(1, 6))
    lo = -50.0 if signed else 0.0
    vals = draw(st.lists(st.floats(lo, 50.0), min_size=2**n, max_size=2**n))
    return DyadicStep(np.array(vals), signed=signed)


@st.composite
def step_triples(draw):
    n = draw(st.integers(1, 6))
    return tuple(draw(steps(n)) for _ in range(3))


def brute_lambda(eps, f, g, h):
    n = len(f)
    total = 0.0
    for k, lv in enumerate(eps.levels):
        length = n >> k
        if length < 2:
            break
        half = length // 2
        for i, w in enumerate(lv):
            s = i * length
            fj = np.mean(f[s:s + length])
            dg = (np.mean(g[s:s + half]) - np.mean(g[s + half:s + length])) / 2
            dh = (np.mean(h[s:s + half]) - np.mean(h[s + half:s + length])) / 2
            total += length / n * w * fj * dg * dh
    return total


def haar_function(n, k, i):
    """Cell values of the L-infinity normalized Haar function of node (k, i)."""
    out = np.zeros(2**n)
    length = 2 ** (n - k)
    out[i * length:i * length + length // 2] = 1
    out[i * length + length // 2:(i + 1) * length] = -1
    return out


# step functions and nodes ----------------------------------------------------

def test_step_validation():
    with pytest.raises(ValueError):
        DyadicStep(np.ones(3))
    with pytest.raises(ValueError):
        DyadicStep(np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        DyadicStep(np.array([1.0, np.nan]))
    assert DyadicStep(np.array([1.0, -1.0]), signed=True).depth == 1


def test_node_validation():
    with pytest.raises(IndexError):
        TreeNode(2, 4)
    with pytest.raises(IndexError):
        TreeNode(-1, 0)
    assert ROOT.left == TreeNode(1, 0) and ROOT.right == TreeNode(1, 1)


def test_sign_pattern_bound():
    with pytest.raises(ValueError):
        SignPattern((np.array([1.5]),))


@given(steps(signed=True))
def test_text_and_json_round_trip(f):
    assert np.array_equal(DyadicStep.from_json(f.to_json()).values, f.values)
    assert np.array_equal(DyadicStep.from_text(f.to_text()).values, f.values)


def test_average_and_diff_example():
    f = DyadicStep(np.array([2.0, 0.0]))
    assert average(f, ROOT) == 1
    assert haar_diff(f, ROOT) == 1
    assert average(f, TreeNode(3, 7)) == 0.0
    assert haar_diff(f, TreeNode(1, 0)) == 0.0


@given(steps())
def test_refinement_identity(f):
    for k in range(f.depth):
        for i in range(2**k):
            J = TreeNode(k, i)
            assert average(f, J) == pytest.approx(0.5 * average(f, J.left) + 0.5 * average(f, J.right),
                                                  rel=1e-14, abs=1e-14)
            vals = f.values[i * 2 ** (f.depth - k):(i + 1) * 2 ** (f.depth - k)]
            assert average(f, J) == pytest.approx(vals.mean(), rel=1e-13, abs=1e-13)


def test_constant_has_no_differences():
    f = DyadicStep(np.full(16, 3.25))
    assert all(haar_diff(f, TreeNode(k, i)) == 0 for k in range(4) for i in range(2**k))


# forms ------------------------------------------------------------------------

def test_phi_example():
    one = DyadicStep(np.ones(2))
    g = DyadicStep(np.array([2.0, 0.0]))
    assert phi_form(one, g, g) == 1
    assert phi_form(one, DyadicStep(np.full(2, 5.0)), g) == 0


@given(step_triples())
def test_phi_matches_brute_force(t):
    f, g, h = t
    want = oracles.brute_phi(list(f.values), list(g.values), list(h.values))
    assert phi_form(f, g, h) == pytest.approx(want, rel=1e-12, abs=1e-12)


@given(step_triples(), st.data())
def test_scaling_identity(t, data):
    f, g, h = t
    k = data.draw(st.integers(0, f.depth - 1))
    J = TreeNode(k, data.draw(st.integers(0, 2**k - 1)))
    split = (0.5 * phi_form(f, g, h, J.left) + 0.5 * phi_form(f, g, h, J.right)
             + average(f, J) * abs(haar_diff(g, J)) * abs(haar_diff(h, J)))
    assert phi_form(f, g, h, J) == pytest.approx(split, rel=1e-12, abs=1e-12)


@given(step_triples(), st.integers(0, 2**32 - 1))
def test_lambda_matches_brute_force_and_duality(t, seed):
    f, g, h = t
    eps = SignPattern.random(f.depth, np.random.default_rng(seed))
    lam = lambda_form(eps, f, g, h)
    assert lam == pytest.approx(brute_lambda(eps, f.values, g.values, h.values), rel=1e-10, abs=1e-10)
    dual = np.mean(pi_apply(eps, f, g).values * h.values)
    assert lam == pytest.approx(dual, rel=1e-12, abs=1e-12 * (1 + phi_form(f, g, h)))
    assert abs(lam) <= phi_form(f, g, h) * (1 + 1e-12) + 1e-12


def test_pi_apply_against_haar_synthesis():
    rng = np.random.default_rng(2)
    f, g = random_step(rng, 4), random_step(rng, 4)
    eps = SignPattern.random(4, rng)
    want = np.zeros(16)
    for k in range(4):
        for i in range(2**k):
            J = TreeNode(k, i)
            want += eps.levels[k][i] * average(f, J) * haar_diff(g, J) * haar_function(4, k, i)
    np.testing.assert_allclose(pi_apply(eps, f, g).values, want, rtol=1e-12, atol=1e-12)


def test_constant_g_gives_zero():
    rng = np.random.default_rng(0)
    f, h = random_step(rng, 3), random_step(rng, 3)
    g = DyadicStep(np.full(8, 2.0))
    assert lambda_form(SignPattern.ones(3), f, g, h) == 0


@given(step_triples())
def test_square_function_identity(t):
    f, g, _ = t
    lam = lambda_form(SignPattern.ones(f.depth), f, g, g)
    assert lam == pytest.approx(np.mean(f.values * square_fn(g).values ** 2), rel=1e-12, abs=1e-12)


def test_square_and_maximal_examples():
    assert np.array_equal(square_fn(DyadicStep(np.array([2.0, 0.0]))).values, [1.0, 1.0])
    c = DyadicStep(np.full(8, 1.5))
    assert np.array_equal(maximal_fn(c).values, c.values)
    assert not square_fn(c).values.any()


@given(steps())
def test_maximal_dominates(f):
    m = maximal_fn(f).values
    assert np.all(m >= f.values)
    assert np.all(m >= f.values.mean() * (1 - 1e-14))


# estimates -------------------------------------------------------------------

def test_normalized_estimate_example():
    one = DyadicStep(np.ones(2))
    g = DyadicStep(np.array([2.0, 0.0]))
    rep = verify_normalized_estimate(C, E, one, g, g)
    assert rep.phi == 1
    assert rep.bound == pytest.approx(114048 * (1 / 2 + 32 / 6 + 4 / 3), rel=1e-14)
    assert rep.margin > 0


def test_normalized_estimate_constants():
    k = DyadicStep(np.full(4, 2.0))
    rep = verify_normalized_estimate(C, E, k, k, k)
    assert rep.phi == 0 and rep.margin > 0


@given(step_triples())
def test_normalized_estimate_holds(t):
    rep = verify_normalized_estimate(C, E, *t)
    assert rep.margin >= -1e-9 * (1 + rep.bound)
    assert rep.ratio <= rep.constant


def test_induction_trivial_cases():
    rng = np.random.default_rng(1)
    f, g, h = (random_step(rng, 4) for _ in range(3))
    rep = bellman_induction_check(C, E, f, g, h, n=0)
    assert rep.defects.tolist() == [0.0]
    k = DyadicStep(np.full(8, 1.7))
    rep = bellman_induction_check(C, E, k, k, k)
    assert np.all(np.abs(rep.defects) <= 1e-12 * rep.scales)
    with pytest.raises(ValueError):
        bellman_induction_check(C, E, f, g, h, n=5)


@given(step_triples())
def test_induction_defects_nonnegative(t):
    rep = bellman_induction_check(C, E, *t)
    assert rep.ok(1e-9)


def test_induction_fails_for_unit_coefficients():
    rng = np.random.default_rng(0)
    bad = 0
    for _ in range(100):
        f, g, h = (random_step(rng, 2, 0.5, 2.0) for _ in range(3))
        bad += not bellman_induction_check(Coefficients(1, 1, 1), E, f, g, h).ok()
    assert bad > 0


# abstract Bellman lower bounds ------------------------------------------------

def test_lower_bound_zero_when_g_forced_constant():
    x = (1.0, 1.2, 0.8, 2.0, 1.2**6, 0.8**3 * 3)
    assert abstract_bellman_lower(C, E, x, depth=4, iters=30) == 0


def test_lower_bound_matches_its_witness():
    x = np.array([1.0, 1.0, 1.0, 2.0, 3.0, 2.5])
    val, (f, g, h) = abstract_bellman_lower(C, E, x, depth=4, iters=30, return_steps=True)
    assert val == phi_form(f, g, h)
    got = [f.integral(), g.integral(), h.integral(), np.mean(f.values**2), np.mean(g.values**6),
           np.mean(h.values**3)]
    np.testing.assert_allclose(got, x, rtol=1e-10)
    assert val <= eval_B(C, E, x)


def test_lower_bound_monotone_in_depth():
    x = np.array([0.7, 1.3, 0.9, 0.9, 9.0, 2.0])
    vals = [abstract_bellman_lower(C, E, x, depth=d, iters=15, seed=3) for d in range(1, 6)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0


def test_lower_bound_rejects_outside_domain():
    with pytest.raises(InfeasibleMoments):
        abstract_bellman_lower(C, E, (2.0, 1, 1, 1.0, 1, 1))


def test_battery_small_passes():
    res = run_battery(C, E, DyadicConfig(trials=150, max_depth=7, bellman_points=5, bellman_depth=4,
                                         bellman_iters=10))
    assert all(r.passed for r in res), res
    names = [r.name for r in res]
    assert names == ["scaling", "duality", "square_fn", "estimate", "homogeneous", "induction",
                     "bellman_bracket"]


def test_bracket_deterministic():
    cfg = DyadicConfig(bellman_points=4, bellman_depth=3, bellman_iters=8, seed=5)
    a, b = bracket_bellman(C, E, cfg), bracket_bellman(C, E, cfg)
    assert a.worst_margin == b.worst_margin
    assert np.array_equal(a.violations, b.violations)
