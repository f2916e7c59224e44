import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import parse
from khovanskii_homotopy.poly import (
    HomotopyPolynomial,
    PoleError,
    SparsePolynomial,
    deform,
    evaluate,
    initial_form,
    is_weighted_homogeneous,
    jacobian,
    pullback_power_map,
    specialize_t,
    weight_value,
)

W27 = (-2, -1, -1, -1, 0, 0, 0, 0)
BS_DEFORMED = [
    "x1*x3 - x0*x4",
    "x2*x3 - x0*x5",
    "x1*x2 - x0*x6 + t*x1*x4",
    "x2**2 - x0*x7 + t*x3*x6 - t**2*x4**2",
    "x2*x6 - x1*x7",
    "x2*x5 - x3*x7 + t*x4*x5",
    "x1*x5 - x3*x6 + t*x4**2",
    "x2*x4 - x1*x5",
    "x5*x6 - x4*x7",
    "x0*x6**2 - x1**2*x7 - t*x1*x4*x6",
    "x0*x5**2 - x3**2*x7 + t*x3*x4*x5",
    "x0*x4*x5 - x3**2*x6 + t*x3*x4**2",
    "x3*x6**2 - x1*x4*x7 - t*x4**2*x6",
]


def parse_family(expr, nvars=8):
    import sympy as sp

    gens = sp.symbols(f"x0:{nvars}")
    t = sp.Symbol("t")
    p = sp.Poly(sp.sympify(expr, locals={**{str(g): g for g in gens}, "t": t}), *gens, t)
    return HomotopyPolynomial(nvars, [(m[:-1], m[-1], complex(c)) for m, c in p.terms()])


# strategies ---------------------------------------------------------------

def polys(nvars=3, max_terms=6, max_exp=4, negative=False):
    lo = -max_exp if negative else 0
    exps = st.lists(st.integers(lo, max_exp), min_size=nvars, max_size=nvars).map(tuple)
    coeffs = st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False)
    return st.dictionaries(exps, coeffs, min_size=1, max_size=max_terms).map(lambda d: SparsePolynomial(nvars, d))


weights = st.lists(st.integers(-5, 5), min_size=3, max_size=3)
gradings = st.lists(st.integers(1, 4), min_size=3, max_size=3)


# weight_value / initial_form / deform -------------------------------------

def test_weight_value_of_bott_samelson_generator():
    assert weight_value(parse("x1*x2 - x0*x6 + x1*x4", 8), W27) == -2


def test_weight_value_of_constant_is_zero():
    assert weight_value(SparsePolynomial.constant(3, 5.0), (7, -3, 2)) == 0


def test_weight_of_zero_polynomial_is_undefined():
    with pytest.raises(ValueError, match="weight of zero undefined"):
        weight_value(SparsePolynomial(2), (1, 1))
    with pytest.raises(ValueError):
        deform(SparsePolynomial(2), (1, 1))


@given(polys(), weights)
def test_weight_value_is_minimum_over_terms(f, w):
    assert weight_value(f, w) == min(sum(a * b for a, b in zip(w, e)) for e in f.terms)


def test_initial_forms_of_bott_samelson_generators():
    assert initial_form(parse("x1*x2 - x0*x6 + x1*x4", 8), W27) == parse("x1*x2 - x0*x6", 8)
    assert initial_form(parse("x2**2 - x0*x7 + x3*x6 - x4**2", 8), W27) == parse("x2**2 - x0*x7", 8)


def test_initial_form_of_monomial_is_itself():
    f = SparsePolynomial.monomial((1, 2, 0), 3 - 1j)
    assert initial_form(f, (4, -1, 9)) == f


def test_deform_matches_displayed_family():
    from scripts_data import BOTT_SAMELSON

    for g, expected in zip(BOTT_SAMELSON, BS_DEFORMED):
        assert deform(parse(g, 8), W27) == parse_family(expected)


def test_deform_of_weight_homogeneous_polynomial_is_t_free():
    f = parse("x0*x1 - 2*x2**2 + x1*x2", 3)
    F = deform(f, (1, 1, 1))
    assert F.max_t_power == 0
    assert F.target() == f


@given(polys(), weights)
def test_deform_specializations(f, w):
    F = deform(f, w)
    assert min(tp for _, tp, _ in F.terms) == 0
    assert specialize_t(F, 0) == initial_form(f, w)
    assert specialize_t(F, 1) == f


def test_non_integer_t_power_rejected():
    with pytest.raises(ValueError):
        HomotopyPolynomial(1, [((1,), 0, 1.0), ((0,), 0.5, 1.0)])
    with pytest.raises(ValueError, match="minimum t-power"):
        HomotopyPolynomial(1, [((1,), 1, 1.0)])


# specialize_t -------------------------------------------------------------

def test_specialize_binomial_front():
    F = HomotopyPolynomial(2, [((2, 0), 0, 1), ((0, 2), 0, -3), ((1, 1), 2, -1)])
    assert specialize_t(F, 0) == SparsePolynomial(2, {(2, 0): 1, (0, 2): -3})


@given(polys(), weights, st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_specialize_matches_direct_summation(f, w, t0):
    F = deform(f, w)
    x = np.array([0.7 + 0.2j, -1.1, 0.4j + 0.9])
    direct = sum(c * t0**tp * np.prod(x ** np.array(e)) for e, tp, c in F.terms)
    assert evaluate(specialize_t(F, t0), x) == pytest.approx(direct, rel=1e-10, abs=1e-10)
    assert evaluate(F, x, t0) == pytest.approx(direct, rel=1e-10, abs=1e-10)


# power maps and weighted homogeneity ---------------------------------------

A8 = (1, 1, 1, 1, 1, 1, 2, 3)


def test_pullback_examples():
    f = SparsePolynomial(2, {(1, 1): 1})
    assert pullback_power_map(f, (1, 1)) == f
    g = SparsePolynomial(8, {(1, 0, 0, 0, 0, 0, 0, 0): 1, (0, 0, 0, 0, 0, 0, 2, 0): -1})
    assert pullback_power_map(g, A8) == SparsePolynomial(8, {(1,) + (0,) * 7: 1, (0,) * 6 + (4, 0): -1})


def test_weighted_homogeneity_examples():
    f = SparsePolynomial(8, {(1, 0, 0, 0, 0, 0, 0, 1): 1, (0,) * 6 + (3, 0): -1})
    assert is_weighted_homogeneous(f, A8) == (False, None)
    assert is_weighted_homogeneous(SparsePolynomial.monomial((0, 2, 1)), (1, 2, 3)) == (True, 7)
    assert is_weighted_homogeneous(SparsePolynomial(2), (1, 1)) == (True, 0)


def test_weighted_fixture_generators_are_homogeneous_and_pull_back(quartic_points):
    a = quartic_points.grading
    assert tuple(a) == A8
    assert len(quartic_points.groebner) == 17
    for g in quartic_points.groebner:
        ok, deg = is_weighted_homogeneous(g, a)
        assert ok
        pulled = pullback_power_map(g, a)
        assert all(sum(e) == deg for e in pulled.terms)


@given(polys())
def test_pullback_by_ones_is_identity(f):
    assert pullback_power_map(f, (1, 1, 1)) == f


@given(st.lists(st.lists(st.integers(0, 3), min_size=3, max_size=3), min_size=1, max_size=4), gradings)
def test_pullback_degree_transfer(exps, a):
    # build an a-homogeneous polynomial by padding with a fresh variable of weight 1
    degs = [sum(x * y for x, y in zip(e, a)) for e in exps]
    top = max(degs)
    a4 = list(a) + [1]
    f = SparsePolynomial(4, {tuple(e) + (top - d,): 1.0 + k for k, (e, d) in enumerate(zip(exps, degs))})
    ok, deg = is_weighted_homogeneous(f, a4)
    assert ok
    assert is_weighted_homogeneous(pullback_power_map(f, a4), (1, 1, 1, 1)) == (True, deg)


# evaluation ---------------------------------------------------------------

def test_evaluate_and_jacobian_examples():
    x, y = SparsePolynomial.monomial((1, 0)), SparsePolynomial.monomial((0, 1))
    assert evaluate(x + y, (1, 2)) == 3
    J = jacobian([SparsePolynomial.monomial((2, 0)), SparsePolynomial.monomial((1, 1))], (1, 1))
    np.testing.assert_array_equal(J, [[2, 0], [1, 1]])


def test_pole_error():
    f = SparsePolynomial.monomial((-1, 2))
    with pytest.raises(PoleError, match="pole"):
        evaluate(f, (0, 1))


def test_canonical_term_order():
    f = SparsePolynomial(2, [((0, 1), 1), ((2, 0), 2)])
    g = SparsePolynomial(2, [((2, 0), 2), ((0, 1), 1)])
    assert f == g and hash(f) == hash(g)
    assert SparsePolynomial(1, [((1,), 1), ((1,), -1)]).is_zero()


@settings(max_examples=60)
@given(st.lists(polys(negative=True), min_size=2, max_size=3), st.integers(0, 2**32 - 1))
def test_jacobian_matches_finite_differences(system, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.5, 2, 3) * np.exp(2j * np.pi * rng.random(3))
    J = jacobian(system, x)
    h = 1e-6
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd = np.array([(evaluate(f, x + e) - evaluate(f, x - e)) / (2 * h) for f in system])
        scale = max(np.abs(fd).max(), np.abs(J[:, k]).max(), 1.0)
        assert np.abs(fd - J[:, k]).max() <= 1e-5 * scale
