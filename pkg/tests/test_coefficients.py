from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qserre.coefficients import (
    AlgebraPresentation,
    CoefficientRing,
    NovikovSystem,
    algebra_basis,
    energy_truncate,
    multiply,
    novikov_grade,
    tensor_multiply,
)
from qserre.errors import ConfluenceFailure, NovikovError, PresentationError
from qserre.fields import FieldChoice

GF2 = FieldChoice.GF2


def free_u():
    return AlgebraPresentation([("u", 1)], [], [], GF2)


def exterior_uv():
    return AlgebraPresentation([("u", 1), ("v", 4)], [(["u", "u"], [])], [("u", "v")], GF2)


def words(A, degree):
    return [A.format_word(w) for w in A.basis(degree)]


def test_basis_free_algebra():
    assert words(free_u(), 3) == ["u^3"]


def test_basis_with_relation():
    assert words(exterior_uv(), 5) == ["u·v"]


def test_basis_degree_zero_is_unit():
    for A in (free_u(), exterior_uv()):
        assert A.basis(0) == ((),)
        assert [e.terms for e in algebra_basis(A, 0)] == [{(): 1}]


def test_multiply_examples():
    A = free_u()
    u = A.monomial("u")
    assert multiply(u, u) == A.monomial("u", "u")
    B = exterior_uv()
    assert multiply(B.monomial("u"), B.monomial("u")).is_zero()
    x = B.monomial("u", "v")
    assert multiply(B.one, x) == x


def test_graded_commutation_reorders():
    B = exterior_uv()
    assert B.monomial("v") * B.monomial("u") == B.monomial("u", "v")


def test_commutation_sign_over_rationals():
    A = AlgebraPresentation([("s", 1), ("t", 1)], [], [("s", "t")], FieldChoice.RATIONALS)
    assert A.monomial("t") * A.monomial("s") == A.element([(["s", "t"], -1)])


def test_non_confluent_presentation_rejected():
    A = AlgebraPresentation([("x", 1), ("y", 1)],
                            [(["y", "x"], [(["x", "x"], 1)]), (["y", "y"], [])], [], GF2)
    with pytest.raises(ConfluenceFailure):
        A.check_confluence(3)


def test_presentation_errors():
    with pytest.raises(PresentationError):
        AlgebraPresentation([("u", 1), ("u", 2)], [], [], GF2)
    with pytest.raises(PresentationError):
        AlgebraPresentation([("u", 0)], [], [], GF2)
    with pytest.raises(PresentationError):
        AlgebraPresentation([("u", 1)], [(["u", "u"], [(["u"], 1)])], [], GF2)


def novikov(c1=2, omega=2, rho=1):
    return NovikovSystem([("alpha", c1, omega)], c_min=c1, alpha_min="alpha", monotone=True, rho=rho)


def test_novikov_grade_examples():
    N = novikov()
    assert novikov_grade(N.exponent("alpha")) == -4
    assert novikov_grade(N.exponent({})) == 0
    D = NovikovSystem([("Delta", 3, 3)], c_min=3, alpha_min="Delta", monotone=True, rho=1)
    assert novikov_grade(D.exponent("Delta")) == -6


def test_novikov_validation():
    with pytest.raises(NovikovError):
        NovikovSystem([("a", 2, 3)], c_min=2, monotone=True, rho=1)
    with pytest.raises(NovikovError):
        NovikovSystem([("a", 2, 2), ("b", 4, 4)], c_min=2, monotone=True, rho=1)
    with pytest.raises(NovikovError):
        NovikovSystem([("a", 2, 2)], c_min=0)


def test_tensor_multiply_examples():
    R = CoefficientRing(free_u(), novikov())
    x = R.element([(["u"], "alpha", 1)])
    assert tensor_multiply(x, x) == R.element([(["u", "u"], {"alpha": 2}, 1)])
    assert R.one * x == x
    D = NovikovSystem([("Delta", 3, 3)], c_min=3, alpha_min="Delta", monotone=True, rho=1)
    S = CoefficientRing(exterior_uv(), D)
    assert (S.element([(["u"], "Delta", 1)]) * S.element([(["u"], {}, 1)])).is_zero()


def test_energy_truncate_examples():
    A = AlgebraPresentation([("a", 2), ("b", 2)], [], [], GF2)
    R = CoefficientRing(A, novikov())
    x = R.element([(["a"], "alpha", 1), (["b"], {"alpha": 2}, 1)])
    assert energy_truncate(x, 3) == R.element([(["a"], "alpha", 1)])
    assert energy_truncate(x, 100) == x
    zero = R.element([])
    assert energy_truncate(zero, 3).is_zero()
    assert energy_truncate(energy_truncate(x, 3), 3) == energy_truncate(x, 3)


def test_exponents_with_c1_rank_one():
    N = novikov()
    assert N.exponents_with_c1(4, None) == [(2,)]
    assert N.exponents_with_c1(3, None) == []


# -- properties -----------------------------------------------------------

ALG = exterior_uv()
RING = CoefficientRing(ALG, novikov())
monomials = st.lists(st.sampled_from(["u", "v"]), max_size=4)
coeff_terms = st.lists(st.tuples(monomials, st.integers(-2, 2)), min_size=1, max_size=3)


def element(terms):
    return RING.element([(w, {"alpha": e}, 1) for w, e in terms])


def homogeneous(names, e):
    return RING.element([(names, {"alpha": e}, 1)])


@settings(max_examples=60, deadline=None)
@given(coeff_terms, coeff_terms, coeff_terms)
def test_associative_and_distributive(a, b, c):
    x, y, z = element(a), element(b), element(c)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert (x + y) * z == x * z + y * z


@settings(max_examples=60, deadline=None)
@given(monomials, st.integers(-2, 2), monomials, st.integers(-2, 2))
def test_degree_additive(w1, e1, w2, e2):
    x, y = homogeneous(w1, e1), homogeneous(w2, e2)
    p = x * y
    if not p.is_zero() and not x.is_zero() and not y.is_zero():
        assert p.degree == x.degree + y.degree


@settings(max_examples=60, deadline=None)
@given(monomials)
def test_normal_form_idempotent(names):
    w = ALG.word(names)
    once = ALG.normal_form(w)
    assert ALG.reduce(dict(once)) == once


@settings(max_examples=40, deadline=None)
@given(st.integers(-5, 5), st.integers(-5, 5))
def test_novikov_grade_homomorphism(a, b):
    N = RING.novikov
    ea, eb = N.exponent((a,)), N.exponent((b,))
    assert novikov_grade(ea + eb) == novikov_grade(ea) + novikov_grade(eb)
    assert novikov_grade(ea) % 2 == 0
