from fractions import Fraction

import pytest

from qserre.coefficients import CoefficientRing
from qserre.complexes import (
    EXACT,
    Element,
    apply_d,
    check_truncated_order,
    unfold_generators,
)
from qserre.errors import FiltrationError, GradingError, UnknownGenerator
from qserre.model import Model

from conftest import bundled_doc


def test_cp1_accepted_with_order_two(cp1):
    C = cp1.complex()
    assert check_truncated_order(C) == 2
    assert C.truncation_order == 2


def test_cp2_verified_exact(cp2):
    assert check_truncated_order(cp2.complex()) == EXACT


def test_zero_differential_exact():
    doc = bundled_doc("cp1")
    doc["differential"] = []
    doc["truncation_order"] = "exact"
    assert Model(doc).complex().truncation_order == EXACT


def test_grading_mismatch():
    doc = bundled_doc("cp1")
    doc["differential"][0]["monomial"] = ["u", "u"]
    with pytest.raises(GradingError):
        Model(doc).complex()


def test_filtration_must_drop():
    doc = bundled_doc("cp1")
    doc["differential"].append({"source": "b", "target": "a", "monomial": [],
                                "exponent": {}, "coefficient": "1"})
    with pytest.raises((FiltrationError, GradingError)):
        Model(doc).complex()


def test_apply_d_examples(cp1):
    C = cp1.complex()
    a = Element.generator(C, "a")
    assert repr(apply_d(C, a)) == "u·b"
    R = CoefficientRing(C.algebra, C.novikov)
    ua = a.times(R.element([(["u"], {}, 1)]))
    assert repr(apply_d(C, ua)) == "u^2·b"
    assert repr(apply_d(C, apply_d(C, a))) == "u^2·a·e^{alpha}"


def test_apply_d_unknown_generator(cp1):
    C = cp1.complex()
    with pytest.raises(UnknownGenerator):
        Element.generator(C, "zz")


def test_d_lowers_filtration_and_degree(cp1):
    C = cp1.complex()
    for name in ("a", "b"):
        v = Element.generator(C, name)
        dv = apply_d(C, v)
        assert dv.filtration <= v.filtration - 1
        assert all(C.degree(k) == C.degree(C.key(name)) - 1 for k in dv.terms)


def test_novikov_equivariance(cp1):
    C = cp1.complex()
    beta = C.novikov.vector("alpha")
    for name in ("a", "b"):
        k = C.key(name)
        shifted = {C.shift_key(t, beta): c for t, c in C.d_key(k).items()}
        assert C.d_key(C.shift_key(k, beta)) == shifted


def test_unfold_generators(cp1):
    C = cp1.complex()
    pairs = [(g.name, C.novikov.format_vector(e.vector) or "0")
             for g, e in unfold_generators(C, (-4, 4), Fraction(4))]
    # a·e^{-alpha} sits at p = 6 and a·e^{2alpha} at p = -6: both outside
    assert pairs == [("a", "0"), ("a", "alpha"), ("b", "-alpha"), ("b", "0"), ("b", "alpha")]
    assert unfold_generators(C, (3, 2), None) == []
    assert [(g.name, e.vector) for g, e in unfold_generators(C, (2, 2), Fraction(0))] == [("a", (0,))]
