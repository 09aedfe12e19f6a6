import copy
from fractions import Fraction

import pytest

from qserre.criteria import (
    SATISFIED,
    OrbitCriterionInput,
    dsq_classes,
    monodromy_check,
    orbit_criterion_dsq,
    orbit_criterion_perfect,
)
from qserre.engine import Window
from qserre.errors import InternalInconsistency, MissingGeometry, SpacingViolation
from qserre.model import Model, load_bundled
from qserre.random_models import random_exact_model

from conftest import bundled_doc

W1 = Window(-4, 4, 0, 3)
W2 = Window(-6, 6, 0, 4)


def perfect_input(doc=None, x=("b",), z=("a",), lam="alpha", r=2, geometry="keep", homology="keep"):
    m = Model(doc or bundled_doc("cp1"))
    return OrbitCriterionInput(
        m.complex(), list(x), list(z), lam, r,
        m.doc.get("geometry") if geometry == "keep" else geometry,
        m.homology_of_M() if homology == "keep" else homology,
    )


# -- (d^k)^2 -------------------------------------------------------------------

def test_cp1_dsq_class_of_a(cp1):
    classes = {c.source: c for c in dsq_classes(cp1.complex(), W1)}
    a = classes[(2, 0)]
    assert a.source_label == "a" and a.label == "u^2·a·e^{alpha}"
    assert list(a.by_generator) == ["a"]


def test_cp2_dsq_empty(cp2):
    assert dsq_classes(cp2.complex(), W2) == []


def test_zero_differential_dsq_empty():
    doc = bundled_doc("cp1")
    doc["differential"] = []
    doc["truncation_order"] = 2
    assert dsq_classes(Model(doc).complex(), W1) == []


def test_cp1_monodromy_witness(cp1):
    rep = monodromy_check(cp1.complex(), W1)
    assert rep.flag and rep.k == 2
    bare = {(w.source, w.target) for w in rep.witnesses if w.source == w.generator}
    assert ("a", "a·e^{alpha}") in bare
    assert rep.discarded == []


def test_cp2_monodromy_false(cp2):
    assert not monodromy_check(cp2.complex(), W2).flag


def test_flag_matches_dsq_nonempty(cp1, cp2):
    for C, w in ((cp1.complex(), W1), (cp2.complex(), W2)):
        assert monodromy_check(C, w).flag == bool(dsq_classes(C, w, k=C.novikov.c_min))
    for seed in range(5):
        C = Model(random_exact_model(seed)).complex()
        ps = [g.p for g in C.generators]
        w = Window(min(ps), max(ps), 0, 2)
        assert not monodromy_check(C, w).flag


def test_nonconforming_square_is_reported():
    doc = bundled_doc("cp1")
    doc["generators"] = [{"name": "a", "p": 4}, {"name": "b", "p": 2}, {"name": "c", "p": 0}]
    doc["differential"] = [
        {"source": "a", "target": "b", "monomial": ["u"], "exponent": {}, "coefficient": "1"},
        {"source": "b", "target": "c", "monomial": ["u"], "exponent": {}, "coefficient": "1"},
    ]
    for key in ("morse", "serre_d2", "gw", "geometry", "homology_of_M"):
        doc.pop(key)
    with pytest.raises(InternalInconsistency):
        monodromy_check(Model(doc).complex(), Window(0, 4, 0, 2))


# -- criterion with a d^r relation ----------------------------------------------

def test_perfect_cp1_satisfied():
    v = orbit_criterion_perfect(perfect_input())
    assert v.outcome == SATISFIED
    checks = [t.check for t in v.trace]
    assert checks == ["ordering", "self_indexing", "relatedness", "gap", "index_identity", "action_chain"]
    rel = v.trace[2].details
    assert rel["gamma"] == "u" and rel["class"] == "u·a·e^{alpha}"
    assert v.trace[3].details["window"] == [-1, -1]
    assert v.trace[4].details == {"|x|-r": -2, "|z|-2c1(λ)": -2}
    assert v.trace[5].details["A"] == "4"
    assert "every self-indexed perfect Morse function" in v.scope


@pytest.mark.parametrize("mutation,which", [
    (dict(x=("a",), z=("b",)), "ordering"),
    (dict(lam={"alpha": 2}), "relatedness"),
    (dict(r=1), "relatedness"),
    (dict(homology={0: 1, 2: 1, 3: 1}), "gap"),
])
def test_perfect_single_mutations(mutation, which):
    v = orbit_criterion_perfect(perfect_input(**mutation))
    assert v.outcome == f"HypothesisFails({which})"
    assert not v.satisfied


def test_perfect_self_indexing_mutation():
    doc = bundled_doc("cp1")
    doc["geometry"]["critical_values"] = {"a": "0", "b": "4"}
    v = orbit_criterion_perfect(perfect_input(doc))
    assert v.outcome == "HypothesisFails(self_indexing)"


def test_perfect_killed_x():
    doc = bundled_doc("killed_x")
    v = orbit_criterion_perfect(perfect_input(doc))
    assert v.outcome == "HypothesisFails(relatedness)"
    assert "does not survive" in v.trace[-1].details["reason"]


def test_perfect_missing_geometry():
    with pytest.raises(MissingGeometry):
        orbit_criterion_perfect(perfect_input(geometry=None))
    with pytest.raises(MissingGeometry):
        orbit_criterion_perfect(perfect_input(homology=None))


# -- criterion from (d^{c_min})^2 ------------------------------------------------

def test_dsq_cp1_satisfied(cp1):
    v = orbit_criterion_dsq(cp1.complex(), W1, cp1.doc["geometry"])
    assert v.outcome == SATISFIED
    branches = v.trace[-1].details["branches"]
    cases = {b["case"] for b in branches}
    assert cases == {"|y|>|x|", "|y|<|x|"}
    up = next(b for b in branches if b["case"] == "|y|>|x|")
    assert up["bound_2c1"] == "4 < 6"
    assert all(b["contradiction"] for b in branches)


def test_dsq_cp2_monodromy_fails(cp2):
    v = orbit_criterion_dsq(cp2.complex(), W2, cp2.doc["geometry"])
    assert v.outcome == "HypothesisFails(monodromy)"


def test_dsq_spacing_violation(cp1):
    geo = copy.deepcopy(cp1.doc["geometry"])
    geo["critical_values"]["a"] = "2"
    with pytest.raises(SpacingViolation):
        orbit_criterion_dsq(cp1.complex(), W1, geo)


def test_dsq_missing_geometry(cp1):
    with pytest.raises(MissingGeometry):
        orbit_criterion_dsq(cp1.complex(), W1, None)
    geo = copy.deepcopy(cp1.doc["geometry"])
    del geo["critical_values"]["b"]
    with pytest.raises(MissingGeometry):
        orbit_criterion_dsq(cp1.complex(), W1, geo)


def test_dsq_self_indexing_fails(cp1):
    geo = copy.deepcopy(cp1.doc["geometry"])
    geo["critical_values"] = {"a": "0", "b": "10"}
    v = orbit_criterion_dsq(cp1.complex(), W1, geo)
    assert v.outcome == "HypothesisFails(self_indexing)"


def scaled(doc, t):
    doc = copy.deepcopy(doc)
    t = Fraction(t)
    for c in doc["novikov"]["classes"]:
        c["omega"] = str(Fraction(c["omega"]) * t)
    doc["novikov"]["rho"] = str(Fraction(doc["novikov"]["rho"]) * t)
    geo = doc["geometry"]
    geo["rho"] = str(Fraction(geo["rho"]) * t)
    geo["critical_values"] = {k: str(Fraction(v) * t) for k, v in geo["critical_values"].items()}
    if "morse" in doc:
        for cp in doc["morse"]["critical_points"]:
            cp["value"] = str(Fraction(cp["value"]) * t)
    return doc


@pytest.mark.parametrize("t", ["3", "1/2", "7/3"])
def test_scale_invariance(t):
    for name, w in (("cp1", W1), ("cp2", W2)):
        base, big = Model(bundled_doc(name)), Model(scaled(bundled_doc(name), t))
        a = orbit_criterion_dsq(base.complex(), w, base.doc["geometry"]).outcome
        b = orbit_criterion_dsq(big.complex(), w, big.doc["geometry"]).outcome
        assert a == b
    a = orbit_criterion_perfect(perfect_input()).outcome
    b = orbit_criterion_perfect(perfect_input(scaled(bundled_doc("cp1"), t))).outcome
    assert a == b == SATISFIED
