import pytest

from qserre.complexes import DifferentialEntry
from qserre.engine import (
    TruncatedMorphism,
    Window,
    identity_morphism,
    induced_page_morphism,
    induced_tower,
    shift_morphism,
)
from qserre.errors import DefectTooLarge, FiltrationError, GradingError, PageOutOfRange
from qserre.model import Model
from qserre.random_models import random_exact_model, random_homotopy_morphism

W = Window(-4, 4, 0, 3)


def test_identity_induces_identity(cp1):
    C = cp1.complex()
    for r in (0, 1, 2):
        m = induced_page_morphism(identity_morphism(C), r, W)
        assert m.is_isomorphism
        for pq, mat in m.matrices.items():
            assert mat.entries == {(i, i): 1 for i in range(mat.cols)}


def test_shift_morphism(cp1):
    C = cp1.complex()
    theta = shift_morphism(C, "alpha")
    assert theta.shift == -4
    m = induced_page_morphism(theta, 2, W)
    assert m.is_isomorphism
    assert m.matrices[(2, 0)].target == (-2, 0)
    assert m.target_page.labels(-2, 0) == ["a·e^{alpha}"]


def test_relabeling_of_cp2(cp2):
    C = cp2.complex()
    theta = TruncatedMorphism(C, C, [
        DifferentialEntry("a2", "a2", (), (0,), 1),
        DifferentialEntry("a1", "a1", (), (0,), 1),
        DifferentialEntry("a0", "a0", (), (0,), 1),
        DifferentialEntry("a2", "a0", ("v",), (0,), 1),
    ])
    tower = induced_tower(theta, Window(-2, 4, 0, 4), 3)
    assert all(m.is_isomorphism for m in tower.values())
    assert tower[2].commutes


def test_morphism_validation(cp1):
    C = cp1.complex()
    with pytest.raises(FiltrationError):
        TruncatedMorphism(C, C, [DifferentialEntry("b", "a", (), (0,), 1)])
    with pytest.raises(GradingError):
        TruncatedMorphism(C, C, [DifferentialEntry("a", "b", (), (0,), 1)])


def test_defect_too_large(cp1):
    from conftest import bundled_doc
    C = cp1.complex()
    doc = bundled_doc("cp1")
    doc["differential"] = [e for e in doc["differential"] if e["source"] == "a"]
    doc["truncation_order"] = "exact"
    D = Model(doc).complex()
    # identity onto the classical model: the quantum term of d(b) is the defect
    theta = TruncatedMorphism(C, D, [DifferentialEntry(n, n, (), (0,), 1) for n in ("a", "b")])
    assert theta.defect_order == 1
    assert induced_page_morphism(theta, 1, W).is_isomorphism
    with pytest.raises(DefectTooLarge):
        induced_page_morphism(theta, 2, W)


def test_exact_tower_needs_rmax(cp2):
    with pytest.raises(PageOutOfRange):
        induced_tower(identity_morphism(cp2.complex()), W)


@pytest.mark.parametrize("seed", range(4))
def test_homotopy_to_identity_is_iso(seed):
    C = Model(random_exact_model(seed)).complex()
    ps = [g.p for g in C.generators]
    theta = random_homotopy_morphism(C, seed)
    tower = induced_tower(theta, Window(min(ps), max(ps), 0, 2), 3)
    assert all(m.is_isomorphism for m in tower.values())
