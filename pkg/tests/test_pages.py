import pytest

from qserre.complexes import EXACT
from qserre.engine import (
    Window,
    compare_with_step,
    compute_page,
    page_differential,
    page_homology_step,
)
from qserre.errors import CutoffUnstable, PageOutOfRange
from qserre.model import Model

from conftest import bundled_doc

CP1_WINDOW = Window(-4, 4, 0, 3)
CP2_WINDOW = Window(-6, 6, 0, 5)


def test_cp1_page_two_shape(cp1):
    P = compute_page(cp1.complex(), 2, CP1_WINDOW)
    for (p, q) in CP1_WINDOW.bidegrees():
        assert P.dim(p, q) == (1 if p % 2 == 0 else 0)


def test_cp1_d2_values(cp1):
    C = cp1.complex()
    D = page_differential(C, 2, CP1_WINDOW)
    P = D.page
    assert not D.differential_guarantee
    assert P.labels(2, 0) == ["a"] and P.labels(0, 0) == ["b"]
    assert D.matrices[(2, 0)].column(0) == {0: 1}
    assert P.labels(0, 1) == ["u·b"]
    assert D.matrices[(0, 0)].column(0) == {0: 1}
    assert P.labels(-2, 1) == ["u·a·e^{alpha}"]
    sq = P.d_squared(2, 0)
    assert sq.column(0) == {0: 1}
    assert P.labels(-2, 2) == ["u^2·a·e^{alpha}"]


def test_cp2_page_two_and_three(cp2):
    C = cp2.complex()
    P = compute_page(C, 2, CP2_WINDOW)
    assert P.labels(2, 0) == ["a1"]
    assert P.d(2, 0).column(0) == {0: 1} and P.labels(0, 1) == ["u·a0"]
    assert P.d(4, 0).column(0) == {0: 1} and P.labels(2, 1) == ["u·a1"]
    assert P.d(0, 0).column(0) == {0: 1} and P.labels(-2, 1) == ["u·a2·e^{Delta}"]
    for pq in CP2_WINDOW.bidegrees():
        if CP2_WINDOW.contains(pq[0] - 4, pq[1] + 2):
            assert P.d_squared(*pq).is_zero()
    inner = Window(-2, 2, 0, 3)
    assert compute_page(C, 3, inner).total_dimension() == 0
    assert page_homology_step(compute_page(C, 2, inner)).total_dimension() == 0


def test_page_out_of_range(cp1):
    with pytest.raises(PageOutOfRange):
        compute_page(cp1.complex(), 3, CP1_WINDOW)
    with pytest.raises(PageOutOfRange):
        compute_page(cp1.complex(), -1, CP1_WINDOW)


def test_zero_differential_pages_are_graded():
    doc = bundled_doc("cp1")
    doc["differential"] = []
    doc["truncation_order"] = "exact"
    C = Model(doc).complex()
    w = Window(-4, 4, 0, 2)
    first = compute_page(C, 0, w).dims()
    for r in (1, 2, 3):
        P = compute_page(C, r, w)
        assert P.dims() == first
        assert all(m.is_zero() for m in P.differential.values())
        assert compare_with_step(compute_page(C, r + 1, w), page_homology_step(P)).ok


def test_d1_vanishes_when_all_drops_at_least_two(cp1):
    P = compute_page(cp1.complex(), 1, CP1_WINDOW)
    assert all(m.is_zero() for m in P.differential.values())


def test_boundaries_inside_cycles(cp1, cp2):
    for m, w in ((cp1, CP1_WINDOW), (cp2, CP2_WINDOW)):
        C = m.complex()
        top = 2 if C.truncation_order == 2 else 3
        for r in range(0, top + 1):
            P = compute_page(C, r, w)
            assert all(P.block(*pq).boundaries_in_cycles() for pq in w.bidegrees())


def test_step_matches_direct(cp2):
    C = cp2.complex()
    for r in (1, 2):
        P = compute_page(C, r, CP2_WINDOW)
        assert compare_with_step(compute_page(C, r + 1, CP2_WINDOW), page_homology_step(P)).ok


def test_representatives_lie_in_filtration(cp2):
    C = cp2.complex()
    P = compute_page(C, 2, CP2_WINDOW)
    for (p, q) in CP2_WINDOW.bidegrees():
        for top, lift in P.block(p, q).reps:
            assert C.max_fp(lift) <= p
            assert C.max_fp(C.d_vector(lift)) <= p - 2


def test_worker_count_does_not_change_results(cp2, monkeypatch):
    C = cp2.complex()
    a = compute_page(C, 2, CP2_WINDOW, workers=1)
    b = compute_page(C, 2, CP2_WINDOW, workers=4)
    assert a.dims() == b.dims()
    assert a.differential == b.differential
    monkeypatch.setenv("QSERRE_THREADS", "3")
    c = compute_page(C, 2, CP2_WINDOW)
    assert c.dims() == a.dims()


def test_small_energy_cutoff_is_unstable(cp1):
    with pytest.raises(CutoffUnstable):
        compute_page(cp1.complex(), 2, Window(-4, 4, 0, 3, energy=0))


def test_novikov_shift_equivariance(cp2):
    P = compute_page(cp2.complex(), 2, CP2_WINDOW)
    dims = P.dims()
    for (p, q), d in dims.items():
        if (p - 6, q) in dims:
            assert dims[(p - 6, q)] == d


def test_cp2_is_exact(cp2):
    assert cp2.complex().truncation_order == EXACT
