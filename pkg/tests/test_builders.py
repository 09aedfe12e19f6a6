import pytest

from qserre.builders import (
    CriticalPoint,
    FiberData,
    GWEntry,
    MorseData,
    build_morse_model,
    build_quantized_morse,
    dimension_gate,
    reinsert,
    seidel_decompose,
    seidel_morphism,
)
from qserre.engine import Window, compute_page
from qserre.errors import GateViolation, GradingError, ShapeMismatch, UnlabeledClass
from qserre.model import Model, canonicalize, dumps, load_bundled, loads
from qserre.random_models import random_labels, random_truncated_model

from conftest import bundled_doc


def test_dimension_gate_examples():
    assert dimension_gate(2, 0, 0, 2)
    assert dimension_gate(0, 2, 2, 2)
    assert not dimension_gate(4, 0, 0, 2)
    assert not dimension_gate(0, 0, 0, 2)


@pytest.mark.parametrize("tables,golden", [("s2_morse", "cp1"), ("cp2_morse", "cp2")])
def test_round_trip_byte_for_byte(tables, golden):
    built = dumps(build_morse_model(bundled_doc(tables)))
    assert built == dumps(canonicalize(bundled_doc(golden)))


def test_built_model_reparses_to_same_pages():
    doc = build_morse_model(bundled_doc("s2_morse"))
    again = Model(loads(dumps(doc))).complex()
    w = Window(-4, 4, 0, 2)
    a, b = compute_page(Model(doc).complex(), 2, w), compute_page(again, 2, w)
    assert a.dims() == b.dims() and a.differential == b.differential


def _e2_shape(C, dims_M, w):
    A, N = C.algebra, C.novikov
    c = N.c1(N.alpha_min)
    out = {}
    for (p, q) in w.bidegrees():
        total = 0
        for i, d in dims_M.items():
            if (i - p) % (2 * c) == 0:
                total += d * len(A.basis(q))
        out[(p, q)] = total
    return out


@pytest.mark.parametrize("name,w", [("cp1", Window(-4, 4, 0, 3)), ("cp2", Window(-6, 6, 0, 5))])
def test_e2_is_homology_tensor_loops_tensor_novikov(name, w):
    m = load_bundled(name)
    C = m.complex()
    dims_M = {int(k): v for k, v in m.homology_of_M().items()}
    assert compute_page(C, 2, w).dims() == _e2_shape(C, dims_M, w)


def _s2_inputs():
    m = load_bundled("cp1")
    md = MorseData([CriticalPoint("a", 2), CriticalPoint("b", 0)], [], [("a", "b", ("u",), 1)])
    return m, md


def test_empty_gw_gives_classical_complex():
    m, md = _s2_inputs()
    C = build_quantized_morse(md, [], m.algebra, m.novikov)
    P = compute_page(C, 2, Window(-4, 4, 0, 2))
    assert P.d(2, 0).column(0) == {0: 1} and P.labels(0, 1) == ["u·b"]
    assert P.d(0, 0).is_zero()


def test_gate_violation():
    m, md = _s2_inputs()
    with pytest.raises(GateViolation):
        build_quantized_morse(md, [GWEntry("a", "b", {"alpha": 1}, 1, ("u",))], m.algebra, m.novikov)
    with pytest.raises(GateViolation):
        build_quantized_morse(md, [GWEntry("b", "a", {"alpha": 1}, 1, ())], m.algebra, m.novikov)


def test_morse_index_drop_enforced():
    m, _ = _s2_inputs()
    md = MorseData([CriticalPoint("a", 2), CriticalPoint("b", 0)], [("a", "b", 1)])
    with pytest.raises(GradingError):
        build_quantized_morse(md, [], m.algebra, m.novikov)


def test_gate_soundness_of_built_complexes():
    for tables in ("s2_morse", "cp2_morse"):
        C = Model(build_morse_model(bundled_doc(tables))).complex()
        N = C.novikov
        for e in C.entries:
            gap = C.generators[C.index[e.source]].p - C.generators[C.index[e.target]].p \
                + 2 * N.c1(N.vector(e.exponent))
            assert 1 <= gap <= 2 * N.c_min - 1


# -- Seidel ---------------------------------------------------------------------

def test_labels_all_zero_single_component(cp1):
    C = cp1.complex()
    w = Window(-4, 4, 0, 2)
    dec = seidel_decompose(C, {"alpha": 0}, 2, w)
    assert list(dec.components) == [0]
    for pq, comp in dec.components[0].items():
        assert comp.page == dec.differential[pq]


def test_unlabeled_class(cp1):
    with pytest.raises(UnlabeledClass):
        seidel_decompose(cp1.complex(), {}, 2, Window(0, 2, 0, 1))


def test_cp1_split_by_base_degree(cp1):
    dec = seidel_decompose(cp1.complex(), {"alpha": 1}, 2, Window(-4, 4, 0, 2))
    assert dec.reassembles()
    # d(a) = u·b has base degree 0, d(b) = u·a·e^alpha has base degree 1
    assert dec.components[0][(2, 0)].page.column(0) == {0: 1}
    assert dec.components[1][(2, 0)].page.is_zero()
    assert dec.components[1][(0, 0)].page.column(0) == {0: 1}


def _fiber(name):
    m = load_bundled(name)
    C = m.complex()
    labels = m.fibration_labels()
    dec = seidel_decompose(C, labels, 2, Window(-2, 4, 0, 2))
    return dec, FiberData.from_complex(C, labels)


def test_trivial_fibration_gives_identity():
    dec, fiber = _fiber("fibration_trivial")
    phi = seidel_morphism(dec, fiber)
    assert phi.classes == ("a", "b")
    assert phi.is_identity()
    assert reinsert(phi, dec, fiber)


def test_elementary_matrix_fibration():
    dec, fiber = _fiber("fibration_elementary")
    phi = seidel_morphism(dec, fiber)
    assert phi.matrix() == [[1, 0], [1, 1]]
    assert not phi.is_identity()
    assert reinsert(phi, dec, fiber)


def test_shape_mismatch_without_fiber_labels(cp1):
    with pytest.raises(ShapeMismatch):
        FiberData.from_complex(cp1.complex(), {"alpha": 1})


@pytest.mark.parametrize("seed", range(10))
def test_random_labeled_reassembly(seed):
    doc = random_truncated_model(seed)
    C = Model(doc).complex()
    r = min(2, C.truncation_order)
    ps = [g.p for g in C.generators]
    dec = seidel_decompose(C, random_labels(seed, doc), r, Window(min(ps), max(ps), 0, 2))
    assert dec.reassembles()
