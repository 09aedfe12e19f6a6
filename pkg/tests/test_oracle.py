import pytest

from qserre.engine import Window, graded_homology_oracle, stabilized_page_check
from qserre.errors import NotExact
from qserre.model import Model, load_bundled
from qserre.random_models import random_exact_model

from conftest import bundled_doc


def test_cp2_oracle_frozen(cp2):
    o = graded_homology_oracle(cp2.complex(), Window(-6, 6, 0, 5))
    # only window-edge classes survive: the complex is acyclic inside
    assert {k: v for k, v in o.items() if v} == {(-6, 0): 1, (6, 1): 1, (-6, 4): 1, (6, 5): 1}


def test_cp2_stabilizes(cp2):
    assert stabilized_page_check(cp2.complex(), Window(-6, 6, 0, 5)).passed


def test_oracle_rejects_truncated(cp1):
    with pytest.raises(NotExact):
        graded_homology_oracle(cp1.complex(), Window(-4, 4, 0, 3))


def test_zero_differential_counts_keys():
    doc = bundled_doc("cp1")
    doc["differential"] = []
    doc["truncation_order"] = "exact"
    C = Model(doc).complex()
    w = Window(-4, 4, 0, 2)
    o = graded_homology_oracle(C, w)
    assert all(v == (1 if p % 2 == 0 else 0) for (p, q), v in o.items())
    assert stabilized_page_check(C, w).passed


def acyclic_pair():
    return Model({
        "schema_version": 1,
        "field": "GF2",
        "algebra": {"generators": [{"name": "u", "degree": 1}], "relations": [], "commuting": []},
        "novikov": {"classes": [{"name": "alpha", "c1": 2, "omega": "2"}], "monotone": True,
                    "rho": "1", "c_min": 2, "alpha_min": "alpha"},
        "generators": [{"name": "x", "p": 1}, {"name": "y", "p": 0}],
        "differential": [{"source": "x", "target": "y", "monomial": [], "exponent": {}, "coefficient": "1"}],
        "truncation_order": "exact",
    })


def test_acyclic_pair():
    w = Window(-1, 2, 0, 2)
    o = graded_homology_oracle(acyclic_pair().complex(), w)
    assert all(v == 0 for v in o.values())


def test_random_seed42_frozen():
    C = load_bundled("random_seed42").complex()
    o = graded_homology_oracle(C, Window(0, 5, 0, 3))
    table = [[o[(p, q)] for p in range(6)] for q in range(4)]
    assert table == [[2, 0, 1, 0, 1, 1], [2, 0, 1, 0, 1, 1], [4, 0, 2, 0, 2, 2], [4, 0, 2, 0, 2, 2]]


def test_bundled_random_model_matches_generator():
    from qserre.model import canonicalize
    assert load_bundled("random_seed42").doc == canonicalize(random_exact_model(42))


@pytest.mark.parametrize("seed", range(8))
def test_random_eight_generator_complexes(seed):
    C = Model(random_exact_model(seed, n_generators=8)).complex()
    ps = [g.p for g in C.generators]
    assert stabilized_page_check(C, Window(min(ps) - 2, max(ps), 0, 3)).passed
