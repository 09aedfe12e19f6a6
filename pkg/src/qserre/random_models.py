"""Seeded random model documents for property suites.

Exact models are built one generator at a time: ``d(g)`` is a random
cycle of the complex spanned by the earlier generators, so ``d∘d = 0``
holds by construction. Truncated models of order k add a perturbation
whose terms drop the filtration by at least ``2k``.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional

from .linalg import kernel
from .model import Model, canonicalize

ALGEBRAS = {
    "free": {"generators": [{"name": "u", "degree": 1}], "relations": [], "commuting": [], "order": "deglex"},
    "exterior": {
        "generators": [{"name": "u", "degree": 1}, {"name": "v", "degree": 2}],
        "relations": [{"lhs": ["u", "u"], "rhs": []}],
        "commuting": [["u", "v"]],
        "order": "deglex",
    },
    "polynomial": {
        "generators": [{"name": "u", "degree": 1}, {"name": "v", "degree": 2}],
        "relations": [],
        "commuting": [["u", "v"]],
        "order": "deglex",
    },
}


def _skeleton(rng: random.Random, algebra: str, c1: int) -> Dict:
    return {
        "schema_version": 1,
        "field": "GF2",
        "algebra": ALGEBRAS[algebra],
        "novikov": {
            "classes": [{"name": "beta", "c1": c1, "omega": str(c1)}],
            "monotone": True,
            "rho": "1",
            "c_min": c1,
            "alpha_min": "beta",
        },
        "generators": [],
        "differential": [],
    }


def _entry(C, src: str, key, coefficient="1") -> Dict:
    g, exp, word = key
    return {
        "source": src,
        "target": C.generators[g].name,
        "monomial": [C.algebra.names[i] for i in word],
        "exponent": {"beta": exp[0]} if exp[0] else {},
        "coefficient": coefficient,
    }


def _candidates(C, p: int, q_cut: int, min_drop: int = 1) -> List:
    """Keys of total degree ``p - 1`` with filtration at most ``p - min_drop``."""
    N, A = C.novikov, C.algebra
    c = N.c1(N.alpha_min)
    out = []
    for h, gen in enumerate(C.generators):
        for q in range(0, q_cut + 1):
            fp = p - 1 - q
            if p - fp < min_drop:
                continue
            num = gen.p - fp
            if num % (2 * c):
                continue
            exp = (num // (2 * c),)
            for word in A.basis(q):
                out.append((h, exp, word))
    return out


def _random_combo(rng: random.Random, basis: List[Dict]) -> Dict:
    out: Dict = {}
    for vec in basis:
        if rng.random() < 0.5:
            for k, c in vec.items():
                if k in out:
                    del out[k]
                else:
                    out[k] = c
    return out


def random_exact_model(
    seed: int,
    n_generators: Optional[int] = None,
    q_cut: int = 6,
    algebra: Optional[str] = None,
) -> Dict:
    """Canonical model document of a random complex with ``d∘d = 0``."""
    rng = random.Random(seed)
    algebra = algebra or rng.choice(sorted(ALGEBRAS))
    c1 = rng.choice((1, 2))
    n = n_generators or rng.randint(3, 12)
    doc = _skeleton(rng, algebra, c1)
    for i in range(n):
        name = f"g{i}"
        p = rng.randint(0, 6)
        if doc["generators"]:
            C = Model(doc).complex()
            cand = _candidates(C, p, min(q_cut, 3))
            images = [C.d_key(k) for k in cand]
            combos = kernel(C.field, images)
            cycles = [{cand[j]: 1 for j in combo} for combo in combos]
            rng.shuffle(cycles)
            d = _random_combo(rng, cycles[:6])
            doc["differential"] += [_entry(C, name, k) for k in sorted(d)]
        doc["generators"].append({"name": name, "p": p})
    doc["truncation_order"] = "exact"
    return canonicalize(doc)


def random_truncated_model(seed: int, k: Optional[int] = None, q_cut: int = 6) -> Dict:
    """Random exact model plus terms dropping the filtration by at least ``2k``."""
    rng = random.Random(10_000 + seed)
    k = k or rng.choice((1, 2, 3))
    doc = random_exact_model(seed, q_cut=q_cut)
    C = Model(doc).complex()
    extra = []
    for g in C.generators:
        cand = _candidates(C, g.p, q_cut, min_drop=2 * k)
        rng.shuffle(cand)
        for key in cand[: rng.randint(0, 2)]:
            extra.append(_entry(C, g.name, key))
    doc = dict(doc, differential=doc["differential"] + extra, truncation_order=k)
    return canonicalize(doc)


def random_labels(seed: int, doc: Dict) -> Dict[str, int]:
    rng = random.Random(20_000 + seed)
    return {c["name"]: rng.choice((0, 1, 2)) for c in doc["novikov"]["classes"]}


def random_homotopy_morphism(C, seed: int, n_terms: int = 2):
    """Θ = id + dh + hd for a random filtration-preserving h of degree +1.

    Θ is chain homotopic to the identity, so its E¹ and later maps are
    isomorphisms; on truncated complexes the defect drops by ``2k``.
    """
    from .complexes import DifferentialEntry
    from .engine.morphisms import TruncatedMorphism
    from .linalg import axpy

    rng = random.Random(30_000 + seed)
    f, N = C.field, C.novikov
    h: Dict[int, Dict] = {}
    for i, g in enumerate(C.generators):
        cand = [k for k in _candidates(C, g.p + 2, 3) if k[0] != i or k[1] != N.zero]
        cand = [k for k in cand if C.fp(k) <= g.p]
        rng.shuffle(cand)
        h[i] = {k: f.one for k in cand[:rng.randint(0, n_terms)]}

    def h_key(key):
        g, exp, word = key
        out: Dict = {}
        for (t, e, w), c in h[g].items():
            ne = tuple(a + b for a, b in zip(e, exp))
            for nw, cw in C.algebra.normal_form(word + w).items():
                axpy(f, out, f.mul(c, cw), {(t, ne, nw): f.one})
        return out

    def h_vec(vec):
        out: Dict = {}
        for k, c in vec.items():
            axpy(f, out, c, h_key(k))
        return out

    entries = []
    for i, g in enumerate(C.generators):
        key = (i, N.zero, ())
        img = {key: f.one}
        axpy(f, img, f.one, C.d_vector(h_key(key)))
        axpy(f, img, f.one, h_vec(C.d_key(key)))
        for (t, e, w), c in sorted(img.items()):
            entries.append(DifferentialEntry(g.name, C.generators[t].name,
                                             tuple(C.algebra.names[j] for j in w), e, c))
    return TruncatedMorphism(C, C, entries)
