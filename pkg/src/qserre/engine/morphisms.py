"""Truncated morphisms between complexes and the maps they induce on pages."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..complexes import EXACT, DifferentialEntry, FilteredComplex, Key, _exp
from ..errors import (
    DefectTooLarge,
    FiltrationError,
    GradingError,
    InternalInconsistency,
    PageOutOfRange,
    UnknownGenerator,
)
from ..linalg import axpy, rank
from .pages import DrMatrix, NotInBlock, Page, PageEngine, _restrict_fp, compute_page
from .views import UnfoldedView, Window, resolve_energy


class TruncatedMorphism:
    """Generator-level map Θ: C -> C' over the shared coefficient ring.

    Entries use the same shape as differential entries. ``shift`` is the
    filtration shift s: an entry ``c·y`` of Θ(x) must satisfy
    ``p'(y) - 2c1(μ) + deg(w) = p(x) + s``. Plain morphisms have s = 0;
    multiplication by ``e^β`` has s = -2c1(β).
    """

    def __init__(
        self,
        source: FilteredComplex,
        target: FilteredComplex,
        entries: Iterable[DifferentialEntry],
        shift: int = 0,
    ):
        if source.algebra.signature() != target.algebra.signature() or \
                source.novikov.signature() != target.novikov.signature():
            raise UnknownGenerator("source and target complexes must share the coefficient ring")
        self.source = source
        self.target = target
        self.shift = int(shift)
        self.field = source.field
        self.entries = tuple(entries)
        A, N, f = source.algebra, source.novikov, self.field
        self._table: List[Dict[Key, object]] = [dict() for _ in source.generators]
        for e in self.entries:
            s = source._gen(e.source)
            t = target._gen(e.target)
            exp = _exp(N, e.exponent)
            word = A.word(e.word)
            fp = target.generators[t].p + N.grade(exp)
            goal = source.generators[s].p + self.shift
            if fp > goal:
                raise FiltrationError(f"Θ({e.source}) entry raises the filtration", generator=e.source)
            if fp + A.degree(word) != goal:
                raise GradingError(e.source, f"Θ entry to {e.target}")
            row = self._table[s]
            for w, cw in A.normal_form(word).items():
                axpy(f, row, f.mul(f.coerce(e.coefficient), cw), {(t, exp, w): f.one})
        self.defect_order, self.defect_drops = self._defect()

    def apply_key(self, key: Key) -> Dict[Key, object]:
        g, exp, word = key
        A, f = self.source.algebra, self.field
        out: Dict[Key, object] = {}
        for (t, e, w), c in self._table[g].items():
            ne = tuple(a + b for a, b in zip(e, exp))
            for nw, cw in A.normal_form(word + w).items():
                axpy(f, out, f.mul(c, cw), {(t, ne, nw): f.one})
        return out

    def apply(self, vec: Mapping[Key, object]) -> Dict[Key, object]:
        out: Dict[Key, object] = {}
        for k, c in vec.items():
            axpy(self.field, out, c, self.apply_key(k))
        return out

    def _defect(self):
        C, D, f = self.source, self.target, self.field
        drops = []
        for i, g in enumerate(C.generators):
            key = (i, C.novikov.zero, ())
            a = D.d_vector(self.apply_key(key))
            b = self.apply(C.d_key(key))
            axpy(f, a, f.neg(f.one), b)
            drops.append(g.p + self.shift - D.max_fp(a))
        k = min((int(d) // 2 for d in drops if d != math.inf), default=EXACT)
        return k, drops


def identity_morphism(C: FilteredComplex) -> TruncatedMorphism:
    N = C.novikov
    entries = [DifferentialEntry(g.name, g.name, (), N.zero, 1) for g in C.generators]
    return TruncatedMorphism(C, C, entries)


def shift_morphism(C: FilteredComplex, beta) -> TruncatedMorphism:
    """Multiplication by ``e^β``; it shifts the filtration by ``-2c1(β)``."""
    N = C.novikov
    b = N.vector(beta)
    entries = [DifferentialEntry(g.name, g.name, (), b, 1) for g in C.generators]
    return TruncatedMorphism(C, C, entries, shift=N.grade(b))


@dataclass
class InducedMorphism:
    r: int
    shift: int
    matrices: Dict[Tuple[int, int], DrMatrix]
    isomorphism: Dict[Tuple[int, int], bool]
    commutes: Optional[bool]
    source_page: Page
    target_page: Page

    @property
    def is_isomorphism(self) -> bool:
        return all(self.isomorphism.values())


def _induced_matrix(theta: TruncatedMorphism, src: PageEngine, dst: PageEngine,
                    r: int, p: int, q: int) -> DrMatrix:
    s = theta.shift
    C = theta.target
    sb = src.block(r, p, q)
    tb = dst.block(r, p + s, q)
    cols = []
    for _, lift in sb.reps:
        img = theta.apply(lift)
        if dst.view.bounded:
            img = {k: c for k, c in img.items() if dst.view.in_view(k)}
        if C.max_fp(img) > p + s:
            raise InternalInconsistency(f"Θ raises filtration on E^{r}_{p},{q}")
        try:
            cols.append(tb.coords(_restrict_fp(C, img, p + s, p + s)))
        except NotInBlock:
            raise InternalInconsistency(f"Θ does not map r-cycles to r-cycles at ({p},{q})") from None
    return DrMatrix.from_columns(C.field, (p, q), (p + s, q), tb.dim, cols)


def induced_page_morphism(
    theta: TruncatedMorphism,
    r: int,
    w: Window,
    *,
    workers: Optional[int] = None,
    check_cutoff: bool = True,
) -> InducedMorphism:
    """Matrices of E^r(Θ) on every bidegree of the window (source side)."""
    C, D = theta.source, theta.target
    kmax = min(C.truncation_order, D.truncation_order)
    if r < 0 or r > kmax:
        raise PageOutOfRange(r)
    if 2 * r > 2 * theta.defect_order:
        raise DefectTooLarge(
            f"dΘ - Θd drops filtration by {min(theta.defect_drops)}, less than 2r = {2 * r}",
            r=r, defect_order=theta.defect_order)
    s = theta.shift
    sp = compute_page(C, r, w, workers=workers, check_cutoff=check_cutoff)
    tw = Window(w.p_min + s, w.p_max + s, w.q_min, w.q_max, w.energy)
    tp = compute_page(D, r, tw, workers=workers, check_cutoff=check_cutoff)
    src, dst = sp.engine, tp.engine
    mats: Dict[Tuple[int, int], DrMatrix] = {}
    iso: Dict[Tuple[int, int], bool] = {}
    for (p, q) in w.bidegrees():
        m = _induced_matrix(theta, src, dst, r, p, q)
        mats[(p, q)] = m
        iso[(p, q)] = m.rows == m.cols and rank(C.field, m.columns()) == m.cols
    commutes = None
    if r < kmax:
        commutes = True
        for (p, q) in w.bidegrees():
            lhs = _induced_matrix(theta, src, dst, r, p - r, q + r - 1).compose(sp.d(p, q))
            rhs = tp.d(p + s, q).compose(mats[(p, q)])
            if lhs != rhs:
                commutes = False
                break
        if not commutes:
            raise InternalInconsistency(f"E^{r}(Θ) does not commute with d^{r}")
    return InducedMorphism(r, s, mats, iso, commutes, sp, tp)


def induced_tower(
    theta: TruncatedMorphism,
    w: Window,
    r_max: Optional[int] = None,
    *,
    workers: Optional[int] = None,
) -> Dict[int, InducedMorphism]:
    """E^r(Θ) for ``2 <= r <= r_max``.

    When E²(Θ) is an isomorphism on a window enlarged enough to contain
    every bidegree feeding the later pages, the later maps must be
    isomorphisms too; a failure is an internal inconsistency.
    """
    C, D = theta.source, theta.target
    top = min(C.truncation_order, D.truncation_order, theta.defect_order)
    if r_max is None:
        if top == EXACT:
            raise PageOutOfRange(0, "an exact tower needs an explicit r_max")
        r_max = int(top)
    tower: Dict[int, InducedMorphism] = {}
    span = sum(range(2, r_max + 1))
    wide = w.enlarged(span, span)
    base = induced_page_morphism(theta, 2, wide, workers=workers)
    for r in range(2, r_max + 1):
        tower[r] = induced_page_morphism(theta, r, w, workers=workers)
        if base.is_isomorphism and not tower[r].is_isomorphism:
            raise InternalInconsistency(f"E^2(Θ) is an isomorphism but E^{r}(Θ) is not")
    return tower
