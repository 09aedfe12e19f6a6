"""Pages E^r of the truncated spectral sequence, block by block.

A block is one bidegree ``(p, q)`` of one page. With ``n = p + q`` it is the
quotient ``Zbar / Bbar`` of subspaces of ``Gr_p C_n`` where

* ``Zbar`` is the set of tops (the ``fp = p`` part) of chains ``v`` with
  filtration ``<= p`` whose differential vanishes in filtrations
  ``p-r+1 .. p-1``;
* ``Bbar`` is the set of tops of ``dw`` for ``w`` supported in filtrations
  ``p+1 .. p+r-1`` with ``dw`` vanishing in filtrations ``p+1 .. p+r-2``.

Every representative keeps its chain-level lift, so ``d^r`` is read off
the lift directly. Blocks are computed lazily and cached.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Dict, Hashable, List, Optional, Tuple

from ..complexes import EXACT, Element, FilteredComplex, Key, format_order
from ..errors import CutoffUnstable, InternalInconsistency, PageOutOfRange
from ..fields import FieldChoice
from ..linalg import Echelon, axpy, kernel
from .views import AUTO, UnfoldedView, Window, resolve_energy, worker_count

Vector = Dict[Hashable, object]


class NotInBlock(Exception):
    """A vector handed to ``coords`` is not a cycle of the block."""


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

@dataclass
class DrMatrix:
    """Sparse matrix between two blocks; ``entries[(row, col)]``."""

    field: FieldChoice
    source: Tuple[int, int]
    target: Tuple[int, int]
    rows: int
    cols: int
    entries: Dict[Tuple[int, int], object] = dc_field(default_factory=dict)

    @classmethod
    def from_columns(cls, field, source, target, rows, columns: List[Dict[int, object]]) -> "DrMatrix":
        ent = {(i, j): c for j, col in enumerate(columns) for i, c in col.items() if c}
        return cls(field, source, target, rows, len(columns), ent)

    def column(self, j: int) -> Dict[int, object]:
        return {i: c for (i, jj), c in self.entries.items() if jj == j}

    def columns(self) -> List[Dict[int, object]]:
        cols: List[Dict[int, object]] = [dict() for _ in range(self.cols)]
        for (i, j), c in self.entries.items():
            cols[j][i] = c
        return cols

    def apply(self, vec: Dict[int, object]) -> Dict[int, object]:
        out: Dict[int, object] = {}
        cols = self.columns()
        for j, c in vec.items():
            axpy(self.field, out, c, cols[j])
        return out

    def compose(self, first: "DrMatrix") -> "DrMatrix":
        """``self ∘ first``."""
        if first.rows != self.cols:
            raise InternalInconsistency("matrix shapes do not compose")
        cols = [self.apply(col) for col in first.columns()]
        return DrMatrix.from_columns(self.field, first.source, self.target, self.rows, cols)

    def is_zero(self) -> bool:
        return not self.entries

    def dense(self) -> List[List[object]]:
        out = [[self.field.zero] * self.cols for _ in range(self.rows)]
        for (i, j), c in self.entries.items():
            out[i][j] = c
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, DrMatrix) and self.rows == other.rows and self.cols == other.cols
                and self.entries == other.entries)


def _restrict_fp(C: FilteredComplex, vec: Vector, lo: int, hi: int) -> Vector:
    return {k: c for k, c in vec.items() if lo <= C.fp(k) <= hi}


# ---------------------------------------------------------------------------
# blocks
# ---------------------------------------------------------------------------

class Block:
    """One bidegree of one page, with canonical representatives."""

    def __init__(self, r: int, p: int, q: int, field: FieldChoice):
        self.r, self.p, self.q = r, p, q
        self.field = field
        self.reps: List[Tuple[Vector, Vector]] = []

    @property
    def dim(self) -> int:
        return len(self.reps)

    def coords(self, top: Vector) -> Dict[int, object]:
        raise NotImplementedError


class PageBlock(Block):
    def __init__(self, r, p, q, field, b_ech: Echelon, q_ech: Echelon, b_dw: Dict, low: List[Vector],
                 z_ech: Optional[Echelon] = None):
        super().__init__(r, p, q, field)
        self.z_ech = z_ech
        self.b_ech = b_ech
        self.q_ech = q_ech
        self.b_dw = b_dw
        self.low = low
        self.reps = q_ech.rows()
        self._index = {piv: i for i, piv in enumerate(q_ech.pivots)}

    def boundaries_in_cycles(self) -> bool:
        """``Bbar^r_p ⊆ Zbar^r_p`` on top components."""
        return self.z_ech is not None and all(self.z_ech.contains(v) for v in self.b_ech.vectors())

    def reduce_boundary(self, top: Vector):
        """``(residual, coords)`` of ``top`` modulo ``Bbar``."""
        res, _, coords = self.b_ech.reduce(top)
        return res, coords

    def boundary_preimage(self, coords: Dict) -> Vector:
        """Sum of the ``w`` whose ``dw`` tops give ``sum coords[piv] * row[piv]``."""
        out: Vector = {}
        for piv, c in coords.items():
            axpy(self.field, out, c, self.b_ech._rows[piv][1])
        return out

    def coords(self, top: Vector) -> Dict[int, object]:
        res, _ = self.reduce_boundary(top)
        res2, _, c = self.q_ech.reduce(res)
        if res2:
            raise NotInBlock(f"vector is not a cycle of E^{self.r}_{self.p},{self.q}")
        return {self._index[piv]: v for piv, v in c.items() if v}


class PageEngine:
    """Lazy, cached block computation for one view of one complex."""

    def __init__(self, C: FilteredComplex, view: UnfoldedView):
        self.complex = C
        self.view = view
        self.field = C.field
        self._blocks: Dict[Tuple[int, int, int], PageBlock] = {}
        self._mats: Dict[Tuple[int, int, int], DrMatrix] = {}
        self._rep_dep: Dict[Tuple[int, int, int], bool] = {}
        self._lock = threading.Lock()

    # -- blocks ----------------------------------------------------------
    def block(self, r: int, p: int, q: int) -> PageBlock:
        key = (r, p, q)
        b = self._blocks.get(key)
        if b is None:
            b = self._compute_block(r, p, q)
            with self._lock:
                b = self._blocks.setdefault(key, b)
        return b

    def _compute_block(self, r: int, p: int, q: int) -> PageBlock:
        C, V, f = self.complex, self.view, self.field
        n = p + q
        src = V.degree_basis(n, min(p, p - r + 1), p)
        images = [_restrict_fp(C, V.d(k), p - r + 1, p - 1) for k in src]
        z_ech = Echelon(f)
        low: List[Vector] = []
        for combo in kernel(f, images):
            v = {src[i]: c for i, c in combo.items()}
            top = _restrict_fp(C, v, p, p)
            if not top:
                low.append(v)
                continue
            res, pay, _ = z_ech.reduce(top, v)
            if res:
                z_ech.add(res, pay)
            else:
                low.append(pay)

        wsrc = V.degree_basis(n + 1, p + 1, p + r - 1)
        b_ech = Echelon(f)
        if wsrc:
            dws = [V.d(k) for k in wsrc]
            cons = [_restrict_fp(C, dw, p + 1, p + r - 2) for dw in dws]
            for combo in kernel(f, cons):
                wv = {wsrc[i]: c for i, c in combo.items()}
                dw: Vector = {}
                for i, c in combo.items():
                    axpy(f, dw, c, dws[i])
                top = _restrict_fp(C, dw, p, p)
                if top:
                    b_ech.add(top, wv)
        b_dw = {piv: V.d_vector(w) for piv, (_, w) in b_ech._rows.items()}
        for vec in b_ech.vectors():
            if not z_ech.contains(vec):
                raise InternalInconsistency(f"B^{r}_{p} is not contained in Z^{r}_{p} at q={q}")

        q_ech = Echelon(f)
        for top, lift in z_ech.rows():
            res, _, coords = b_ech.reduce(top)
            if not res:
                continue
            lift = dict(lift)
            for piv, c in coords.items():
                axpy(f, lift, f.neg(c), b_dw[piv])
            q_ech.add(res, lift)
        return PageBlock(r, p, q, f, b_ech, q_ech, b_dw, low, z_ech)

    # -- differentials ---------------------------------------------------
    def _image_coords(self, r: int, p: int, q: int, lift: Vector, what: str) -> Dict[int, object]:
        C = self.complex
        dl = self.view.d_vector(lift)
        if C.max_fp(dl) > p - r:
            raise InternalInconsistency(f"d of a {what} in E^{r}_{p},{q} leaves F^{p - r}")
        t = _restrict_fp(C, dl, p - r, p - r)
        target = self.block(r, p - r, q + r - 1)
        try:
            return target.coords(t)
        except NotInBlock:
            if self.view.energy is not None:
                raise CutoffUnstable(
                    f"energy cutoff {self.view.energy} too small: d^{r} from ({p},{q}) "
                    "leaves the truncated basis") from None
            raise InternalInconsistency(f"d^{r} image from ({p},{q}) is not an r-cycle") from None

    def d_matrix(self, r: int, p: int, q: int) -> DrMatrix:
        key = (r, p, q)
        m = self._mats.get(key)
        if m is not None:
            return m
        src = self.block(r, p, q)
        target = self.block(r, p - r, q + r - 1)
        cols = [self._image_coords(r, p, q, lift, "representative") for _, lift in src.reps]
        m = DrMatrix.from_columns(self.field, (p, q), (p - r, q + r - 1), target.dim, cols)
        dep = any(self._image_coords(r, p, q, v, "cycle") for v in src.low)
        dep = dep or any(self._image_coords(r, p, q, v, "boundary") for v in src.b_dw.values())
        with self._lock:
            m = self._mats.setdefault(key, m)
            self._rep_dep[key] = dep
        return m

    def representative_dependent(self, r: int, p: int, q: int) -> bool:
        self.d_matrix(r, p, q)
        return self._rep_dep[(r, p, q)]

    def page(self, r: int, w: Window, order, workers: Optional[int] = None) -> "Page":
        bideg = w.bidegrees()
        n = worker_count(workers)
        if n > 1:
            with ThreadPoolExecutor(max_workers=n) as ex:
                blocks = list(ex.map(lambda pq: self.block(r, *pq), bideg))
                mats = list(ex.map(lambda pq: self.d_matrix(r, *pq), bideg))
        else:
            blocks = [self.block(r, *pq) for pq in bideg]
            mats = [self.d_matrix(r, *pq) for pq in bideg]
        dep = any(self._rep_dep[(r, p, q)] for p, q in bideg)
        if dep and r < order:
            raise InternalInconsistency(f"d^{r} depends on the choice of representative")
        return Page(
            complex=self.complex,
            r=r,
            window=w,
            energy=self.view.energy,
            order=order,
            blocks=dict(zip(bideg, blocks)),
            differential=dict(zip(bideg, mats)),
            representative_dependent=dep,
            provider=lambda p, q: self.block(r, p, q),
            matrix_provider=lambda p, q: self.d_matrix(r, p, q),
            engine=self,
        )


# ---------------------------------------------------------------------------
# pages
# ---------------------------------------------------------------------------

@dataclass
class Page:
    complex: FilteredComplex
    r: int
    window: Window
    energy: object
    order: object
    blocks: Dict[Tuple[int, int], Block]
    differential: Dict[Tuple[int, int], Optional[DrMatrix]]
    representative_dependent: bool = False
    provider: Optional[Callable[[int, int], Block]] = None
    matrix_provider: Optional[Callable[[int, int], DrMatrix]] = None
    engine: Optional[PageEngine] = None
    origin: str = "direct"

    @property
    def differential_guarantee(self) -> bool:
        """True when ``d^r`` is a differential (``r < k``)."""
        return self.r < self.order

    def dim(self, p: int, q: int) -> int:
        return self.block(p, q).dim

    def dims(self) -> Dict[Tuple[int, int], int]:
        return {pq: b.dim for pq, b in self.blocks.items()}

    def block(self, p: int, q: int) -> Block:
        b = self.blocks.get((p, q))
        if b is None:
            if self.provider is None:
                raise KeyError((p, q))
            b = self.provider(p, q)
        return b

    def d(self, p: int, q: int) -> DrMatrix:
        m = self.differential.get((p, q))
        if m is None:
            if self.matrix_provider is None:
                raise PageOutOfRange(self.r + 1, f"no differential d^{self.r} on this page")
            m = self.matrix_provider(p, q)
        return m

    def d_squared(self, p: int, q: int) -> DrMatrix:
        first = self.d(p, q)
        second = self.d(p - self.r, q + self.r - 1)
        return second.compose(first)

    def representatives(self, p: int, q: int) -> List[Element]:
        return [Element(self.complex, lift) for _, lift in self.block(p, q).reps]

    def labels(self, p: int, q: int) -> List[str]:
        return [self.complex.format_vector(top) for top, _ in self.block(p, q).reps]

    def total_dimension(self) -> int:
        return sum(self.dims().values())


def _check_r(C: FilteredComplex, r: int) -> None:
    if not isinstance(r, int) or r < 0 or r > C.truncation_order:
        raise PageOutOfRange(r)


def compute_page(
    C: FilteredComplex,
    r: int,
    w: Window,
    *,
    check_cutoff: bool = True,
    workers: Optional[int] = None,
    view: Optional[UnfoldedView] = None,
) -> Page:
    """E^r on every bidegree of ``w`` together with its d^r matrices."""
    _check_r(C, r)
    k = C.truncation_order
    if view is None:
        energy = resolve_energy(C, w, r)
        view = UnfoldedView(C, energy)
    page = PageEngine(C, view).page(r, w, k, workers)
    if check_cutoff and view.energy is not None:
        doubled = UnfoldedView(C, 2 * view.energy, view.p_range, view.q_range)
        other = PageEngine(C, doubled).page(r, w, k, workers)
        for pq in w.bidegrees():
            if page.blocks[pq].dim != other.blocks[pq].dim:
                raise CutoffUnstable(
                    f"doubling the energy cutoff changes dim E^{r}_{pq[0]},{pq[1]} "
                    f"from {page.blocks[pq].dim} to {other.blocks[pq].dim}",
                    bidegree=pq)
            if page.differential[pq] != other.differential[pq]:
                raise CutoffUnstable(f"doubling the energy cutoff changes d^{r} at {pq}", bidegree=pq)
    return page


@dataclass
class PageDifferential:
    r: int
    matrices: Dict[Tuple[int, int], DrMatrix]
    differential_guarantee: bool
    representative_dependent: bool
    page: Page


def page_differential(C: FilteredComplex, r: int, w: Window, **kwargs) -> PageDifferential:
    """The d^r matrices; for ``r = k`` these carry no d∘d = 0 guarantee."""
    page = compute_page(C, r, w, **kwargs)
    return PageDifferential(r, page.differential, page.differential_guarantee,
                            page.representative_dependent, page)


# ---------------------------------------------------------------------------
# homology of a page
# ---------------------------------------------------------------------------

class HomologyBlock(Block):
    """``ker d^r / im d^r`` at one bidegree, with corrected chain lifts."""

    def __init__(self, page: Page, p: int, q: int):
        r = page.r
        super().__init__(r + 1, p, q, page.complex.field)
        f, C = self.field, page.complex
        self.base = page.block(p, q)
        out = page.d(p, q)
        incoming = page.d(p + r, q - r + 1)
        self.im = Echelon(f)
        for col in incoming.columns():
            self.im.add(col)
        self.h = Echelon(f)
        for combo in kernel(f, out.columns()):
            res, _, _ = self.im.reduce(combo)
            if res:
                self.h.add(res)
        self._index = {piv: i for i, piv in enumerate(self.h.pivots)}
        target = page.block(p - r, q + r - 1)
        dvec = page.engine.view.d_vector if page.engine else C.d_vector
        for hvec in self.h.vectors():
            top: Vector = {}
            lift: Vector = {}
            for i, c in hvec.items():
                t_i, l_i = self.base.reps[i]
                axpy(f, top, c, t_i)
                axpy(f, lift, c, l_i)
            t = _restrict_fp(C, dvec(lift), p - r, p - r)
            if t:
                res, coords = target.reduce_boundary(t)
                if res:
                    raise InternalInconsistency(f"a d^{r}-cycle at ({p},{q}) does not lift to page {r + 1}")
                axpy(f, lift, f.neg(f.one), target.boundary_preimage(coords))
            self.reps.append((top, lift))

    def coords(self, top: Vector) -> Dict[int, object]:
        try:
            c = self.base.coords(top)
        except NotInBlock:
            raise NotInBlock(f"vector is not a cycle of E^{self.r - 1}_{self.p},{self.q}") from None
        res, _, _ = self.im.reduce(c)
        res2, _, hc = self.h.reduce(res)
        if res2:
            raise NotInBlock(f"vector is not a cycle of E^{self.r}_{self.p},{self.q}")
        return {self._index[piv]: v for piv, v in hc.items() if v}


def page_homology_step(P: Page) -> Page:
    """E^{r+1} computed as the homology of ``(E^r, d^r)``.

    The result keeps chain-level lifts, so when ``r + 1 <= k`` its own
    d^{r+1} matrices are available for comparison with a direct computation.
    """
    if P.r >= P.order or P.engine is None:
        raise PageOutOfRange(P.r + 1, f"page {P.r} is the last page; its homology is not a page")
    C = P.complex
    cache: Dict[Tuple[int, int], HomologyBlock] = {}
    lock = threading.Lock()

    def hblock(p: int, q: int) -> HomologyBlock:
        b = cache.get((p, q))
        if b is None:
            b = HomologyBlock(P, p, q)
            with lock:
                b = cache.setdefault((p, q), b)
        return b

    r1 = P.r + 1
    dvec = P.engine.view.d_vector

    def hmatrix(p: int, q: int) -> DrMatrix:
        src = hblock(p, q)
        target = hblock(p - r1, q + r1 - 1)
        cols = []
        for _, lift in src.reps:
            dl = dvec(lift)
            if C.max_fp(dl) > p - r1:
                raise InternalInconsistency(f"lift at ({p},{q}) is not an {r1}-cycle")
            cols.append(target.coords(_restrict_fp(C, dl, p - r1, p - r1)))
        return DrMatrix.from_columns(C.field, (p, q), (p - r1, q + r1 - 1), target.dim, cols)

    bideg = P.window.bidegrees()
    blocks = {pq: hblock(*pq) for pq in bideg}
    has_d = r1 <= P.order
    diff = {pq: hmatrix(*pq) for pq in bideg} if has_d else {}
    return Page(
        complex=C,
        r=r1,
        window=P.window,
        energy=P.energy,
        order=P.order,
        blocks=blocks,
        differential=diff,
        provider=hblock,
        matrix_provider=hmatrix if has_d else None,
        engine=None,
        origin="homology",
    )


@dataclass
class StepComparison:
    dims_match: bool
    isomorphic: bool
    commutes: bool
    mismatches: List[str]

    @property
    def ok(self) -> bool:
        return self.dims_match and self.isomorphic and self.commutes


def compare_with_step(direct: Page, stepped: Page) -> StepComparison:
    """Check the natural map E^{r+1} -> H(E^r) is an isomorphism of pages."""
    from ..linalg import rank

    f = direct.complex.field
    mism: List[str] = []
    dims_ok = iso_ok = comm_ok = True
    maps: Dict[Tuple[int, int], DrMatrix] = {}

    def natural(p: int, q: int) -> DrMatrix:
        m = maps.get((p, q))
        if m is None:
            src = direct.block(p, q)
            tgt = stepped.block(p, q)
            cols = [tgt.coords(top) for top, _ in src.reps]
            m = DrMatrix.from_columns(f, (p, q), (p, q), tgt.dim, cols)
            maps[(p, q)] = m
        return m

    for (p, q) in direct.window.bidegrees():
        a, b = direct.dim(p, q), stepped.dim(p, q)
        if a != b:
            dims_ok = False
            mism.append(f"dim mismatch at ({p},{q}): {a} vs {b}")
            continue
        m = natural(p, q)
        if rank(f, m.columns()) != a:
            iso_ok = False
            mism.append(f"natural map not injective at ({p},{q})")
    if dims_ok and iso_ok and direct.matrix_provider is not None and stepped.matrix_provider is not None:
        r = direct.r
        for (p, q) in direct.window.bidegrees():
            lhs = natural(p - r, q + r - 1).compose(direct.d(p, q))
            rhs = stepped.d(p, q).compose(natural(p, q))
            if lhs != rhs:
                comm_ok = False
                mism.append(f"d^{r} does not commute with the natural map at ({p},{q})")
    return StepComparison(dims_ok, iso_ok, comm_ok, mism)
