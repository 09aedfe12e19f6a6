"""Brute-force graded homology, independent of the page machinery.

The oracle works on the window's subquotient complex: keys with
filtration in ``[p_min, p_max]`` and complementary degree in
``[q_min, q_max]``. It uses its own dense elimination (bit rows over GF(2),
Fractions over Q) rather than the sparse echelon used by the pages.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..complexes import EXACT, FilteredComplex, Key
from ..errors import NotExact
from ..fields import FieldChoice
from .views import UnfoldedView, Window, resolve_energy


def dense_rank(field: FieldChoice, rows: Sequence[Sequence[object]]) -> int:
    """Rank of a dense matrix given as a list of rows."""
    if not rows:
        return 0
    if field is FieldChoice.GF2:
        bits = []
        for row in rows:
            v = 0
            for j, c in enumerate(row):
                if c % 2:
                    v |= 1 << j
            if v:
                bits.append(v)
        rank = 0
        while bits:
            pivot = max(bits)
            bits.remove(pivot)
            rank += 1
            hb = pivot.bit_length() - 1
            bits = [b ^ pivot if (b >> hb) & 1 else b for b in bits]
            bits = [b for b in bits if b]
        return rank
    m = [[Fraction(c) for c in row] for row in rows]
    ncols = len(m[0]) if m else 0
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                factor = m[i][col]
                m[i] = [a - factor * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def _matrix(view: UnfoldedView, src: List[Key], dst: List[Key]) -> List[List[object]]:
    """Rows indexed by ``src`` (images of basis keys), columns by ``dst``."""
    index = {k: j for j, k in enumerate(dst)}
    zero = view.complex.field.zero
    rows = []
    for k in src:
        row = [zero] * len(dst)
        for t, c in view.d(k).items():
            j = index.get(t)
            if j is not None:
                row[j] = c
        rows.append(row)
    return rows


def _window_view(C: FilteredComplex, w: Window) -> UnfoldedView:
    energy = resolve_energy(C, w)
    if not C.novikov.needs_energy_bound():
        energy = None
    return UnfoldedView(C, energy, (w.p_min, w.p_max), (w.q_min, w.q_max))


def graded_homology_oracle(C: FilteredComplex, w: Window) -> Dict[Tuple[int, int], int]:
    """``dim Gr_p H_{p+q}`` of the window complex for every ``(p, q)`` in ``w``."""
    if C.truncation_order != EXACT:
        raise NotExact(f"complex has truncation order {C.truncation_order}; d∘d is not zero")
    view = _window_view(C, w)
    f = C.field
    result: Dict[Tuple[int, int], int] = {}
    n_lo, n_hi = w.p_min + w.q_min, w.p_max + w.q_max
    for n in range(n_lo, n_hi + 1):
        lo, hi = w.p_min, w.p_max
        chains = {fp: list(view.basis(fp, n - fp)) for fp in range(lo, hi + 1)}
        above = {fp: list(view.basis(fp, n + 1 - fp)) for fp in range(lo, hi + 1)}
        below = [k for fp in range(lo, hi + 1) for k in view.basis(fp, n - 1 - fp)]
        all_up = [k for fp in range(lo, hi + 1) for k in above[fp]]
        rank_in = dense_rank(f, _matrix(view, all_up, [k for fp in range(lo, hi + 1) for k in chains[fp]]))

        def filtered(p: int) -> int:
            fpn = [k for fp in range(lo, p + 1) for k in chains[fp]]
            if not fpn:
                return 0
            cycles = len(fpn) - dense_rank(f, _matrix(view, fpn, below))
            upper = [k for fp in range(p + 1, hi + 1) for k in chains[fp]]
            proj_rank = dense_rank(f, _matrix(view, all_up, upper)) if upper else 0
            boundaries = rank_in - proj_rank
            return cycles - boundaries

        prev = 0
        for p in range(lo, hi + 1):
            cur = filtered(p)
            q = n - p
            if w.q_min <= q <= w.q_max:
                result[(p, q)] = cur - prev
            prev = cur
    return {pq: result.get(pq, 0) for pq in w.bidegrees()}


@dataclass
class StabilizationReport:
    passed: bool
    r: int
    oracle: Dict[Tuple[int, int], int]
    pages: Dict[Tuple[int, int], int]
    mismatches: List[Tuple[int, int]] = dc_field(default_factory=list)
    stable: bool = True


def stabilized_page_check(C: FilteredComplex, w: Window, workers: Optional[int] = None) -> StabilizationReport:
    """Pages past the window's p-spread must equal the oracle's graded homology."""
    from .pages import compute_page

    oracle = graded_homology_oracle(C, w)
    view = _window_view(C, w)
    r = w.spread + 1
    page = compute_page(C, r, w, view=view, check_cutoff=False, workers=workers)
    later = compute_page(C, r + 1, w, view=view, check_cutoff=False, workers=workers)
    dims = page.dims()
    stable = dims == later.dims()
    mism = sorted(pq for pq in w.bidegrees() if dims[pq] != oracle[pq])
    return StabilizationReport(stable and not mism, r, oracle, dims, mism, stable)
