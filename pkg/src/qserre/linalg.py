"""Exact sparse linear algebra over a :class:`FieldChoice`.

Vectors are plain dicts ``key -> nonzero field element``. Keys must be
mutually comparable; the smallest key of a vector is its pivot, which fixes
the deterministic basis order used everywhere downstream.
"""

from __future__ import annotations

from typing import Dict, Hashable, Iterable, List, Optional, Tuple

from .fields import FieldChoice

Vector = Dict[Hashable, object]


def axpy(field: FieldChoice, y: Vector, a, x: Vector) -> None:
    """In place ``y += a * x``."""
    if not a:
        return
    if field is FieldChoice.GF2:
        for k in x:
            if k in y:
                del y[k]
            else:
                y[k] = 1
        return
    for k, v in x.items():
        s = y.get(k, 0) + a * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


def scale(field: FieldChoice, a, x: Vector) -> Vector:
    if not a:
        return {}
    if field is FieldChoice.GF2:
        return dict(x)
    return {k: a * v for k, v in x.items()}


def add(field: FieldChoice, x: Vector, y: Vector) -> Vector:
    out = dict(x)
    axpy(field, out, field.one, y)
    return out


def sub(field: FieldChoice, x: Vector, y: Vector) -> Vector:
    out = dict(x)
    axpy(field, out, field.neg(field.one), y)
    return out


def restrict(x: Vector, keys) -> Vector:
    return {k: v for k, v in x.items() if k in keys}


class Echelon:
    """Fully reduced echelon basis of a subspace.

    Each stored row may carry a payload vector that undergoes the same row
    operations; this is how chain-level lifts ride along with their images
    in an associated graded piece.
    """

    def __init__(self, field: FieldChoice):
        self.field = field
        self._rows: Dict[Hashable, Tuple[Vector, Optional[Vector]]] = {}

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> List[Hashable]:
        return sorted(self._rows)

    def rows(self) -> List[Tuple[Vector, Optional[Vector]]]:
        return [self._rows[k] for k in self.pivots]

    def vectors(self) -> List[Vector]:
        return [self._rows[k][0] for k in self.pivots]

    def reduce(self, v: Vector, payload: Optional[Vector] = None):
        """Return ``(residual, payload_residual, coords)``.

        ``residual = v - sum(coords[piv] * row[piv])`` and has no support on
        any pivot.
        """
        f = self.field
        res = dict(v)
        pay = dict(payload) if payload is not None else None
        coords = {}
        for piv in [k for k in res if k in self._rows]:
            c = res.get(piv)
            if not c:
                continue
            row, rpay = self._rows[piv]
            coords[piv] = c
            axpy(f, res, f.neg(c), row)
            if pay is not None and rpay is not None:
                axpy(f, pay, f.neg(c), rpay)
        return res, pay, coords

    def contains(self, v: Vector) -> bool:
        return not self.reduce(v)[0]

    def add(self, v: Vector, payload: Optional[Vector] = None) -> bool:
        """Insert ``v``; return False when it was already in the span."""
        f = self.field
        res, pay, _ = self.reduce(v, payload)
        if not res:
            return False
        piv = min(res)
        inv = f.inv(res[piv])
        res = scale(f, inv, res)
        if pay is not None:
            pay = scale(f, inv, pay)
        for k, (row, rpay) in list(self._rows.items()):
            c = row.get(piv)
            if c:
                row = dict(row)
                axpy(f, row, f.neg(c), res)
                if rpay is not None and pay is not None:
                    rpay = dict(rpay)
                    axpy(f, rpay, f.neg(c), pay)
                self._rows[k] = (row, rpay)
        self._rows[piv] = (res, pay)
        return True

    def extend(self, vs: Iterable[Vector]) -> None:
        for v in vs:
            self.add(v)


def kernel(field: FieldChoice, images: List[Vector]) -> List[Vector]:
    """Basis of ``{c : sum_i c[i] * images[i] = 0}`` as dicts ``i -> c_i``.

    Column elimination in input order; the result is deterministic.
    """
    ech = Echelon(field)
    out: List[Vector] = []
    for i, img in enumerate(images):
        res, combo, _ = ech.reduce(img, {i: field.one})
        if res:
            ech.add(res, combo)
        else:
            out.append(combo)
    return out


def rank(field: FieldChoice, vectors: Iterable[Vector]) -> int:
    ech = Echelon(field)
    ech.extend(vectors)
    return len(ech)


def combine(field: FieldChoice, combo: Vector, vectors: List[Vector]) -> Vector:
    """``sum_i combo[i] * vectors[i]``."""
    out: Vector = {}
    for i, c in combo.items():
        axpy(field, out, c, vectors[i])
    return out
