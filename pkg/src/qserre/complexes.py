"""Filtered free modules over A ⊗ Λ with a truncated differential.

The unfolded basis of a complex is the set of keys ``(g, λ, w)`` standing
for ``w ⊗ e^λ · x_g`` with ``w`` a normal-form word. Its filtration degree
is ``p(x_g) - 2 c1(λ)`` and its complementary degree is ``deg(w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .coefficients import (
    AlgebraPresentation,
    CoefficientElement,
    NovikovExponent,
    NovikovSystem,
    Word,
    ExpVec,
)
from .errors import FiltrationError, GradingError, TruncationError, UnknownGenerator
from .linalg import axpy

EXACT = math.inf
Key = Tuple[int, ExpVec, Word]
Order = Union[int, float]


def format_order(k: Order) -> Union[int, str]:
    return "exact" if k == EXACT else int(k)


@dataclass(frozen=True)
class Generator:
    name: str
    p: int
    labels: Mapping[str, object] = dc_field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class DifferentialEntry:
    """One term ``coefficient · word ⊗ e^exponent · target`` of ``d(source)``."""

    source: str
    target: str
    word: Tuple[str, ...] = ()
    exponent: ExpVec = ()
    coefficient: object = 1


class FilteredComplex:
    """Free module on filtered generators with a degree -1 differential.

    ``declared_order`` is the truncation order claimed by the model (an int,
    ``EXACT`` or None). The verified order is always computed; a claim above
    it is rejected.
    """

    def __init__(
        self,
        algebra: AlgebraPresentation,
        novikov: NovikovSystem,
        generators: Sequence[Generator],
        differential: Iterable[DifferentialEntry],
        declared_order: Optional[Order] = None,
    ):
        self.algebra = algebra
        self.novikov = novikov
        self.field = algebra.field
        self.generators = tuple(generators)
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise UnknownGenerator("duplicate generator names")
        self.index = {n: i for i, n in enumerate(names)}
        self.entries = tuple(differential)
        self._d_table: List[Dict[Key, object]] = [dict() for _ in self.generators]
        for entry in self.entries:
            self._add_entry(entry)
        self._dkey_cache: Dict[Tuple[int, Word], List[Tuple[int, ExpVec, Word, object]]] = {}
        self.declared_order = declared_order
        self.truncation_order, self.drops = _verify_order(self)
        if declared_order is not None and declared_order > self.truncation_order:
            bad = min(
                (i for i, d in enumerate(self.drops) if d < 2 * declared_order),
                key=lambda i: (self.drops[i], i),
            )
            raise TruncationError(self.generators[bad].p, self.drops[bad])

    # -- construction ----------------------------------------------------
    def _gen(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UnknownGenerator(f"unknown generator {name!r}") from None

    def _add_entry(self, e: DifferentialEntry) -> None:
        A, N, f = self.algebra, self.novikov, self.field
        s, t = self._gen(e.source), self._gen(e.target)
        exp = _exp(N, e.exponent)
        word = A.word(e.word)
        ps, pt = self.generators[s].p, self.generators[t].p
        fp = pt + N.grade(exp)
        desc = _describe(e, A, N)
        if fp >= ps:
            raise FiltrationError(
                f"entry {desc} of d({e.source}) does not lower the filtration "
                f"({fp} >= {ps})", generator=e.source, entry=desc)
        if fp + A.degree(word) != ps - 1:
            raise GradingError(e.source, desc)
        coeff = f.coerce(e.coefficient)
        row = self._d_table[s]
        for w, cw in A.normal_form(word).items():
            axpy(f, row, f.mul(coeff, cw), {(t, exp, w): f.one})

    # -- unfolded basis --------------------------------------------------
    def fp(self, key: Key) -> int:
        return self.generators[key[0]].p + self.novikov.grade(key[1])

    def q(self, key: Key) -> int:
        return self.algebra.degree(key[2])

    def degree(self, key: Key) -> int:
        return self.fp(key) + self.q(key)

    def key(self, name: str, exponent=None, word: Sequence[str] = ()) -> Key:
        """Basis key of ``word ⊗ e^exponent · name`` (word must be normal)."""
        exp = self.novikov.zero if exponent is None else self.novikov.vector(exponent)
        w = self.algebra.word(word)
        if not self.algebra.is_normal(w):
            raise ValueError(f"word {self.algebra.format_word(w)} is not in normal form")
        return (self._gen(name), exp, w)

    def differential_row(self, g: int) -> Dict[Key, object]:
        return dict(self._d_table[g])

    def d_key(self, key: Key) -> Dict[Key, object]:
        """Differential of one basis key as a sparse vector."""
        g, exp, word = key
        terms = self._dkey_cache.get((g, word))
        if terms is None:
            A, f = self.algebra, self.field
            acc: Dict[Tuple[int, ExpVec, Word], object] = {}
            for (t, e, w), c in self._d_table[g].items():
                for nw, cw in A.normal_form(word + w).items():
                    axpy(f, acc, f.mul(c, cw), {(t, e, nw): f.one})
            terms = [(t, e, w, c) for (t, e, w), c in acc.items()]
            self._dkey_cache[(g, word)] = terms
        if not any(exp):
            return {(t, e, w): c for t, e, w, c in terms}
        return {(t, tuple(a + b for a, b in zip(e, exp)), w): c for t, e, w, c in terms}

    def d_vector(self, vec: Mapping[Key, object]) -> Dict[Key, object]:
        out: Dict[Key, object] = {}
        for k, c in vec.items():
            axpy(self.field, out, c, self.d_key(k))
        return out

    def max_fp(self, vec: Mapping[Key, object]) -> float:
        return max((self.fp(k) for k in vec), default=-math.inf)

    # -- labels ----------------------------------------------------------
    def format_key(self, key: Key) -> str:
        g, exp, word = key
        parts = []
        if word:
            parts.append(self.algebra.format_word(word))
        parts.append(self.generators[g].name)
        ex = self.novikov.format_vector(exp)
        if ex:
            parts.append(f"e^{{{ex}}}")
        return "·".join(parts)

    def format_vector(self, vec: Mapping[Key, object]) -> str:
        if not vec:
            return "0"
        one = self.field.one
        out = []
        for k in sorted(vec):
            c = vec[k]
            label = self.format_key(k)
            out.append(label if c == one else f"{c}*{label}")
        return " + ".join(out)

    def shift_key(self, key: Key, beta: ExpVec) -> Key:
        return (key[0], tuple(a + b for a, b in zip(key[1], beta)), key[2])

    @property
    def c_min(self) -> int:
        return self.novikov.c_min

    def signature(self) -> tuple:
        return (
            self.algebra.signature(),
            self.novikov.signature(),
            tuple((g.name, g.p) for g in self.generators),
            tuple(tuple(sorted(r.items())) for r in self._d_table),
        )


def _exp(N: NovikovSystem, spec) -> ExpVec:
    if spec is None or (not isinstance(spec, str) and len(spec) == 0):
        return N.zero
    return N.vector(spec)


def _describe(e: DifferentialEntry, A: AlgebraPresentation, N: NovikovSystem) -> str:
    exp = _exp(N, e.exponent)
    word = "·".join(e.word) if e.word else "1"
    ex = N.format_vector(exp)
    return f"{e.coefficient}*{word}·{e.target}" + (f"·e^{{{ex}}}" if ex else "")


def _verify_order(C: FilteredComplex) -> Tuple[Order, List[float]]:
    drops = []
    for i, g in enumerate(C.generators):
        dd = C.d_vector(C.d_key((i, C.novikov.zero, ())))
        drops.append(g.p - C.max_fp(dd))
    k = min((int(d) // 2 for d in drops if d != math.inf), default=EXACT)
    return k, drops


def check_truncated_order(C: FilteredComplex) -> Order:
    """Largest k with d∘d dropping filtration by at least 2k on every generator."""
    return _verify_order(C)[0]


class Element:
    """A finite combination of unfolded basis keys of a complex."""

    __slots__ = ("complex", "terms")

    def __init__(self, C: FilteredComplex, terms: Mapping[Key, object]):
        self.complex = C
        self.terms = {k: c for k, c in terms.items() if c}

    @classmethod
    def generator(cls, C: FilteredComplex, name: str, coefficient: Optional[CoefficientElement] = None):
        g = C._gen(name)
        if coefficient is None:
            return cls(C, {(g, C.novikov.zero, ()): C.field.one})
        return cls(C, {(g, e, w): c for (w, e), c in coefficient.terms.items()})

    def times(self, c: CoefficientElement) -> "Element":
        """Left multiplication ``c · self``."""
        A, f = self.complex.algebra, self.complex.field
        out: Dict[Key, object] = {}
        for (w, e), cc in c.terms.items():
            for (g, exp, word), cv in self.terms.items():
                ne = tuple(a + b for a, b in zip(e, exp))
                for nw, cw in A.normal_form(w + word).items():
                    axpy(f, out, f.mul(f.mul(cc, cv), cw), {(g, ne, nw): f.one})
        return Element(self.complex, out)

    def __add__(self, other: "Element") -> "Element":
        out = dict(self.terms)
        axpy(self.complex.field, out, self.complex.field.one, other.terms)
        return Element(self.complex, out)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def filtration(self) -> float:
        return self.complex.max_fp(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Element) and other.complex is self.complex and other.terms == self.terms

    def __repr__(self) -> str:
        return self.complex.format_vector(self.terms)


def apply_d(C: FilteredComplex, v: Element) -> Element:
    """``d`` extended linearly over A ⊗ Λ (the coefficient ring has no internal differential)."""
    if v.complex is not C:
        for g, _, _ in v.terms:
            if g >= len(C.generators):
                raise UnknownGenerator(f"generator index {g} not in complex")
    return Element(C, C.d_vector(v.terms))


def unfold_generators(
    C: FilteredComplex, window: Tuple[int, int], E_max=None
) -> List[Tuple[Generator, NovikovExponent]]:
    """Pairs ``(x, λ)`` with ``p(x) - 2c1(λ)`` in the window and ``|ω(λ)| <= E_max``."""
    from .fields import parse_rational

    lo, hi = window
    energy = None if E_max is None else parse_rational(E_max)
    out = []
    for g in C.generators:
        for c in range(math.ceil((g.p - hi) / 2), math.floor((g.p - lo) / 2) + 1):
            for v in C.novikov.exponents_with_c1(c, energy):
                out.append((g, C.novikov.exponent(v)))
    order = {g.name: i for i, g in enumerate(C.generators)}
    out.sort(key=lambda t: (order[t[0].name], t[1].vector))
    return out


def build_complex(model) -> FilteredComplex:
    """Build and validate a complex from a model document or parsed model."""
    from .model import Model

    if not isinstance(model, Model):
        model = Model.from_dict(model)
    return model.complex()
