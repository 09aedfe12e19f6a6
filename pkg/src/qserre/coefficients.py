"""Graded coefficient ring R = A ⊗ Λ.

``A`` is a finitely presented graded algebra given by homogeneous rewrite
rules on words in its generators (deg-lex order). ``Λ`` is the Novikov ring
of a free abelian group of classes with Chern number and energy. Everything
is exact: the field is GF(2) or Q.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import ConfluenceFailure, NovikovError, PresentationError
from .fields import FieldChoice
from .linalg import axpy

Word = Tuple[int, ...]
ExpVec = Tuple[int, ...]


@dataclass(frozen=True)
class AlgebraGenerator:
    name: str
    degree: int


class AlgebraPresentation:
    """Graded algebra presented by generators and homogeneous rewrite rules.

    ``relations`` are ``(lhs, rhs)`` with ``lhs`` a word of generator names and
    ``rhs`` a list of ``(word, coefficient)`` strictly smaller than ``lhs``
    in deg-lex order. ``commuting`` pairs add the graded commutation rule
    ``h g -> ±g h`` for ``g`` listed before ``h``.
    """

    def __init__(
        self,
        generators: Sequence[Tuple[str, int]],
        relations: Sequence[Tuple[Sequence[str], Sequence[Tuple[Sequence[str], object]]]] = (),
        commuting: Sequence[Tuple[str, str]] = (),
        field: FieldChoice = FieldChoice.GF2,
    ):
        self.field = field
        self.generators = tuple(AlgebraGenerator(n, int(d)) for n, d in generators)
        self.names = tuple(g.name for g in self.generators)
        if len(set(self.names)) != len(self.names):
            raise PresentationError("duplicate algebra generator names")
        for g in self.generators:
            if g.degree < 1:
                raise PresentationError(
                    f"generator {g.name} has degree {g.degree}; degrees must be positive "
                    "so that each graded piece is finite")
        self._index = {n: i for i, n in enumerate(self.names)}
        self._degrees = tuple(g.degree for g in self.generators)

        rules: Dict[Word, Dict[Word, object]] = {}
        for lhs, rhs in relations:
            lw = self.word(lhs)
            if not lw:
                raise PresentationError("relation with empty left-hand side")
            rv: Dict[Word, object] = {}
            for w, c in rhs:
                ww = self.word(w)
                if self.degree(ww) != self.degree(lw):
                    raise PresentationError(
                        f"relation {self.format_word(lw)} -> ... is not homogeneous")
                if not self.precedes(ww, lw):
                    raise PresentationError(
                        f"term {self.format_word(ww)} is not below {self.format_word(lw)}")
                axpy(field, rv, field.coerce(c), {ww: field.one})
            self._add_rule(rules, lw, rv)
        for g, h in commuting:
            i, j = self._index_of(g), self._index_of(h)
            if i == j:
                raise PresentationError(f"self-commutation flag on {g} is not supported")
            if i > j:
                i, j = j, i
            sign = field.sign(self._degrees[i] * self._degrees[j])
            self._add_rule(rules, (j, i), {(i, j): sign})
        self.rules: Tuple[Tuple[Word, Dict[Word, object]], ...] = tuple(sorted(rules.items()))
        self._nf_cache: Dict[Word, Dict[Word, object]] = {}
        self._basis_cache: Dict[int, Tuple[Word, ...]] = {}
        self._checked_degree = -1
        self._lock = threading.Lock()

    # -- words -----------------------------------------------------------
    def _index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PresentationError(f"unknown algebra generator {name!r}") from None

    def _add_rule(self, rules, lhs: Word, rhs) -> None:
        if lhs in rules:
            raise PresentationError(f"two rules rewrite {self.format_word(lhs)}")
        rules[lhs] = rhs

    def word(self, names: Iterable[str]) -> Word:
        return tuple(self._index_of(n) for n in names)

    def degree(self, word: Word) -> int:
        return sum(self._degrees[i] for i in word)

    def precedes(self, a: Word, b: Word) -> bool:
        """Strict deg-lex comparison ``a < b``."""
        return (self.degree(a), a) < (self.degree(b), b)

    def format_word(self, word: Word) -> str:
        if not word:
            return "1"
        parts: List[str] = []
        i = 0
        while i < len(word):
            j = i
            while j < len(word) and word[j] == word[i]:
                j += 1
            name = self.names[word[i]]
            parts.append(name if j - i == 1 else f"{name}^{j - i}")
            i = j
        return "·".join(parts)

    def signature(self) -> tuple:
        return (self.field, self.generators, tuple((l, tuple(sorted(r.items()))) for l, r in self.rules))

    # -- rewriting -------------------------------------------------------
    def _find_redex(self, word: Word):
        for pos in range(len(word)):
            for lhs, rhs in self.rules:
                if word[pos:pos + len(lhs)] == lhs:
                    return pos, lhs, rhs
        return None

    def normal_form(self, word: Word) -> Dict[Word, object]:
        """Normal form of a word as ``{normal word: coefficient}``."""
        cached = self._nf_cache.get(word)
        if cached is not None:
            return cached
        hit = self._find_redex(word)
        f = self.field
        if hit is None:
            out = {word: f.one}
        else:
            pos, lhs, rhs = hit
            prefix, suffix = word[:pos], word[pos + len(lhs):]
            out = {}
            for w, c in rhs.items():
                axpy(f, out, c, self.normal_form(prefix + w + suffix))
        self._nf_cache[word] = out
        return out

    def reduce(self, vec: Dict[Word, object]) -> Dict[Word, object]:
        out: Dict[Word, object] = {}
        for w, c in vec.items():
            axpy(self.field, out, c, self.normal_form(w))
        return out

    def is_normal(self, word: Word) -> bool:
        return self._find_redex(word) is None

    def multiply_words(self, a: Word, b: Word) -> Dict[Word, object]:
        return self.normal_form(a + b)

    # -- confluence ------------------------------------------------------
    def ambiguities(self):
        """All overlap and inclusion ambiguities ``(word, (i, pos_i), (j, pos_j))``."""
        out = []
        for i, (li, _) in enumerate(self.rules):
            for j, (lj, _) in enumerate(self.rules):
                for k in range(1, min(len(li), len(lj))):
                    if li[-k:] == lj[:k]:
                        out.append((li + lj[k:], (i, 0), (j, len(li) - k)))
                if i != j and len(lj) < len(li):
                    for s in range(len(li) - len(lj) + 1):
                        if li[s:s + len(lj)] == lj:
                            out.append((li, (i, 0), (j, s)))
        return out

    def _one_step(self, word: Word, rule: int, pos: int) -> Dict[Word, object]:
        lhs, rhs = self.rules[rule]
        out: Dict[Word, object] = {}
        for w, c in rhs.items():
            axpy(self.field, out, c, self.normal_form(word[:pos] + w + word[pos + len(lhs):]))
        return out

    def check_confluence(self, up_to_degree: Optional[int] = None) -> None:
        """Resolve every ambiguity of degree ``<= up_to_degree`` (all if None).

        Raises :class:`ConfluenceFailure` on the first unresolvable one.
        """
        with self._lock:
            if up_to_degree is not None and up_to_degree <= self._checked_degree:
                return
            amb = sorted(self.ambiguities(), key=lambda a: (self.degree(a[0]), a[0]))
            top = -1
            for word, (i, pi), (j, pj) in amb:
                deg = self.degree(word)
                if up_to_degree is not None and deg > up_to_degree:
                    break
                if self._one_step(word, i, pi) != self._one_step(word, j, pj):
                    pair = (self.format_word(self.rules[i][0]), self.format_word(self.rules[j][0]))
                    raise ConfluenceFailure(deg, pair)
                top = max(top, deg)
            if up_to_degree is None:
                self._checked_degree = math.inf
            else:
                self._checked_degree = max(self._checked_degree, up_to_degree)

    # -- bases -----------------------------------------------------------
    def basis(self, degree: int) -> Tuple[Word, ...]:
        """Normal-form words of the given degree, in deg-lex order."""
        if degree < 0:
            return ()
        cached = self._basis_cache.get(degree)
        if cached is not None:
            return cached
        self.check_confluence(degree)
        lhs_list = [l for l, _ in self.rules]
        out: List[Word] = []

        def grow(word: Word, remaining: int) -> None:
            if remaining == 0:
                out.append(word)
                return
            for i, d in enumerate(self._degrees):
                if d > remaining:
                    continue
                w = word + (i,)
                if any(len(l) <= len(w) and w[-len(l):] == l for l in lhs_list):
                    continue
                grow(w, remaining - d)

        grow((), degree)
        result = tuple(out)
        self._basis_cache[degree] = result
        return result

    def element(self, terms) -> "AlgebraElement":
        """Build an element from ``{names-tuple: coeff}`` or ``[(names, coeff)]``."""
        items = terms.items() if isinstance(terms, dict) else terms
        vec: Dict[Word, object] = {}
        for names, c in items:
            axpy(self.field, vec, self.field.coerce(c), {self.word(names): self.field.one})
        return AlgebraElement(self, self.reduce(vec))

    def monomial(self, *names: str) -> "AlgebraElement":
        return AlgebraElement(self, self.normal_form(self.word(names)))

    @property
    def one(self) -> "AlgebraElement":
        return AlgebraElement(self, {(): self.field.one})


class AlgebraElement:
    """Immutable field-linear combination of normal-form words."""

    __slots__ = ("algebra", "_terms")

    def __init__(self, algebra: AlgebraPresentation, terms: Dict[Word, object]):
        self.algebra = algebra
        self._terms = {w: c for w, c in terms.items() if c}

    @property
    def terms(self) -> Dict[Word, object]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> Optional[int]:
        degs = {self.algebra.degree(w) for w in self._terms}
        if len(degs) > 1:
            raise ValueError("inhomogeneous element has no single degree")
        return degs.pop() if degs else None

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return multiply(self, other)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        out = dict(self._terms)
        axpy(self.algebra.field, out, self.algebra.field.one, other._terms)
        return AlgebraElement(self.algebra, out)

    def __eq__(self, other) -> bool:
        return isinstance(other, AlgebraElement) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        f = self.algebra.field
        parts = []
        for w in sorted(self._terms):
            c = self._terms[w]
            word = self.algebra.format_word(w)
            parts.append(word if c == f.one else f"{c}*{word}")
        return " + ".join(parts)


def algebra_basis(A: AlgebraPresentation, degree: int) -> List[AlgebraElement]:
    """Deterministic ordered basis of ``A`` in ``degree``."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    return [AlgebraElement(A, {w: A.field.one}) for w in A.basis(degree)]


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    A = a.algebra
    f = A.field
    out: Dict[Word, object] = {}
    for wa, ca in a._terms.items():
        for wb, cb in b._terms.items():
            A.check_confluence(A.degree(wa) + A.degree(wb))
            axpy(f, out, f.mul(ca, cb), A.multiply_words(wa, wb))
    return AlgebraElement(A, out)


# ---------------------------------------------------------------------------
# Novikov ring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NovikovClass:
    name: str
    c1: int
    omega: Fraction


class NovikovSystem:
    """The group of Novikov exponents with its Chern and energy homomorphisms.

    Exponents are integer vectors over ``classes``. The pair (c1, omega) must be
    injective on the lattice; this is what makes every window of the unfolded
    complex finite.
    """

    def __init__(
        self,
        classes: Sequence[Tuple[str, int, object]],
        c_min: int,
        alpha_min=None,
        monotone: bool = False,
        rho=None,
    ):
        from .fields import parse_rational

        self.classes = tuple(NovikovClass(n, int(c), parse_rational(w)) for n, c, w in classes)
        self.names = tuple(c.name for c in self.classes)
        if len(set(self.names)) != len(self.names):
            raise NovikovError("duplicate Novikov class names")
        self.rank = len(self.classes)
        self.monotone = bool(monotone)
        self.rho = parse_rational(rho) if rho is not None else None
        if self.monotone:
            if self.rho is None or self.rho <= 0:
                raise NovikovError("monotone system needs a positive rho")
            for c in self.classes:
                if c.omega != self.rho * c.c1:
                    raise NovikovError(
                        f"class {c.name}: omega={c.omega} but rho*c1={self.rho * c.c1}")
        self.c_min = int(c_min)
        if self.c_min < 1:
            raise NovikovError("c_min must be at least 1")
        self._check_injective()
        if alpha_min is None:
            self.alpha_min: Optional[ExpVec] = None
        else:
            self.alpha_min = self.vector(alpha_min)
            if self.c1(self.alpha_min) != self.c_min:
                raise NovikovError(
                    f"alpha_min has c1={self.c1(self.alpha_min)}, expected c_min={self.c_min}")
        g = 0
        for c in self.classes:
            g = math.gcd(g, c.c1)
        self._c1_gcd = g

    def _check_injective(self) -> None:
        if self.rank == 0:
            return
        if self.rank > 2:
            raise NovikovError(
                "the (c1, omega) map must be injective on the class lattice; "
                "at most two independent classes are supported")
        if self.rank == 1:
            c = self.classes[0]
            if c.c1 == 0 and c.omega == 0:
                raise NovikovError(f"class {c.name} has c1 = omega = 0")
            return
        a, b = self.classes
        if a.c1 * b.omega - b.c1 * a.omega == 0:
            raise NovikovError(
                "classes are dependent under (c1, omega); quotient them before use")

    # -- exponents -------------------------------------------------------
    @property
    def zero(self) -> ExpVec:
        return (0,) * self.rank

    def vector(self, spec) -> ExpVec:
        """Coerce a name, ``{name: n}`` dict, vector, or exponent to a vector."""
        if isinstance(spec, NovikovExponent):
            return spec.vector
        if isinstance(spec, str):
            spec = {spec: 1}
        if isinstance(spec, dict):
            v = [0] * self.rank
            for name, n in spec.items():
                if name not in self.names:
                    raise NovikovError(f"unknown Novikov class {name!r}")
                if isinstance(n, bool) or not isinstance(n, int):
                    raise NovikovError(f"exponent of {name} must be an integer")
                v[self.names.index(name)] += n
            return tuple(v)
        v = tuple(int(x) for x in spec)
        if len(v) != self.rank:
            raise NovikovError(f"exponent vector {v} has wrong length")
        return v

    def exponent(self, spec) -> "NovikovExponent":
        return NovikovExponent(self, self.vector(spec))

    def c1(self, v: ExpVec) -> int:
        return sum(n * c.c1 for n, c in zip(v, self.classes))

    def omega(self, v: ExpVec) -> Fraction:
        return sum((n * c.omega for n, c in zip(v, self.classes)), Fraction(0))

    def grade(self, v: ExpVec) -> int:
        return -2 * self.c1(v)

    @property
    def omega_min(self) -> Fraction:
        if self.alpha_min is not None:
            return self.omega(self.alpha_min)
        if self.rho is not None:
            return self.rho * self.c_min
        raise NovikovError("omega_min needs alpha_min or rho")

    def has_degree(self, q: int) -> bool:
        """True when Λ has a nonzero homogeneous piece in degree ``q``."""
        if self._c1_gcd == 0:
            return q == 0
        return q % (2 * self._c1_gcd) == 0

    def needs_energy_bound(self) -> bool:
        """True when fixing c1 does not pin down finitely many exponents."""
        if self.rank == 0:
            return False
        return self.rank == 2 or self.classes[0].c1 == 0

    def exponents_with_c1(self, c: int, energy: Optional[Fraction]) -> List[ExpVec]:
        """All exponents with ``c1 = c`` and ``|omega| <= energy`` (sorted)."""
        if self.rank == 0:
            return [()] if c == 0 else []
        if self.rank == 1:
            cl = self.classes[0]
            if cl.c1 != 0:
                if c % cl.c1:
                    return []
                k = c // cl.c1
                if energy is not None and abs(k * cl.omega) > energy:
                    return []
                return [(k,)]
            if c != 0:
                return []
            if energy is None:
                raise NovikovError("an energy cutoff is required for a class with c1 = 0")
            kmax = math.floor(energy / abs(cl.omega))
            return [(k,) for k in range(-kmax, kmax + 1)]
        if energy is None:
            raise NovikovError("an energy cutoff is required for rank-2 exponent lattices")
        a, b = self.classes
        g, x0, y0 = _ext_gcd(a.c1, b.c1)
        if g == 0:
            return [(0, 0)] if c == 0 else []
        if c % g:
            return []
        px, py = x0 * (c // g), y0 * (c // g)
        sx, sy = b.c1 // g, -a.c1 // g
        w0 = px * a.omega + py * b.omega
        dw = sx * a.omega + sy * b.omega
        lo = math.ceil((-energy - w0) / dw) if dw > 0 else math.ceil((energy - w0) / dw)
        hi = math.floor((energy - w0) / dw) if dw > 0 else math.floor((-energy - w0) / dw)
        return sorted((px + t * sx, py + t * sy) for t in range(lo, hi + 1))

    def format_vector(self, v: ExpVec) -> str:
        parts = []
        for n, name in zip(v, self.names):
            if n == 0:
                continue
            if n == 1:
                parts.append(f"+{name}")
            elif n == -1:
                parts.append(f"-{name}")
            else:
                parts.append(f"{n:+d}{name}")
        text = "".join(parts)
        return text[1:] if text.startswith("+") else text

    def signature(self) -> tuple:
        return (self.classes, self.c_min, self.alpha_min, self.monotone, self.rho)


def _ext_gcd(a: int, b: int):
    if b == 0:
        if a == 0:
            return 0, 0, 0
        return abs(a), (1 if a > 0 else -1), 0
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


@dataclass(frozen=True)
class NovikovExponent:
    system: NovikovSystem
    vector: ExpVec

    @property
    def c1(self) -> int:
        return self.system.c1(self.vector)

    @property
    def omega(self) -> Fraction:
        return self.system.omega(self.vector)

    @property
    def grading(self) -> int:
        return self.system.grade(self.vector)

    def __add__(self, other: "NovikovExponent") -> "NovikovExponent":
        return NovikovExponent(self.system, tuple(a + b for a, b in zip(self.vector, other.vector)))

    def __neg__(self) -> "NovikovExponent":
        return NovikovExponent(self.system, tuple(-a for a in self.vector))

    def __repr__(self) -> str:
        text = self.system.format_vector(self.vector)
        return f"e^{{{text}}}" if text else "e^0"


def novikov_grade(e: NovikovExponent) -> int:
    """Degree of ``e^λ``: ``-2 c1(λ)``."""
    return -2 * e.c1


# ---------------------------------------------------------------------------
# R = A ⊗ Λ
# ---------------------------------------------------------------------------

class CoefficientRing:
    def __init__(self, algebra: AlgebraPresentation, novikov: NovikovSystem):
        self.algebra = algebra
        self.novikov = novikov
        self.field = algebra.field

    def element(self, terms) -> "CoefficientElement":
        """``terms``: iterable of ``(names, exponent spec, coefficient)``."""
        f = self.field
        vec: Dict[Tuple[Word, ExpVec], object] = {}
        for names, exp, c in terms:
            ev = self.novikov.vector(exp)
            for w, cw in self.algebra.normal_form(self.algebra.word(names)).items():
                axpy(f, vec, f.mul(f.coerce(c), cw), {(w, ev): f.one})
        return CoefficientElement(self, vec)

    @property
    def one(self) -> "CoefficientElement":
        return CoefficientElement(self, {((), self.novikov.zero): self.field.one})

    def signature(self) -> tuple:
        return (self.algebra.signature(), self.novikov.signature())


class CoefficientElement:
    """Finite sum of ``coeff · word ⊗ e^λ`` with normal-form words."""

    __slots__ = ("ring", "_terms")

    def __init__(self, ring: CoefficientRing, terms):
        self.ring = ring
        self._terms = {k: c for k, c in terms.items() if c}

    @property
    def terms(self):
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degrees(self) -> set:
        A, N = self.ring.algebra, self.ring.novikov
        return {A.degree(w) + N.grade(e) for w, e in self._terms}

    @property
    def degree(self) -> Optional[int]:
        degs = self.degrees()
        if len(degs) > 1:
            raise ValueError("inhomogeneous coefficient has no single degree")
        return degs.pop() if degs else None

    def __mul__(self, other: "CoefficientElement") -> "CoefficientElement":
        return tensor_multiply(self, other)

    def __add__(self, other: "CoefficientElement") -> "CoefficientElement":
        out = dict(self._terms)
        axpy(self.ring.field, out, self.ring.field.one, other._terms)
        return CoefficientElement(self.ring, out)

    def __eq__(self, other) -> bool:
        return isinstance(other, CoefficientElement) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        A, N, f = self.ring.algebra, self.ring.novikov, self.ring.field
        parts = []
        for (w, e) in sorted(self._terms):
            c = self._terms[(w, e)]
            s = A.format_word(w)
            ex = N.format_vector(e)
            if ex:
                s = f"{s}⊗e^{{{ex}}}"
            parts.append(s if c == f.one else f"{c}*{s}")
        return " + ".join(parts)


def tensor_multiply(x: CoefficientElement, y: CoefficientElement) -> CoefficientElement:
    """Product in A ⊗ Λ: words multiply and reduce, exponents add."""
    R = x.ring
    A, f = R.algebra, R.field
    out: Dict[Tuple[Word, ExpVec], object] = {}
    for (wa, ea), ca in x._terms.items():
        for (wb, eb), cb in y._terms.items():
            A.check_confluence(A.degree(wa) + A.degree(wb))
            e = tuple(p + q for p, q in zip(ea, eb))
            c = f.mul(ca, cb)
            for w, cw in A.multiply_words(wa, wb).items():
                axpy(f, out, f.mul(c, cw), {(w, e): f.one})
    return CoefficientElement(R, out)


def energy_truncate(x: CoefficientElement, E_max) -> CoefficientElement:
    """Drop every term whose exponent has energy above ``E_max``."""
    from .fields import parse_rational

    bound = parse_rational(E_max)
    if bound < 0:
        raise ValueError("E_max must be non-negative")
    N = x.ring.novikov
    return CoefficientElement(x.ring, {k: c for k, c in x._terms.items() if N.omega(k[1]) <= bound})
