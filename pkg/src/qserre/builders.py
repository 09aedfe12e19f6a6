"""Complexes from combinatorial geometric data.

Two constructions: the quantized Morse complex assembled from a Morse
table, a classical Serre ``d²₀`` table and binary Gromov–Witten counts; and
the splitting of page differentials by degree over the base of a fibration,
from which the Seidel endomorphism is recovered.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .coefficients import AlgebraPresentation, ExpVec, NovikovSystem
from .complexes import DifferentialEntry, FilteredComplex, Generator, Key, _exp
from .engine.pages import DrMatrix, NotInBlock, PageBlock, _restrict_fp, compute_page
from .engine.views import Window
from .errors import GateViolation, GradingError, ShapeMismatch, UnlabeledClass
from .fields import parse_rational
from .linalg import axpy


def dimension_gate(ix: int, iy: int, c1: int, c_min: int) -> bool:
    """Is ``1 <= ix - iy + 2c1 <= 2c_min - 1``?"""
    gap = ix - iy + 2 * c1
    return 1 <= gap <= 2 * c_min - 1


@dataclass(frozen=True)
class CriticalPoint:
    name: str
    index: int
    value: Optional[object] = None


@dataclass
class MorseData:
    critical_points: List[CriticalPoint]
    d_morse: List[Tuple[str, str, object]] = dc_field(default_factory=list)
    serre_d2: List[Tuple[str, str, Tuple[str, ...], object]] = dc_field(default_factory=list)

    def index_of(self, name: str) -> int:
        for cp in self.critical_points:
            if cp.name == name:
                return cp.index
        raise GradingError(name, "unknown critical point")


@dataclass(frozen=True)
class GWEntry:
    x: str
    y: str
    exponent: Mapping[str, int]
    count: object = 1
    loop_class: Tuple[str, ...] = ()


def build_quantized_morse(
    m: MorseData,
    g: Sequence[GWEntry],
    A: AlgebraPresentation,
    N: NovikovSystem,
    c_min: Optional[int] = None,
) -> FilteredComplex:
    """d = d_Morse ⊗ 1 + d²₀ + Σ GW_α(x, y) [α] e^α y, with truncation order c_min."""
    c_min = N.c_min if c_min is None else c_min
    entries: List[DifferentialEntry] = []
    for src, tgt, c in m.d_morse:
        if m.index_of(src) - m.index_of(tgt) != 1:
            raise GradingError(src, f"Morse differential {src} -> {tgt} must lower the index by one")
        entries.append(DifferentialEntry(src, tgt, (), N.zero, c))
    for src, tgt, word, c in m.serre_d2:
        deg = A.degree(A.word(word))
        if m.index_of(tgt) + deg != m.index_of(src) - 1:
            raise GradingError(src, f"Serre entry {'·'.join(word)}·{tgt} has the wrong degree")
        if not dimension_gate(m.index_of(src), m.index_of(tgt), 0, c_min):
            raise GateViolation(f"serre {src}->{tgt}")
        entries.append(DifferentialEntry(src, tgt, tuple(word), N.zero, c))
    for e in g:
        exp = N.vector(dict(e.exponent))
        c1 = N.c1(exp)
        ix, iy = m.index_of(e.x), m.index_of(e.y)
        desc = f"GW({e.x}, {e.y}; {N.format_vector(exp) or '0'})"
        if ix - iy + 2 * c1 - 2 != 0:
            raise GateViolation(desc, f"{desc} fails i(x) - i(y) + 2c1 - 2 = 0")
        if not dimension_gate(ix, iy, c1, c_min):
            raise GateViolation(desc)
        if A.degree(A.word(e.loop_class)) != 1:
            raise GateViolation(desc, f"{desc}: the loop class [α] must have degree 1")
        entries.append(DifferentialEntry(e.x, e.y, tuple(e.loop_class), exp, e.count))
    gens = [Generator(cp.name, cp.index) for cp in m.critical_points]
    return FilteredComplex(A, N, gens, entries, c_min)


def morse_data_from_doc(doc: Mapping) -> Tuple[MorseData, List[GWEntry]]:
    morse = doc.get("morse")
    if morse is None:
        raise GateViolation("morse", "model has no morse section")
    cps = [CriticalPoint(c["name"], c["index"], c.get("value")) for c in morse["critical_points"]]
    dm = [(e["source"], e["target"], e.get("coefficient", 1)) for e in morse.get("d_morse", [])]
    sd = [(e["source"], e["target"], tuple(e["monomial"]), e.get("coefficient", 1)) for e in doc.get("serre_d2", [])]
    gw = [GWEntry(e["x"], e["y"], e["class"], e.get("count", 1), tuple(e["loop_class"])) for e in doc.get("gw", [])]
    return MorseData(cps, dm, sd), gw


_COPIED = ("morse", "gw", "serre_d2", "fibration_labels", "geometry", "homology_of_M")


def build_morse_model(doc: Mapping) -> Dict:
    """Model document of the quantized Morse complex built from ``doc``'s tables."""
    from .model import Model, canonicalize

    src = Model(dict(doc, generators=doc.get("generators", []), differential=doc.get("differential", [])))
    md, gw = morse_data_from_doc(src.doc)
    C = build_quantized_morse(md, gw, src.algebra, src.novikov)
    N = src.novikov
    diff = []
    for e in C.entries:
        exp = _exp(N, e.exponent)
        diff.append({
            "source": e.source,
            "target": e.target,
            "monomial": list(e.word),
            "exponent": {n: v for n, v in zip(N.names, exp) if v},
            "coefficient": str(src.field.coerce(e.coefficient)),
        })
    out = {
        "schema_version": src.doc["schema_version"],
        "field": src.doc["field"],
        "algebra": src.doc["algebra"],
        "novikov": src.doc["novikov"],
        "generators": [{"name": cp.name, "p": cp.index} for cp in md.critical_points],
        "differential": diff,
        "truncation_order": C.truncation_order if C.declared_order is None else C.declared_order,
    }
    for name in _COPIED:
        if name in src.doc:
            out[name] = src.doc[name]
    return canonicalize(out)


# ---------------------------------------------------------------------------
# Seidel decomposition
# ---------------------------------------------------------------------------

def base_degree(labels: Mapping[str, int], N: NovikovSystem, exp: ExpVec) -> int:
    return sum(n * labels[name] for n, name in zip(exp, N.names))


def _check_labels(C: FilteredComplex, labels: Mapping[str, int]) -> None:
    missing = [n for n in C.novikov.names if n not in labels]
    if missing:
        raise UnlabeledClass(f"Novikov classes without a base degree: {', '.join(missing)}", classes=missing)
    extra = [n for n in labels if n not in C.novikov.names]
    if extra:
        raise UnlabeledClass(f"labels for unknown classes: {', '.join(extra)}", classes=extra)


@dataclass
class ComponentMatrix:
    """One base degree's share of d^r at one bidegree.

    ``vectors[i]`` is the component of the image of representative ``i``
    in ``Gr_{p-r}``, reduced modulo the target's boundaries. ``page`` holds
    page coordinates when every vector is an r-cycle.
    """

    source: Tuple[int, int]
    target: Tuple[int, int]
    vectors: List[Dict[Key, object]]
    page: Optional[DrMatrix]

    @property
    def well_defined(self) -> bool:
        return self.page is not None


@dataclass
class SeidelDecomposition:
    r: int
    labels: Dict[str, int]
    components: Dict[int, Dict[Tuple[int, int], ComponentMatrix]]
    differential: Dict[Tuple[int, int], DrMatrix]
    reduced_images: Dict[Tuple[int, int], List[Dict[Key, object]]]
    page: object

    def reassembles(self) -> bool:
        """Σ_j d^{r;j} = d^r, on reduced vectors and on page coordinates."""
        f = self.page.complex.field
        for pq, images in self.reduced_images.items():
            for i, img in enumerate(images):
                acc: Dict[Key, object] = {}
                for comp in self.components.values():
                    axpy(f, acc, f.one, comp[pq].vectors[i])
                if acc != img:
                    return False
            if all(comp[pq].well_defined for comp in self.components.values()):
                total: Dict = {}
                for comp in self.components.values():
                    axpy(f, total, f.one, comp[pq].page.entries)
                if total != self.differential[pq].entries:
                    return False
        return True


def seidel_decompose(
    C: FilteredComplex, labels: Mapping[str, int], r: int, w: Window, **kwargs
) -> SeidelDecomposition:
    """Split d^r by the base degree of the Novikov exponent of each chain-level entry."""
    _check_labels(C, labels)
    N, f = C.novikov, C.field
    page = compute_page(C, r, w, **kwargs)
    view = page.engine.view
    parts: Dict[int, Dict[int, Dict[Key, object]]] = {}
    for g in range(len(C.generators)):
        for key, c in C.differential_row(g).items():
            j = base_degree(labels, N, key[1])
            parts.setdefault(j, {}).setdefault(g, {})[key] = c
    degrees = sorted(parts) or [0]

    def d_part(j: int, vec: Mapping[Key, object]) -> Dict[Key, object]:
        out: Dict[Key, object] = {}
        table = parts.get(j, {})
        A = C.algebra
        for (g, exp, word), c in vec.items():
            for (t, e, w_), ce in table.get(g, {}).items():
                ne = tuple(a + b for a, b in zip(e, exp))
                for nw, cw in A.normal_form(word + w_).items():
                    k = (t, ne, nw)
                    if view.bounded and not view.in_view(k):
                        continue
                    axpy(f, out, f.mul(f.mul(c, ce), cw), {k: f.one})
        return out

    components = {j: {} for j in degrees}
    reduced_images = {}
    for (p, q) in w.bidegrees():
        src = page.block(p, q)
        target: PageBlock = page.block(p - r, q + r - 1)
        whole = []
        for _, lift in src.reps:
            t = _restrict_fp(C, view.d_vector(lift), p - r, p - r)
            whole.append(target.reduce_boundary(t)[0])
        reduced_images[(p, q)] = whole
        for j in degrees:
            vecs, cols, ok = [], [], True
            for _, lift in src.reps:
                t = _restrict_fp(C, d_part(j, lift), p - r, p - r)
                vecs.append(target.reduce_boundary(t)[0])
                if ok:
                    try:
                        cols.append(target.coords(t))
                    except NotInBlock:
                        ok = False
            mat = DrMatrix.from_columns(f, (p, q), (p - r, q + r - 1), target.dim, cols) if ok else None
            components[j][(p, q)] = ComponentMatrix((p, q), (p - r, q + r - 1), vecs, mat)
    return SeidelDecomposition(r, dict(labels), components, dict(page.differential), reduced_images, page)


@dataclass(frozen=True)
class FiberData:
    """How fiber homology classes sit in a fibration-style complex.

    ``pairs`` lists ``(fiber class, minus generator, plus generator)``; the
    plus copy sits two filtration steps above the minus copy. ``loop`` is
    the degree-one algebra generator and ``section`` the class of base degree one.
    """

    pairs: Tuple[Tuple[str, str, str], ...]
    loop: str
    section: str

    @classmethod
    def from_complex(cls, C: FilteredComplex, labels: Mapping[str, int]) -> "FiberData":
        groups: Dict[str, Dict[str, str]] = {}
        for g in C.generators:
            fib = g.labels.get("fiber")
            sheet = g.labels.get("sheet")
            if fib is None:
                continue
            if sheet not in ("minus", "plus"):
                raise ShapeMismatch(f"generator {g.name}: sheet label must be 'minus' or 'plus'")
            groups.setdefault(str(fib), {})[sheet] = g.name
        pairs = []
        for fib in groups:
            pair = groups[fib]
            if set(pair) != {"minus", "plus"}:
                raise ShapeMismatch(f"fiber class {fib} needs both a minus and a plus generator")
            pairs.append((fib, pair["minus"], pair["plus"]))
        if not pairs:
            raise ShapeMismatch("no generators carry fiber/sheet labels")
        loops = [g.name for g in C.algebra.generators if g.degree == 1]
        if len(loops) != 1:
            raise ShapeMismatch("the algebra must have exactly one degree-one generator")
        sections = [n for n in C.novikov.names if labels.get(n) == 1]
        if len(sections) != 1:
            raise ShapeMismatch("exactly one Novikov class must have base degree one")
        return cls(tuple(pairs), loops[0], sections[0])


@dataclass
class SeidelMorphism:
    """Φ as ``entries[(y, x)] = {residual exponent: coefficient}``."""

    classes: Tuple[str, ...]
    entries: Dict[Tuple[str, str], Dict[ExpVec, object]]
    field: object

    def matrix(self) -> List[List[object]]:
        """Field matrix (rows y, columns x); needs all residual exponents zero."""
        n = len(self.classes)
        out = [[self.field.zero] * n for _ in range(n)]
        for (y, x), terms in self.entries.items():
            for exp, c in terms.items():
                if any(exp):
                    raise ShapeMismatch("Φ has Novikov-valued entries; no plain field matrix")
                out[self.classes.index(y)][self.classes.index(x)] = c
        return out

    def is_identity(self) -> bool:
        try:
            m = self.matrix()
        except ShapeMismatch:
            return False
        return all(m[i][j] == (self.field.one if i == j else self.field.zero)
                   for i in range(len(m)) for j in range(len(m)))


def _minus_column(decomp: SeidelDecomposition, C: FilteredComplex, minus: str, j: int = 1):
    page = decomp.page
    key = C.key(minus)
    pq = (C.fp(key), 0)
    if pq not in decomp.components.get(j, {}):
        raise ShapeMismatch(f"bidegree {pq} of {minus} is outside the decomposition window")
    block = page.block(*pq)
    try:
        coords = block.coords({key: C.field.one})
    except NotInBlock:
        raise ShapeMismatch(f"{minus} does not survive to page {decomp.r}") from None
    comp = decomp.components[j][pq]
    f = C.field
    out: Dict[Key, object] = {}
    for i, c in coords.items():
        axpy(f, out, c, comp.vectors[i])
    return out, pq


def seidel_morphism(decomp: SeidelDecomposition, fiber: FiberData) -> SeidelMorphism:
    """Read Φ off d^{2;1}: strip the loop generator and the section class."""
    C = decomp.page.complex
    N, A = C.novikov, C.algebra
    if 1 not in decomp.components:
        decomp.components[1] = {pq: ComponentMatrix(pq, (pq[0] - decomp.r, pq[1] + decomp.r - 1),
                                                    [dict() for _ in range(decomp.page.dim(*pq))], None)
                                for pq in decomp.reduced_images}
    loop = A.word([fiber.loop])
    s0 = N.vector(fiber.section)
    plus_to_class = {plus: fib for fib, _, plus in fiber.pairs}
    classes = tuple(fib for fib, _, _ in fiber.pairs)
    entries: Dict[Tuple[str, str], Dict[ExpVec, object]] = {}
    for fib, minus, _ in fiber.pairs:
        vec, pq = _minus_column(decomp, C, minus)
        for (g, exp, word), c in vec.items():
            name = C.generators[g].name
            if name not in plus_to_class:
                raise ShapeMismatch(f"d^{{2;1}}({minus}) has a term on {name}, not a plus generator")
            if word != loop:
                raise ShapeMismatch(f"d^{{2;1}}({minus}) term on {name} has loop word "
                                    f"{A.format_word(word)}, expected {fiber.loop}")
            residual = tuple(a - b for a, b in zip(exp, s0))
            entries.setdefault((plus_to_class[name], fib), {})[residual] = c
    return SeidelMorphism(classes, entries, C.field)


def reinsert(phi: SeidelMorphism, decomp: SeidelDecomposition, fiber: FiberData) -> bool:
    """Rebuild d^{2;1}(x₋) = Σ Φ_{yx} [loop] y₊ e^{s0} and compare with the decomposition."""
    C = decomp.page.complex
    f, N, A = C.field, C.novikov, C.algebra
    s0 = N.vector(fiber.section)
    loop = A.word([fiber.loop])
    plus_of = {fib: plus for fib, _, plus in fiber.pairs}
    for fib, minus, _ in fiber.pairs:
        expected, pq = _minus_column(decomp, C, minus)
        rebuilt: Dict[Key, object] = {}
        for (y, x), terms in phi.entries.items():
            if x != fib:
                continue
            g = C.index[plus_of[y]]
            for res, c in terms.items():
                axpy(f, rebuilt, c, {(g, tuple(a + b for a, b in zip(res, s0)), loop): f.one})
        target = decomp.page.block(pq[0] - decomp.r, pq[1] + decomp.r - 1)
        if target.reduce_boundary(rebuilt)[0] != expected:
            return False
    return True
