"""Decision procedures on top of the engine.

* ``dsq_classes`` / ``monodromy_check``: the (d^k)² obstruction and its
  conformity with the survival analysis (only ``S(x, x#α_min)`` counts).
* ``orbit_criterion_perfect`` and ``orbit_criterion_dsq``: the two periodic
  orbit criteria, each returning a verdict with a full trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .complexes import EXACT, FilteredComplex, Key
from .engine.pages import NotInBlock, Page, _restrict_fp, compute_page
from .engine.views import Window
from .errors import InternalInconsistency, MissingGeometry, PageOutOfRange, SpacingViolation
from .fields import parse_rational
from .linalg import axpy

SATISFIED = "Satisfied"

PERFECT_SCOPE = ("every self-indexed perfect Morse function on the modeled manifold "
                 "has a non-trivial closed characteristic")
DSQ_SCOPE = "every self-indexed Morse function on the modeled manifold has a closed characteristic"


# ---------------------------------------------------------------------------
# (d^k)^2
# ---------------------------------------------------------------------------

@dataclass
class DsqClass:
    source: Tuple[int, int]
    index: int
    source_label: str
    target: Tuple[int, int]
    coords: Dict[int, object]
    vector: Dict[Key, object]
    label: str
    by_generator: Dict[str, Dict[Key, object]]
    raw: Dict[Key, object]


def _dsq_order(C: FilteredComplex) -> int:
    if C.truncation_order != EXACT:
        return int(C.truncation_order)
    if C.declared_order not in (None, EXACT):
        return int(C.declared_order)
    return C.novikov.c_min


def _class_vector(page: Page, p: int, q: int, coords: Mapping[int, object]) -> Dict[Key, object]:
    f = page.complex.field
    out: Dict[Key, object] = {}
    reps = page.block(p, q).reps
    for i, c in coords.items():
        axpy(f, out, c, reps[i][0])
    return out


def _classes_of_square(page: Page, w: Window) -> List[DsqClass]:
    C = page.complex
    f, r = C.field, page.r
    out: List[DsqClass] = []
    view = page.engine.view
    for (p, q) in w.bidegrees():
        sq = page.d_squared(p, q)
        if sq.is_zero():
            continue
        first = page.d(p, q)
        mid = page.block(p - r, q + r - 1)
        tp, tq = p - 2 * r, q + 2 * r - 2
        for i in range(sq.cols):
            col = sq.column(i)
            if not col:
                continue
            vec = _class_vector(page, tp, tq, col)
            groups: Dict[str, Dict[Key, object]] = {}
            for k, c in vec.items():
                groups.setdefault(C.generators[k[0]].name, {})[k] = c
            raw: Dict[Key, object] = {}
            for j, c in first.column(i).items():
                t = _restrict_fp(C, view.d_vector(mid.reps[j][1]), tp, tp)
                axpy(f, raw, c, t)
            out.append(DsqClass(
                source=(p, q),
                index=i,
                source_label=C.format_vector(page.block(p, q).reps[i][0]),
                target=(tp, tq),
                coords=col,
                vector=vec,
                label=C.format_vector(vec),
                by_generator=groups,
                raw=raw,
            ))
    return out


def dsq_classes(C: FilteredComplex, w: Window, *, k: Optional[int] = None, **kwargs) -> List[DsqClass]:
    """Basis classes of E^k whose (d^k)² image is nonzero, decomposed by target generator."""
    k = _dsq_order(C) if k is None else k
    page = compute_page(C, k, w, **kwargs)
    return _classes_of_square(page, w)


@dataclass
class Witness:
    generator: str
    source: str
    target: str
    surviving_class: str
    source_bidegree: Tuple[int, int]
    target_bidegree: Tuple[int, int]
    dsq: DsqClass


@dataclass
class MonodromyReport:
    flag: bool
    k: int
    witnesses: List[Witness]
    discarded: List[Tuple[str, str, str]]
    classes: List[DsqClass]
    page: Page


def _conforming_sources(C: FilteredComplex, page: Page, cls: DsqClass) -> List[Tuple[Key, Key]]:
    """Pairs (source key, target key) with target = source·e^{α_min} on the same generator."""
    N = C.novikov
    if N.alpha_min is None:
        raise InternalInconsistency("the Novikov system declares no alpha_min")
    src_top = page.block(*cls.source).reps[cls.index][0]
    pairs = []
    for tk in cls.vector:
        for sk in src_top:
            if tk[0] == sk[0] and tuple(a - b for a, b in zip(tk[1], sk[1])) == N.alpha_min:
                pairs.append((sk, tk))
                break
        else:
            return []
    return pairs


def monodromy_check(C: FilteredComplex, w: Window, **kwargs) -> MonodromyReport:
    """Is (d^{c_min})² nonzero on E^{c_min}, with every witness of the form S(x, x#α_min)?"""
    k = C.novikov.c_min
    if k > C.truncation_order:
        raise PageOutOfRange(k, f"truncation order {C.truncation_order} is below c_min = {k}")
    page = compute_page(C, k, w, **kwargs)
    classes = _classes_of_square(page, w)
    witnesses: List[Witness] = []
    discarded: List[Tuple[str, str, str]] = []
    for cls in classes:
        pairs = _conforming_sources(C, page, cls)
        if not pairs:
            raise InternalInconsistency(
                f"(d^{k})² class {cls.label} at {cls.target} is not of the form x#α_min; "
                "check the declared c_min", target=cls.label)
        source_gens = {sk[0] for sk, _ in pairs}
        for key, c in sorted(cls.raw.items()):
            conforming = any(key[0] == sk[0] and tuple(a - b for a, b in zip(key[1], sk[1])) == C.novikov.alpha_min
                             for sk, _ in pairs)
            if not conforming:
                src = C.generators[min(source_gens)].name
                discarded.append((src, C.format_key(key), str(c)))
        for sk, tk in pairs:
            witnesses.append(Witness(
                generator=C.generators[sk[0]].name,
                source=C.format_key(sk),
                target=C.format_key((tk[0], tk[1], ())),
                surviving_class=cls.label,
                source_bidegree=cls.source,
                target_bidegree=cls.target,
                dsq=cls,
            ))
    return MonodromyReport(bool(witnesses), k, witnesses, discarded, classes, page)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

@dataclass
class TraceItem:
    check: str
    passed: bool
    details: Dict[str, object] = dc_field(default_factory=dict)


@dataclass
class CriterionVerdict:
    outcome: str
    failed: Optional[str]
    trace: List[TraceItem]
    scope: str

    @property
    def satisfied(self) -> bool:
        return self.failed is None


def _verdict(trace: List[TraceItem], scope: str) -> CriterionVerdict:
    for item in trace:
        if not item.passed:
            return CriterionVerdict(f"HypothesisFails({item.check})", item.check, trace, scope)
    return CriterionVerdict(SATISFIED, None, trace, scope)


@dataclass
class Geometry:
    n: int
    rho: Fraction
    critical_values: Dict[str, Fraction]

    @classmethod
    def from_mapping(cls, g: Optional[Mapping], C: FilteredComplex) -> "Geometry":
        if not g:
            raise MissingGeometry("no geometry block (n, rho, critical values) supplied")
        missing = [k for k in ("n", "rho", "critical_values") if g.get(k) is None]
        if missing:
            raise MissingGeometry(f"geometry block lacks {', '.join(missing)}", missing=missing)
        values = {k: parse_rational(v) for k, v in g["critical_values"].items()}
        absent = [x.name for x in C.generators if x.name not in values]
        if absent:
            raise MissingGeometry(f"no critical value for {', '.join(absent)}", missing=absent)
        return cls(int(g["n"]), parse_rational(g["rho"]), values)


def _self_indexing(C: FilteredComplex, geo: Geometry) -> TraceItem:
    bad = []
    gens = list(C.generators)
    for a in gens:
        for b in gens:
            fa, fb = geo.critical_values[a.name], geo.critical_values[b.name]
            if a.p == b.p and fa != fb:
                bad.append(f"{a.name},{b.name}: equal index, values {fa} != {fb}")
            elif a.p > b.p and not fa > fb:
                bad.append(f"{a.name},{b.name}: index {a.p} > {b.p} but value {fa} <= {fb}")
    return TraceItem("self_indexing", not bad, {"violations": bad[:5]})


# ---------------------------------------------------------------------------
# criterion with a d^r-relation between perfect classes
# ---------------------------------------------------------------------------

@dataclass
class OrbitCriterionInput:
    complex: FilteredComplex
    x: Sequence[str]
    z: Sequence[str]
    lam: object
    r: int
    geometry: Optional[Mapping]
    homology_of_M: Optional[Mapping[int, int]]
    window: Optional[Window] = None


def _homogeneous_index(C: FilteredComplex, names: Sequence[str], what: str) -> int:
    idx = {C.generators[C._gen(n)].p for n in names}
    if len(idx) != 1:
        raise MissingGeometry(f"class {what} must be a nonempty sum of generators of one index")
    return idx.pop()


def orbit_criterion_perfect(inp: OrbitCriterionInput, **kwargs) -> CriterionVerdict:
    C = inp.complex
    N, f = C.novikov, C.field
    geo = Geometry.from_mapping(inp.geometry, C)
    if inp.homology_of_M is None:
        raise MissingGeometry("no homology_of_M dimension table supplied")
    xs, zs = list(inp.x), list(inp.z)
    ix = _homogeneous_index(C, xs, "x")
    iz = _homogeneous_index(C, zs, "z")
    lam = N.vector(inp.lam)
    r = inp.r
    trace: List[TraceItem] = []

    trace.append(TraceItem("ordering", ix < iz, {"|x|": ix, "|z|": iz}))
    trace.append(_self_indexing(C, geo))
    if not all(t.passed for t in trace):
        return _verdict(trace, PERFECT_SCOPE)

    # relatedness
    w = inp.window or Window(ix - r, ix, 0, max(r - 1, 0))
    rel = TraceItem("relatedness", False, {"r": r})
    trace.append(rel)
    if r < 1 or r > C.truncation_order:
        rel.details["reason"] = f"page {r} is not defined for this complex"
        return _verdict(trace, PERFECT_SCOPE)
    page = compute_page(C, r, w, **kwargs)
    top = {C.key(n): f.one for n in xs}
    try:
        xc = page.block(ix, 0).coords(top)
    except NotInBlock:
        xc = None
    if not xc:
        rel.details["reason"] = f"x does not survive to page {r}"
        return _verdict(trace, PERFECT_SCOPE)
    image = page.d(ix, 0).apply(xc)
    target = page.block(ix - r, r - 1)
    zset = {C._gen(n) for n in zs}
    found = None
    for j in sorted(image):
        tkeys = target.reps[j][0]
        if tkeys and all(k[0] in zset and k[1] == lam for k in tkeys):
            found = (j, tkeys)
            break
    rel.details["image"] = C.format_vector(_class_vector(page, ix - r, r - 1, image))
    if found is None:
        rel.details["reason"] = "d^r[x] has no basis class of the form γ⊗z·e^λ"
        return _verdict(trace, PERFECT_SCOPE)
    j, tkeys = found
    gamma = C.algebra.format_word(next(iter(tkeys))[2])
    rel.passed = True
    rel.details.update({"gamma": gamma, "class": C.format_vector(tkeys), "coefficient": str(image[j])})

    # gap
    low = iz - 2 * N.c1(lam)
    hits = []
    for t in range(low + 1, ix):
        for k, dim in sorted(inp.homology_of_M.items()):
            if dim and N.has_degree(t - k):
                hits.append({"k": k, "q": t - k, "total": t})
    trace.append(TraceItem("gap", not hits, {"window": [low + 1, ix - 1], "violations": hits}))
    if hits:
        return _verdict(trace, PERFECT_SCOPE)

    # index identity
    trace.append(TraceItem("index_identity", ix - r == low,
                           {"|x|-r": ix - r, "|z|-2c1(λ)": low}))

    # action chain: f(z) + A - ω(λ) >= f(z) + A - ρ(2n+r) > f(x)
    A = geo.rho * (2 * geo.n + r)
    om = N.omega(lam)
    fx = geo.critical_values[xs[0]]
    fz = geo.critical_values[zs[0]]
    chain = {
        "A": str(A),
        "omega(λ)": str(om),
        "c1(λ)": N.c1(lam),
        "f(x)": str(fx),
        "f(z)": str(fz),
        "f(z)+A-omega(λ)": str(fz + A - om),
        "f(z)+A-rho(2n+r)": str(fz + A - geo.rho * (2 * geo.n + r)),
    }
    ok = om <= A and fz + A - om > fx and fz > fx and 2 * N.c1(lam) <= 2 * geo.n + r
    trace.append(TraceItem("action_chain", ok, chain))
    return _verdict(trace, PERFECT_SCOPE)


# ---------------------------------------------------------------------------
# criterion from (d^{c_min})^2 != 0
# ---------------------------------------------------------------------------

def check_spacing(C: FilteredComplex, geo: Geometry, omega_min: Fraction) -> None:
    width = geo.rho * geo.n + omega_min
    values = sorted(set(geo.critical_values[g.name] for g in C.generators))
    for v in values:
        inside = [u for u in values if u != v and v <= u <= v + width]
        if inside:
            raise SpacingViolation(
                f"critical value(s) {', '.join(map(str, inside))} lie in [{v}, {v + width}]",
                value=str(v), inside=[str(u) for u in inside])


def orbit_criterion_dsq(C: FilteredComplex, w: Window, geometry: Optional[Mapping], **kwargs) -> CriterionVerdict:
    N = C.novikov
    geo = Geometry.from_mapping(geometry, C)
    trace: List[TraceItem] = [_self_indexing(C, geo)]
    if not trace[0].passed:
        return _verdict(trace, DSQ_SCOPE)
    om_min = N.omega_min
    check_spacing(C, geo, om_min)
    trace.append(TraceItem("spacing", True, {"width": str(geo.rho * geo.n + om_min)}))

    report = monodromy_check(C, w, **kwargs)
    trace.append(TraceItem("monodromy", report.flag,
                           {"k": report.k, "witness_generators": sorted({wi.generator for wi in report.witnesses}),
                            "witness_count": len(report.witnesses)}))
    if not report.flag:
        return _verdict(trace, DSQ_SCOPE)

    page, k, cmin = report.page, report.k, N.c_min
    n, rho = geo.n, geo.rho
    branches = []
    seen = set()
    ok = True
    for wit in report.witnesses:
        cls = wit.dsq
        src_key = next(sk for sk in page.block(*cls.source).reps[cls.index][0]
                       if C.format_key(sk) == wit.source)
        x = C.generators[src_key[0]]
        first = page.d(*cls.source).column(cls.index)
        mid_pq = (cls.source[0] - k, cls.source[1] + k - 1)
        second = page.d(*mid_pq)
        for j in sorted(first):
            if not second.column(j):
                continue
            for key in sorted(page.block(*mid_pq).reps[j][0]):
                y = C.generators[key[0]]
                alpha = tuple(a - b for a, b in zip(key[1], src_key[1]))
                if (x.name, y.name, alpha) in seen:
                    continue
                seen.add((x.name, y.name, alpha))
                c1a, oma = N.c1(alpha), N.omega(alpha)
                fx, fy = geo.critical_values[x.name], geo.critical_values[y.name]
                i1 = x.p - y.p + 2 * c1a - 1
                i2 = y.p - x.p + 2 * (cmin - c1a) - 1
                b = {
                    "x": x.name, "y": y.name, "alpha": N.format_vector(alpha) or "0",
                    "|x|": x.p, "|y|": y.p, "c1(alpha)": c1a, "omega(alpha)": str(oma),
                    "first_inequality": i1, "second_inequality": i2,
                }
                good = i1 >= 0 and i2 >= 0 and y.p != x.p
                if y.p > x.p:
                    b["case"] = "|y|>|x|"
                    b["bound_2c1"] = f"{2 * c1a} < {2 * n + 2 * cmin}"
                    b["f(y)-omega(alpha)"] = str(fy - oma)
                    b["f(x)"] = str(fx)
                    good = good and c1a >= cmin and 2 * c1a < 2 * n + 2 * cmin and fy - oma > fx
                elif y.p < x.p:
                    b["case"] = "|y|<|x|"
                    b["bound_c1"] = f"{-n} < {c1a} < {cmin}"
                    b["f(y)-omega(alpha)"] = str(fy - oma)
                    b["f(x)-omega_min"] = str(fx - om_min)
                    good = good and -n < c1a < cmin and fy - oma < fx - om_min
                else:
                    b["case"] = "|y|=|x|"
                b["contradiction"] = good
                ok = ok and good
                branches.append(b)
    trace.append(TraceItem("action_chain", ok and bool(branches), {"branches": branches}))
    return _verdict(trace, DSQ_SCOPE)
