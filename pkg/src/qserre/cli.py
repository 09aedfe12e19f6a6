"""Command-line front end.

Exit codes: 0 success, 1 the queried obstruction was found (or a hypothesis
failed), 2 input or computation error. Reports are assembled in full before
anything is written, so an error never leaves a partial report behind.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from . import __version__
from .builders import FiberData, build_morse_model, reinsert, seidel_decompose, seidel_morphism
from .complexes import DifferentialEntry, format_order
from .criteria import (
    OrbitCriterionInput,
    dsq_classes,
    monodromy_check,
    orbit_criterion_dsq,
    orbit_criterion_perfect,
)
from .engine import (
    AUTO,
    TruncatedMorphism,
    Window,
    compute_page,
    identity_morphism,
    induced_page_morphism,
    shift_morphism,
    stabilized_page_check,
)
from .errors import QSerreError, SchemaError, UsageError
from .fields import parse_rational
from .model import Model, bundled_path, dumps, loads, parse_model
from .reports import (
    dims_grid,
    dumps_report,
    envelope,
    generic_text,
    matrix_entries,
    page_json,
    page_text,
    window_json,
)

EXIT_OK, EXIT_FOUND, EXIT_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _resolve_input(path: str) -> Path:
    """A path on disk, else a bundled model of that name."""
    p = Path(path)
    if p.exists():
        return p
    b = bundled_path(p.name)
    if b.exists():
        return b
    return p


def _load(path: str) -> Model:
    return parse_model(_resolve_input(path))


def _window(args, model: Model) -> Window:
    C = model.complex()
    ps = [g.p for g in C.generators] or [0]
    period = 2 * C.novikov.c_min
    p_min = args.p_min if args.p_min is not None else min(ps) - period
    p_max = args.p_max if args.p_max is not None else max(ps) + period
    q_min = args.q_min if args.q_min is not None else 0
    q_max = args.q_max if args.q_max is not None else 3
    energy = AUTO if args.energy is None else parse_rational(args.energy)
    return Window(p_min, p_max, q_min, q_max, energy)


def _add_common(sp: argparse.ArgumentParser, window: bool = True) -> None:
    sp.add_argument("--input", required=True, help="model file (or name of a bundled model)")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--output", help="write the report here instead of stdout")
    if window:
        sp.add_argument("--p-min", type=int)
        sp.add_argument("--p-max", type=int)
        sp.add_argument("--q-min", type=int)
        sp.add_argument("--q-max", type=int)
        sp.add_argument("--energy", help="energy cutoff (exact rational); default is derived")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qserre", description="Truncated spectral sequences of filtered complexes over A⊗Λ.")
    ap.add_argument("--version", action="version", version=f"qserre {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("pages", help="E^r and d^r over a window")
    _add_common(sp)
    sp.add_argument("--r", type=int, required=True)

    sp = sub.add_parser("dsq", help="classes with (d^k)^2 != 0")
    _add_common(sp)
    sp.add_argument("--r", type=int, help="page (default: the truncation order)")
    sp.add_argument("--expect-clean", action="store_true", help="exit 1 if any class is found")

    sp = sub.add_parser("monodromy", help="(d^{c_min})^2 obstruction with witnesses")
    _add_common(sp)
    sp.add_argument("--expect-clean", action="store_true", help="exit 1 if the flag is true")

    sp = sub.add_parser("morphism", help="maps induced on pages by a truncated morphism")
    _add_common(sp)
    sp.add_argument("--target", help="target model (default: the input)")
    sp.add_argument("--map", required=True, help="map file: entries, or kind identity/shift")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--expect-clean", action="store_true", help="exit 1 unless every map is an isomorphism")

    sp = sub.add_parser("oracle", help="stabilized pages against brute-force graded homology")
    _add_common(sp)

    sp = sub.add_parser("build-morse", help="quantized Morse complex from Morse, Serre and GW tables")
    _add_common(sp, window=False)

    sp = sub.add_parser("seidel", help="base-degree decomposition of d^2 and the Seidel matrix")
    _add_common(sp)
    sp.add_argument("--r", type=int, default=2)

    sp = sub.add_parser("orbit-criterion", help="closed-characteristic criteria")
    _add_common(sp)
    sp.add_argument("--mode", choices=("perfect", "dsq"), required=True)
    sp.add_argument("--x", nargs="+", help="perfect mode: generators summing to x")
    sp.add_argument("--z", nargs="+", help="perfect mode: generators summing to z")
    sp.add_argument("--lambda", dest="lam", help="perfect mode: Novikov class, e.g. alpha or 2alpha")
    sp.add_argument("--r", type=int, help="perfect mode: page of the relation")
    return ap


# ---------------------------------------------------------------------------
# commands: each returns (exit code, json payload, optional text)
# ---------------------------------------------------------------------------

def _cmd_pages(args, model):
    w = _window(args, model)
    page = compute_page(model.complex(), args.r, w)
    return EXIT_OK, envelope("pages", model.hash, page_json(page)), page_text(page, model.hash)


def _cmd_dsq(args, model):
    C = model.complex()
    w = _window(args, model)
    classes = dsq_classes(C, w, k=args.r)
    body = {
        "window": window_json(w),
        "count": len(classes),
        "classes": [{
            "source": list(c.source), "index": c.index, "source_class": c.source_label,
            "target": list(c.target), "image": c.label,
            "by_generator": {g: C.format_vector(v) for g, v in sorted(c.by_generator.items())},
        } for c in classes],
    }
    code = EXIT_FOUND if args.expect_clean and classes else EXIT_OK
    return code, envelope("dsq", model.hash, body), None


def _cmd_monodromy(args, model):
    w = _window(args, model)
    rep = monodromy_check(model.complex(), w)
    body = {
        "window": window_json(w),
        "k": rep.k,
        "flag": rep.flag,
        "witnesses": [{"source": x.source, "target": x.target, "surviving_class": x.surviving_class,
                       "source_bidegree": list(x.source_bidegree), "target_bidegree": list(x.target_bidegree)}
                      for x in rep.witnesses],
        "discarded": [{"source": a, "term": b, "coefficient": c} for a, b, c in rep.discarded],
    }
    code = EXIT_FOUND if args.expect_clean and rep.flag else EXIT_OK
    lines = [f"monodromy (d^{rep.k})^2 on E^{rep.k}  p={w.p_min}..{w.p_max}  q={w.q_min}..{w.q_max}",
             f"model {model.hash[:16]}", f"flag: {'true' if rep.flag else 'false'}"]
    bare = [x for x in rep.witnesses if x.source == x.generator]
    for x in bare:
        lines.append(f"witness ({x.source}, {x.target})  {x.source_bidegree} -> {x.target_bidegree}  "
                     f"class [{x.surviving_class}]")
    if len(rep.witnesses) > len(bare):
        lines.append(f"plus {len(rep.witnesses) - len(bare)} translates by words and Novikov shifts")
    for a, b, c in rep.discarded:
        lines.append(f"discarded S({a}, {b}) coefficient {c}")
    return code, envelope("monodromy", model.hash, body), "\n".join(lines) + "\n"


def _read_json(path: str) -> Dict:
    p = _resolve_input(path)
    try:
        return loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemaError(f"cannot read {p}: {exc.strerror}") from None


def _theta(spec: Dict, source, target) -> TruncatedMorphism:
    kind = spec.get("kind", "entries")
    if kind == "identity":
        return identity_morphism(source)
    if kind == "shift":
        if "class" not in spec:
            raise SchemaError("shift map needs a 'class'", path="class")
        return shift_morphism(source, spec["class"])
    if kind != "entries":
        raise SchemaError(f"unknown map kind {kind!r}", path="kind")
    entries = []
    for i, e in enumerate(spec.get("entries", [])):
        try:
            entries.append(DifferentialEntry(e["source"], e["target"], tuple(e.get("monomial", [])),
                                             e.get("exponent", {}), e.get("coefficient", "1")))
        except (KeyError, TypeError):
            raise SchemaError("map entry needs source and target", path=f"entries[{i}]") from None
    return TruncatedMorphism(source, target, entries, shift=int(spec.get("shift", 0)))


def _cmd_morphism(args, model):
    C = model.complex()
    D = _load(args.target).complex() if args.target else C
    theta = _theta(_read_json(args.map), C, D)
    w = _window(args, model)
    ind = induced_page_morphism(theta, args.r, w)
    body = {
        "r": args.r,
        "shift": ind.shift,
        "window": window_json(w),
        "defect_order": format_order(theta.defect_order),
        "isomorphism": ind.is_isomorphism,
        "commutes": ind.commutes,
        "maps": [{"source": list(pq), "rows": m.rows, "cols": m.cols, "isomorphism": ind.isomorphism[pq],
                  "entries": matrix_entries(m)} for pq, m in sorted(ind.matrices.items())],
    }
    code = EXIT_FOUND if args.expect_clean and not ind.is_isomorphism else EXIT_OK
    return code, envelope("morphism", model.hash, body), None


def _cmd_oracle(args, model):
    C = model.complex()
    if args.p_min is None and args.p_max is None:
        ps = [g.p for g in C.generators] or [0]
        args.p_min, args.p_max = min(ps) - 2, max(ps)
    w = _window(args, model)
    rep = stabilized_page_check(C, w)
    body = {
        "window": window_json(w),
        "passed": rep.passed,
        "r": rep.r,
        "stable": rep.stable,
        "mismatches": [list(pq) for pq in rep.mismatches],
        "bidegrees": [{"p": p, "q": q, "oracle": rep.oracle[(p, q)], "page": rep.pages[(p, q)]}
                      for (p, q) in w.bidegrees()],
    }
    lines = [f"oracle: stabilized E^{rep.r} against graded homology  p={w.p_min}..{w.p_max}  "
             f"q={w.q_min}..{w.q_max}", f"model {model.hash[:16]}", "cells: page/oracle", ""]
    lines += dims_grid(w, lambda p, q: f"{rep.pages[(p, q)]}/{rep.oracle[(p, q)]}")
    lines += ["", f"stable: {'true' if rep.stable else 'false'}",
              f"result: {'pass' if rep.passed else 'FAIL at ' + ', '.join(map(str, rep.mismatches))}"]
    return (EXIT_OK if rep.passed else EXIT_FOUND), envelope("oracle", model.hash, body), "\n".join(lines) + "\n"


def _cmd_build_morse(args, _model_unused):
    p = _resolve_input(args.input)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {p}: {exc.strerror}") from None
    doc = build_morse_model(loads(text))
    return EXIT_OK, None, dumps(doc)


def _cmd_seidel(args, model):
    C = model.complex()
    labels = model.fibration_labels()
    if labels is None:
        raise SchemaError("model has no fibration_labels section", path="fibration_labels")
    w = _window(args, model)
    dec = seidel_decompose(C, labels, args.r, w)
    comps = {}
    for j, per in sorted(dec.components.items()):
        rows = []
        for pq, cm in sorted(per.items()):
            vecs = [C.format_vector(v) for v in cm.vectors]
            if any(v != "0" for v in vecs):
                rows.append({"source": list(pq), "images": vecs,
                             "entries": matrix_entries(cm.page) if cm.page is not None else None})
        comps[str(j)] = rows
    body: Dict[str, Any] = {"r": args.r, "labels": labels, "window": window_json(w),
                            "reassembles": dec.reassembles(), "components": comps}
    if any(g.labels.get("fiber") is not None for g in C.generators):
        fiber = FiberData.from_complex(C, labels)
        phi = seidel_morphism(dec, fiber)
        body["phi"] = {
            "classes": list(phi.classes),
            "entries": [{"row": y, "column": x,
                         "terms": {C.novikov.format_vector(e) or "0": str(c) for e, c in sorted(t.items())}}
                        for (y, x), t in sorted(phi.entries.items())],
            "identity": phi.is_identity(),
            "round_trip": reinsert(phi, dec, fiber),
        }
    return EXIT_OK, envelope("seidel", model.hash, body), None


def _cmd_orbit(args, model):
    C = model.complex()
    if args.mode == "perfect":
        missing = [f for f in ("x", "z", "lam", "r") if getattr(args, f) is None]
        if missing:
            raise UsageError("perfect mode needs --x, --z, --lambda and --r")
        explicit = any(getattr(args, a) is not None for a in ("p_min", "p_max", "q_min", "q_max", "energy"))
        inp = OrbitCriterionInput(C, args.x, args.z, args.lam, args.r, model.doc.get("geometry"),
                                  model.homology_of_M(), _window(args, model) if explicit else None)
        v = orbit_criterion_perfect(inp)
    else:
        v = orbit_criterion_dsq(C, _window(args, model), model.doc.get("geometry"))
    body = {
        "mode": args.mode,
        "outcome": v.outcome,
        "scope": v.scope,
        "trace": [{"check": t.check, "passed": t.passed, "details": t.details} for t in v.trace],
    }
    text = [f"outcome: {v.outcome}"]
    if v.satisfied:
        text.append(f"scope: {v.scope}")
    for t in v.trace:
        text.append(f"  {'PASS' if t.passed else 'FAIL'}  {t.check}")
    report = envelope("orbit-criterion", model.hash, body)
    text.append("")
    text.append(generic_text({"trace": report["trace"]}))
    return (EXIT_OK if v.satisfied else EXIT_FOUND), report, "\n".join(text)


COMMANDS = {
    "pages": _cmd_pages,
    "dsq": _cmd_dsq,
    "monodromy": _cmd_monodromy,
    "morphism": _cmd_morphism,
    "oracle": _cmd_oracle,
    "build-morse": _cmd_build_morse,
    "seidel": _cmd_seidel,
    "orbit-criterion": _cmd_orbit,
}


def _error_text(exc: QSerreError, fmt: str) -> str:
    if fmt == "json":
        payload = {"error": {"code": exc.code, "type": type(exc).__name__, "message": str(exc),
                             "details": exc.details}}
        from .reports import jsonable
        return json.dumps(jsonable(payload), sort_keys=True) + "\n"
    return f"error {exc.code} {type(exc).__name__}: {exc}\n"


def run_command(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    fmt = "json" if argv and "--format" in argv and "json" in argv else "text"
    try:
        args = build_parser().parse_args(argv)
        fmt = getattr(args, "format", fmt)
        model = None if args.command == "build-morse" else _load(args.input)
        code, report, text = COMMANDS[args.command](args, model)
        if report is None or args.command == "build-morse":
            out = text
        elif args.format == "json":
            out = dumps_report(report)
        else:
            out = text if text is not None else generic_text(report)
    except QSerreError as exc:
        stderr.write(_error_text(exc, fmt))
        return EXIT_ERROR
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        stdout.write(out)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    sys.exit(run_command(argv))
