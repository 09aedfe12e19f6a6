"""Deterministic text tables and JSON payloads for command output."""

from __future__ import annotations

import json
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from typing import Any, Dict, List, Mapping

from .complexes import format_order
from .engine.pages import DrMatrix, Page
from .engine.views import Window

REPORT_SCHEMA_VERSION = 1


def jsonable(x: Any) -> Any:
    """Plain JSON values; rationals and infinities become strings."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return format_order(x) if x == float("inf") else str(Fraction(x))
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Mapping):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if is_dataclass(x):
        return jsonable(asdict(x))
    return str(x)


def envelope(command: str, model_hash: str, body: Mapping[str, Any]) -> Dict[str, Any]:
    out = {"command": command, "model_hash": model_hash, "schema_version": REPORT_SCHEMA_VERSION}
    out.update(jsonable(body))
    return out


def dumps_report(report: Mapping[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def window_json(w: Window) -> Dict[str, Any]:
    return {"p_min": w.p_min, "p_max": w.p_max, "q_min": w.q_min, "q_max": w.q_max}


def matrix_entries(m: DrMatrix) -> List[Dict[str, Any]]:
    return [{"source": [m.source[0], m.source[1], j], "target": [m.target[0], m.target[1], i],
             "value": str(c)} for (i, j), c in sorted(m.entries.items())]


def page_json(page: Page) -> Dict[str, Any]:
    blocks = []
    arrows = []
    for pq in page.window.bidegrees():
        blocks.append({"p": pq[0], "q": pq[1], "dim": page.dim(*pq), "basis": page.labels(*pq)})
        arrows += matrix_entries(page.d(*pq))
    return {
        "r": page.r,
        "window": window_json(page.window),
        "energy": None if page.energy is None else str(page.energy),
        "truncation_order": format_order(page.order),
        "differential_guarantee": page.differential_guarantee,
        "representative_dependent": page.representative_dependent,
        "total_dimension": page.total_dimension(),
        "blocks": blocks,
        "differential": arrows,
    }


def _grid(w: Window, cell) -> List[str]:
    ps = list(range(w.p_min, w.p_max + 1))
    qs = list(range(w.q_max, w.q_min - 1, -1))
    cells = {(p, q): cell(p, q) for p in ps for q in qs}
    width = max([len(str(p)) for p in ps] + [len(c) for c in cells.values()]) + 2
    head = "q\\p".rjust(4) + "".join(str(p).rjust(width) for p in ps)
    lines = [head]
    for q in qs:
        lines.append(str(q).rjust(4) + "".join(cells[(p, q)].rjust(width) for p in ps))
    return lines


def _label(page: Page, pq, i: int) -> str:
    if pq in page.blocks:
        return page.labels(*pq)[i]
    block = page.engine.block(page.r, *pq)
    return page.complex.format_vector(block.reps[i][0])


def dims_grid(w: Window, cell) -> List[str]:
    return _grid(w, cell)


def page_text(page: Page, model_hash: str) -> str:
    w = page.window
    energy = "none" if page.energy is None else str(page.energy)
    lines = [
        f"E^{page.r}  p={w.p_min}..{w.p_max}  q={w.q_min}..{w.q_max}  energy={energy}  "
        f"order={format_order(page.order)}",
        f"model {model_hash[:16]}",
        "",
    ]
    lines += _grid(w, lambda p, q: str(page.dim(p, q)) if page.dim(p, q) else ".")
    lines.append("")
    lines.append("basis:")
    for (p, q) in w.bidegrees():
        for i, label in enumerate(page.labels(p, q)):
            lines.append(f"  ({p},{q})#{i}  {label}")
    lines.append(f"d^{page.r}:" + ("" if page.differential_guarantee else "  (no d∘d = 0 guarantee at r = k)"))
    any_arrow = False
    for pq in w.bidegrees():
        m = page.d(*pq)
        for (i, j), c in sorted(m.entries.items()):
            any_arrow = True
            src = page.labels(*m.source)[j]
            tgt = _label(page, m.target, i)
            lines.append(f"  [{src}] ({m.source[0]},{m.source[1]}) -> [{tgt}] "
                         f"({m.target[0]},{m.target[1]})  {c}")
    if not any_arrow:
        lines.append("  (none)")
    return "\n".join(lines) + "\n"


def generic_text(report: Mapping[str, Any]) -> str:
    """Indented key/value rendering of a JSON payload."""
    lines: List[str] = []

    def walk(x: Any, indent: int, key: str = "") -> None:
        pad = "  " * indent
        lead = f"{pad}{key}: " if key else pad
        if isinstance(x, Mapping):
            if key:
                lines.append(f"{pad}{key}:")
                indent += 1
            for k in sorted(x):
                walk(x[k], indent, k)
        elif isinstance(x, list):
            if all(not isinstance(v, (Mapping, list)) for v in x):
                lines.append(lead + ", ".join(map(str, x)) if x else lead + "[]")
            else:
                lines.append(f"{pad}{key}:" if key else pad)
                for v in x:
                    if isinstance(v, Mapping):
                        lines.append("  " * (indent + 1) + "-")
                        walk(v, indent + 2)
                    else:
                        walk(v, indent + 1)
        else:
            lines.append(lead + str(x))

    walk(report, 0)
    return "\n".join(lines) + "\n"
