"""Model files: JSON schema, exact-number parsing, canonical form.

Numbers in a model are integers or decimal/fraction strings. A binary
float literal anywhere in the file is a schema error.
"""

from __future__ import annotations

import copy
import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import jsonschema

from .errors import SchemaError
from .fields import FieldChoice, parse_rational

SCHEMA_VERSION = 1

_RATIONAL = {
    "anyOf": [
        {"type": "integer"},
        {"type": "string", "pattern": r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)(/\d+)?\s*$"},
    ]
}
_NAME = {"type": "string", "minLength": 1}
_WORD = {"type": "array", "items": _NAME}
_EXPONENT = {"type": "object", "additionalProperties": {"type": "integer"}}


def _obj(props: Dict[str, Any], required: List[str]) -> Dict[str, Any]:
    return {"type": "object", "properties": props, "required": required, "additionalProperties": False}


MODEL_SCHEMA: Dict[str, Any] = _obj(
    {
        "schema_version": {"const": SCHEMA_VERSION},
        "field": {"enum": ["GF2", "Q"]},
        "algebra": _obj(
            {
                "generators": {
                    "type": "array",
                    "items": _obj({"name": _NAME, "degree": {"type": "integer"}}, ["name", "degree"]),
                },
                "relations": {
                    "type": "array",
                    "items": _obj(
                        {
                            "lhs": _WORD,
                            "rhs": {
                                "type": "array",
                                "items": _obj({"monomial": _WORD, "coefficient": _RATIONAL},
                                              ["monomial", "coefficient"]),
                            },
                        },
                        ["lhs", "rhs"],
                    ),
                },
                "commuting": {
                    "type": "array",
                    "items": {"type": "array", "items": _NAME, "minItems": 2, "maxItems": 2},
                },
                "order": {"const": "deglex"},
            },
            ["generators"],
        ),
        "novikov": _obj(
            {
                "classes": {
                    "type": "array",
                    "items": _obj({"name": _NAME, "c1": {"type": "integer"}, "omega": _RATIONAL},
                                  ["name", "c1", "omega"]),
                },
                "monotone": {"type": "boolean"},
                "rho": _RATIONAL,
                "c_min": {"type": "integer", "minimum": 1},
                "alpha_min": {"anyOf": [_NAME, _EXPONENT]},
            },
            ["classes", "c_min"],
        ),
        "generators": {
            "type": "array",
            "items": _obj({"name": _NAME, "p": {"type": "integer"}, "labels": {"type": "object"}},
                          ["name", "p"]),
        },
        "differential": {
            "type": "array",
            "items": _obj(
                {
                    "source": _NAME,
                    "target": _NAME,
                    "monomial": _WORD,
                    "exponent": _EXPONENT,
                    "coefficient": _RATIONAL,
                },
                ["source", "target"],
            ),
        },
        "truncation_order": {"anyOf": [{"type": "integer", "minimum": 1}, {"const": "exact"}]},
        "morse": _obj(
            {
                "critical_points": {
                    "type": "array",
                    "items": _obj({"name": _NAME, "index": {"type": "integer"}, "value": _RATIONAL},
                                  ["name", "index"]),
                },
                "d_morse": {
                    "type": "array",
                    "items": _obj({"source": _NAME, "target": _NAME, "coefficient": _RATIONAL},
                                  ["source", "target"]),
                },
            },
            ["critical_points"],
        ),
        "gw": {
            "type": "array",
            "items": _obj(
                {"x": _NAME, "y": _NAME, "class": _EXPONENT, "count": _RATIONAL, "loop_class": _WORD},
                ["x", "y", "class", "loop_class"],
            ),
        },
        "serre_d2": {
            "type": "array",
            "items": _obj({"source": _NAME, "target": _NAME, "monomial": _WORD, "coefficient": _RATIONAL},
                          ["source", "target", "monomial"]),
        },
        "fibration_labels": {"type": "object", "additionalProperties": {"type": "integer"}},
        "geometry": _obj(
            {
                "n": {"type": "integer", "minimum": 1},
                "rho": _RATIONAL,
                "critical_values": {"type": "object", "additionalProperties": _RATIONAL},
            },
            [],
        ),
        "homology_of_M": {
            "type": "object",
            "propertyNames": {"pattern": r"^-?\d+$"},
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
    },
    ["schema_version", "field", "algebra", "novikov", "generators", "differential"],
)


class _FloatLiteral(str):
    """Marker for a binary float literal found while decoding."""


def _path_str(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def _find_floats(node, path=()):
    if isinstance(node, _FloatLiteral):
        yield path, str(node)
    elif isinstance(node, dict):
        for k, v in node.items():
            yield from _find_floats(v, path + (k,))
    elif isinstance(node, list):
        for i, v in enumerate(node):
            yield from _find_floats(v, path + (i,))


def loads(text: str) -> Dict[str, Any]:
    """Decode JSON, refusing float literals with a field pointer."""
    try:
        doc = json.loads(text, parse_float=_FloatLiteral)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          line=exc.lineno, column=exc.colno) from None
    for path, lit in _find_floats(doc):
        where = _path_str(path)
        raise SchemaError(f"{where}: binary float literal {lit} is not allowed; "
                          f"write it as a decimal string such as \"{lit}\"", field=where)
    return doc


def validate(doc: Dict[str, Any]) -> None:
    for path, lit in _find_floats(doc):
        raise SchemaError(f"{_path_str(path)}: binary float literal {lit} is not allowed",
                          field=_path_str(path))
    if any(isinstance(v, float) for _, v in _walk(doc)):
        where = next(_path_str(p) for p, v in _walk(doc) if isinstance(v, float))
        raise SchemaError(f"{where}: binary float value is not allowed", field=where)
    validator = jsonschema.Draft202012Validator(MODEL_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        where = _path_str(err.absolute_path)
        raise SchemaError(f"{where}: {err.message}", field=where)


def _walk(node, path=()):
    yield path, node
    if isinstance(node, dict):
        for k, v in node.items():
            yield from _walk(v, path + (k,))
    elif isinstance(node, list):
        for i, v in enumerate(node):
            yield from _walk(v, path + (i,))


def _rat(value) -> str:
    return str(parse_rational(value))


def _exp_items(exp: Dict[str, int]) -> Tuple[Tuple[str, int], ...]:
    return tuple(sorted((k, v) for k, v in exp.items() if v))


def canonicalize(doc: Dict[str, Any]) -> Dict[str, Any]:
    """Canonical form: exact numbers as strings, merged and sorted entries."""
    doc = copy.deepcopy(doc)
    field = FieldChoice.from_name(doc["field"])
    out: Dict[str, Any] = {"schema_version": SCHEMA_VERSION, "field": field.value}

    alg = doc["algebra"]
    out["algebra"] = {
        "generators": [{"name": g["name"], "degree": g["degree"]} for g in alg["generators"]],
        "relations": sorted(
            (
                {
                    "lhs": list(r["lhs"]),
                    "rhs": sorted(
                        ({"monomial": list(t["monomial"]), "coefficient": str(field.coerce(t["coefficient"]))}
                         for t in r["rhs"] if field.coerce(t["coefficient"])),
                        key=lambda t: t["monomial"],
                    ),
                }
                for r in alg.get("relations", [])
            ),
            key=lambda r: r["lhs"],
        ),
        "commuting": sorted([list(pair) for pair in alg.get("commuting", [])]),
        "order": "deglex",
    }

    nov = doc["novikov"]
    cn: Dict[str, Any] = {
        "classes": [{"name": c["name"], "c1": c["c1"], "omega": _rat(c["omega"])} for c in nov["classes"]],
        "c_min": nov["c_min"],
        "monotone": bool(nov.get("monotone", False)),
    }
    if "rho" in nov:
        cn["rho"] = _rat(nov["rho"])
    if "alpha_min" in nov:
        am = nov["alpha_min"]
        cn["alpha_min"] = am if isinstance(am, str) else dict(_exp_items(am))
    out["novikov"] = cn

    out["generators"] = []
    for g in doc["generators"]:
        entry = {"name": g["name"], "p": g["p"]}
        if g.get("labels"):
            entry["labels"] = g["labels"]
        out["generators"].append(entry)

    order = {g["name"]: i for i, g in enumerate(doc["generators"])}
    merged: Dict[tuple, Any] = {}
    for e in doc["differential"]:
        key = (e["source"], e["target"], tuple(e.get("monomial", [])), _exp_items(e.get("exponent", {})))
        c = field.coerce(e.get("coefficient", 1))
        merged[key] = field.add(merged.get(key, field.zero), c)
    out["differential"] = [
        {
            "source": s,
            "target": t,
            "monomial": list(m),
            "exponent": dict(x),
            "coefficient": str(c),
        }
        for (s, t, m, x), c in sorted(
            merged.items(),
            key=lambda kv: (order.get(kv[0][0], len(order)), order.get(kv[0][1], len(order)),
                            kv[0][0], kv[0][1], kv[0][2], kv[0][3]),
        )
        if c
    ]
    if "truncation_order" in doc:
        out["truncation_order"] = doc["truncation_order"]

    if "morse" in doc:
        m = doc["morse"]
        cm: Dict[str, Any] = {"critical_points": []}
        for cp in m["critical_points"]:
            item = {"name": cp["name"], "index": cp["index"]}
            if "value" in cp:
                item["value"] = _rat(cp["value"])
            cm["critical_points"].append(item)
        cm["d_morse"] = sorted(
            ({"source": e["source"], "target": e["target"],
              "coefficient": str(field.coerce(e.get("coefficient", 1)))} for e in m.get("d_morse", [])),
            key=lambda e: (e["source"], e["target"]),
        )
        out["morse"] = cm
    if "gw" in doc:
        out["gw"] = sorted(
            (
                {"x": e["x"], "y": e["y"], "class": dict(_exp_items(e["class"])),
                 "count": str(field.coerce(e.get("count", 1))), "loop_class": list(e["loop_class"])}
                for e in doc["gw"]
            ),
            key=lambda e: (e["x"], e["y"], sorted(e["class"].items()), e["loop_class"]),
        )
    if "serre_d2" in doc:
        out["serre_d2"] = sorted(
            (
                {"source": e["source"], "target": e["target"], "monomial": list(e["monomial"]),
                 "coefficient": str(field.coerce(e.get("coefficient", 1)))}
                for e in doc["serre_d2"]
            ),
            key=lambda e: (e["source"], e["target"], e["monomial"]),
        )
    if "fibration_labels" in doc:
        out["fibration_labels"] = dict(sorted(doc["fibration_labels"].items()))
    if "geometry" in doc:
        g = doc["geometry"]
        cg: Dict[str, Any] = {}
        if "n" in g:
            cg["n"] = g["n"]
        if "rho" in g:
            cg["rho"] = _rat(g["rho"])
        if "critical_values" in g:
            cg["critical_values"] = {k: _rat(v) for k, v in sorted(g["critical_values"].items())}
        out["geometry"] = cg
    if "homology_of_M" in doc:
        out["homology_of_M"] = {k: v for k, v in sorted(doc["homology_of_M"].items(), key=lambda kv: int(kv[0]))}
    return out


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class Model:
    """A validated model document with lazily built algebraic objects."""

    def __init__(self, doc: Dict[str, Any], source: Optional[str] = None):
        validate(doc)
        self.raw = doc
        self.source = source
        self.doc = canonicalize(doc)
        self.field = FieldChoice.from_name(self.doc["field"])
        self._complex = None
        self._algebra = None
        self._novikov = None

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "Model":
        return cls(doc)

    @classmethod
    def from_text(cls, text: str, source: Optional[str] = None) -> "Model":
        return cls(loads(text), source)

    def canonical_json(self) -> str:
        return dumps(self.doc)

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    # -- algebraic objects -----------------------------------------------
    @property
    def algebra(self):
        if self._algebra is None:
            from .coefficients import AlgebraPresentation

            a = self.doc["algebra"]
            self._algebra = AlgebraPresentation(
                [(g["name"], g["degree"]) for g in a["generators"]],
                [(r["lhs"], [(t["monomial"], t["coefficient"]) for t in r["rhs"]]) for r in a["relations"]],
                [tuple(pair) for pair in a["commuting"]],
                self.field,
            )
        return self._algebra

    @property
    def novikov(self):
        if self._novikov is None:
            from .coefficients import NovikovSystem

            n = self.doc["novikov"]
            self._novikov = NovikovSystem(
                [(c["name"], c["c1"], c["omega"]) for c in n["classes"]],
                n["c_min"],
                alpha_min=n.get("alpha_min"),
                monotone=n["monotone"],
                rho=n.get("rho"),
            )
        return self._novikov

    def complex(self):
        if self._complex is None:
            from .complexes import EXACT, DifferentialEntry, FilteredComplex, Generator

            gens = [Generator(g["name"], g["p"], g.get("labels", {})) for g in self.doc["generators"]]
            entries = [
                DifferentialEntry(e["source"], e["target"], tuple(e["monomial"]), e["exponent"], e["coefficient"])
                for e in self.doc["differential"]
            ]
            order = self.doc.get("truncation_order")
            declared = EXACT if order == "exact" else order
            self._complex = FilteredComplex(self.algebra, self.novikov, gens, entries, declared)
        return self._complex

    # -- optional sections -----------------------------------------------
    def section(self, name: str):
        return self.doc.get(name)

    def geometry(self):
        return self.doc.get("geometry")

    def homology_of_M(self) -> Optional[Dict[int, int]]:
        h = self.doc.get("homology_of_M")
        return None if h is None else {int(k): v for k, v in h.items()}

    def fibration_labels(self) -> Optional[Dict[str, int]]:
        return self.doc.get("fibration_labels")

    def critical_values(self) -> Optional[Dict[str, Fraction]]:
        g = self.doc.get("geometry") or {}
        cv = g.get("critical_values")
        return None if cv is None else {k: Fraction(v) for k, v in cv.items()}


def parse_model(path) -> Model:
    """Read, validate and build a model file; algebra errors surface here."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {p}: {exc.strerror}") from None
    model = Model.from_text(text, source=str(p))
    model.complex()
    return model


def bundled_path(name: str) -> Path:
    if not name.endswith(".json"):
        name += ".json"
    return Path(__file__).resolve().parent / "data" / name


def load_bundled(name: str) -> Model:
    return parse_model(bundled_path(name))
