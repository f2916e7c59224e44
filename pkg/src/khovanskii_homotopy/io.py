"""Problem and solution files.

Problem files are JSON documents validated against :data:`PROBLEM_SCHEMA`
(unknown fields are rejected); the module-level invariants of the parsed
objects are then re-checked and reported with the JSON pointer of the
offending entry. Solution files are written deterministically: sorted keys
and every float printed with 17 significant digits, so a write followed by a
read reproduces the values bit for bit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .poly import HomotopyPolynomial, SparsePolynomial, is_weighted_homogeneous
from .toric import MonomialMap, ValuationMatrix
from .tracker import TrackerOptions

__all__ = [
    "ProblemError",
    "ProblemFile",
    "SolutionFile",
    "SolutionRecord",
    "PROBLEM_SCHEMA",
    "SOLUTION_SCHEMA",
    "fixture_path",
    "load_problem",
    "load_section",
    "problem_from_dict",
    "problem_to_dict",
    "write_problem",
    "dumps",
    "write_solutions",
    "read_solutions",
]

FORMAT_VERSION = 1

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_int_vector = {"type": "array", "items": {"type": "integer"}}
_int_matrix = {"type": "array", "items": _int_vector, "minItems": 1}
_complex_matrix = {"type": "array", "items": {"type": "array", "items": _complex}}
_term = {
    "type": "object",
    "properties": {"coeff": _complex, "exponent": _int_vector},
    "required": ["coeff", "exponent"],
    "additionalProperties": False,
}
_family_term = {
    "type": "object",
    "properties": {"coeff": _complex, "exponent": _int_vector, "t_power": {"type": "integer", "minimum": 0}},
    "required": ["coeff", "exponent", "t_power"],
    "additionalProperties": False,
}
_option_keys = {
    name: {"type": "integer" if isinstance(default, int) else "number", "exclusiveMinimum": 0}
    for name, default in TrackerOptions().__dict__.items()
}

PROBLEM_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "problem file",
    "type": "object",
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "name": {"type": "string"},
        "mode": {"enum": ["khovanskii", "weighted", "toric_family", "sparse"]},
        "variables": {"type": "array", "items": {"type": "string"}},
        "grading": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "valuation_matrix": _int_matrix,
        "weight": _int_vector,
        "groebner_basis": {"type": "array", "items": {"type": "array", "items": _term}},
        "graph_relations": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "index": {"type": "integer", "minimum": 0},
                    "polynomial": {"type": "array", "items": _term},
                },
                "required": ["index", "polynomial"],
                "additionalProperties": False,
            },
        },
        "family": {"type": "array", "items": {"type": "array", "items": _family_term, "minItems": 1}, "minItems": 1},
        "fiber_dim": {"type": "integer", "minimum": 0},
        "support": _int_matrix,
        "coefficients": _complex_matrix,
        "section": {"oneOf": [{"const": "random"}, _complex_matrix]},
        "components": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"base": {"type": "array", "items": _complex}, "exponents": _int_matrix},
                "required": ["base", "exponents"],
                "additionalProperties": False,
            },
            "minItems": 1,
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "tolerances": {"type": "object", "properties": _option_keys, "additionalProperties": False},
        "notes": {"type": "object"},
    },
    "required": ["format_version", "mode"],
    "additionalProperties": False,
    "allOf": [
        {
            "if": {"properties": {"mode": {"enum": ["khovanskii", "weighted"]}}},
            "then": {"required": ["grading", "valuation_matrix", "weight", "groebner_basis"]},
        },
        {"if": {"properties": {"mode": {"const": "toric_family"}}}, "then": {"required": ["family"]}},
        {"if": {"properties": {"mode": {"const": "sparse"}}}, "then": {"required": ["support", "coefficients"]}},
    ],
}

SECTION_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {"format_version": {"const": FORMAT_VERSION}, "section": _complex_matrix},
    "required": ["format_version", "section"],
    "additionalProperties": False,
}

_nullable_number = {"type": ["number", "null"]}
SOLUTION_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "solutions": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "coords": {"type": "array", "items": _complex},
                    "residual": _nullable_number,
                    "path_id": {"type": "integer"},
                    "status": {"type": "string"},
                },
                "required": ["coords", "residual", "path_id", "status"],
                "additionalProperties": False,
            },
        },
        "metadata": {"type": "object"},
    },
    "required": ["format_version", "solutions", "metadata"],
    "additionalProperties": False,
}


class ProblemError(ValueError):
    """Invalid problem or solution file; the message carries the JSON pointer."""


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def _validate(doc, schema, source: str) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{source}: {_pointer(e.absolute_path)}: {e.message}" for e in errors[:10]]
        raise ProblemError("schema violation\n" + "\n".join(lines))


def _read_json(path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})") from exc
    except OSError as exc:
        raise ProblemError(f"{path}: {exc.strerror}") from exc


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture, e.g. ``fixture_path("bott_samelson.json")``."""
    return Path(str(resources.files(__package__) / "fixtures" / name))


# --------------------------------------------------------------------------
# problem files


@dataclass
class ProblemFile:
    """A parsed and validated problem file; ``raw`` keeps the JSON document."""

    mode: str
    raw: dict
    name: str = ""
    variables: list[str] = field(default_factory=list)
    grading: list[int] | None = None
    A: ValuationMatrix | None = None
    weight: list[int] | None = None
    groebner: list[SparsePolynomial] = field(default_factory=list)
    graph_relations: dict[int, SparsePolynomial] = field(default_factory=dict)
    family: list[HomotopyPolynomial] = field(default_factory=list)
    fiber_dim: int | None = None
    support: list[list[int]] | None = None
    coefficients: np.ndarray | None = None
    section: np.ndarray | None = None
    components: list[MonomialMap] | None = None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    source: str = "<memory>"

    @property
    def nvars(self) -> int:
        if self.A is not None:
            return self.A.ncols
        if self.family:
            return self.family[0].nvars
        return len(self.support) if self.support else 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProblemFile):
            return NotImplemented
        return self.raw == other.raw


def _as_complex(v) -> complex:
    return complex(v[0], v[1])


def _complex_array(M) -> np.ndarray:
    return np.array([[_as_complex(v) for v in row] for row in M], dtype=complex).reshape(len(M), -1)


def _sparse(terms, nvars: int, where: str) -> SparsePolynomial:
    for k, t in enumerate(terms):
        if len(t["exponent"]) != nvars:
            raise ProblemError(f"{where}/{k}/exponent: expected {nvars} entries, got {len(t['exponent'])}")
    return SparsePolynomial(nvars, [(t["exponent"], _as_complex(t["coeff"])) for t in terms])


def problem_from_dict(doc: dict, source: str = "<memory>") -> ProblemFile:
    """Validate a problem document and build the typed objects it describes."""
    _validate(doc, PROBLEM_SCHEMA, source)
    mode = doc["mode"]
    pf = ProblemFile(mode=mode, raw=doc, name=doc.get("name", ""), seed=int(doc.get("seed", 0)), source=source)
    pf.variables = list(doc.get("variables", []))
    pf.tolerances = dict(doc.get("tolerances", {}))
    if mode in ("khovanskii", "weighted"):
        try:
            pf.A = ValuationMatrix(doc["valuation_matrix"])
        except ValueError as exc:
            raise ProblemError(f"{source}: /valuation_matrix: {exc}") from exc
        N = pf.A.ncols
        pf.grading = list(doc["grading"])
        if pf.grading != pf.A.grading:
            raise ProblemError(f"{source}: /grading: does not match the last row of the valuation matrix")
        pf.weight = list(doc["weight"])
        if len(pf.weight) != len(pf.A.rows):
            raise ProblemError(f"{source}: /weight: expected {len(pf.A.rows)} entries, got {len(pf.weight)}")
        for i, g in enumerate(doc["groebner_basis"]):
            f = _sparse(g, N, f"{source}: /groebner_basis/{i}")
            ok, _ = is_weighted_homogeneous(f, pf.grading)
            if not ok:
                raise ProblemError(f"{source}: /groebner_basis/{i}: generator #{i} is not homogeneous for the grading")
            pf.groebner.append(f)
        n = _linear_block(pf.grading)
        for k, rel in enumerate(doc.get("graph_relations", [])):
            j = rel["index"]
            if not n <= j < N:
                raise ProblemError(f"{source}: /graph_relations/{k}/index: {j} is not a higher-degree coordinate")
            pf.graph_relations[j] = _sparse(rel["polynomial"], n, f"{source}: /graph_relations/{k}/polynomial")
        if mode == "khovanskii" and any(a != 1 for a in pf.grading):
            raise ProblemError(f"{source}: /mode: khovanskii mode needs an all-ones grading; use weighted")
    elif mode == "toric_family":
        N = len(doc["family"][0][0]["exponent"])
        for i, g in enumerate(doc["family"]):
            for k, t in enumerate(g):
                if len(t["exponent"]) != N:
                    raise ProblemError(f"{source}: /family/{i}/{k}/exponent: expected {N} entries")
            try:
                F = HomotopyPolynomial(N, [(t["exponent"], t["t_power"], _as_complex(t["coeff"])) for t in g])
            except ValueError as exc:
                raise ProblemError(f"{source}: /family/{i}: {exc}") from exc
            if not is_weighted_homogeneous(F, [1] * N)[0]:
                raise ProblemError(f"{source}: /family/{i}: generator #{i} is not homogeneous")
            pf.family.append(F)
        pf.fiber_dim = doc.get("fiber_dim")
    else:
        pf.support = [list(r) for r in doc["support"]]
        if len({len(r) for r in pf.support}) != 1:
            raise ProblemError(f"{source}: /support: rows have different lengths")
        pf.coefficients = _complex_array(doc["coefficients"])
        if pf.coefficients.shape != (len(pf.support), len(pf.support[0])):
            raise ProblemError(f"{source}: /coefficients: expected shape {len(pf.support)} x {len(pf.support[0])}")
    if "components" in doc:
        maps = []
        for k, c in enumerate(doc["components"]):
            try:
                maps.append(MonomialMap(np.array([_as_complex(v) for v in c["base"]]), tuple(map(tuple, c["exponents"]))))
            except ValueError as exc:
                raise ProblemError(f"{source}: /components/{k}: {exc}") from exc
        pf.components = maps
    sec = doc.get("section", "random")
    if sec != "random":
        pf.section = _complex_array(sec)
    return pf


def _linear_block(grading) -> int:
    n = 0
    for a in grading:
        if a != 1:
            break
        n += 1
    return n


def load_problem(path) -> ProblemFile:
    """Read and validate a problem file."""
    return problem_from_dict(_read_json(path), source=str(path))


def load_section(path) -> np.ndarray:
    """Read a section file ``{"format_version": 1, "section": [[[re, im], ...], ...]}``."""
    doc = _read_json(path)
    _validate(doc, SECTION_SCHEMA, str(path))
    return _complex_array(doc["section"])


def problem_to_dict(pf: ProblemFile) -> dict:
    return json.loads(json.dumps(pf.raw))


def write_problem(path, pf: ProblemFile) -> None:
    Path(path).write_text(dumps(problem_to_dict(pf)))


# --------------------------------------------------------------------------
# deterministic JSON


def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    s = format(v, ".17g")
    if s in ("0", "-0"):
        return "0.0" if s == "0" else "-0.0"
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 1) -> str:
    """JSON text with sorted keys and floats at 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


# --------------------------------------------------------------------------
# solution files


@dataclass
class SolutionRecord:
    coords: np.ndarray
    residual: float
    path_id: int
    status: str

    def __eq__(self, other) -> bool:
        if not isinstance(other, SolutionRecord):
            return NotImplemented
        return (
            np.array_equal(self.coords, other.coords)
            and self.residual == other.residual
            and self.path_id == other.path_id
            and self.status == other.status
        )


@dataclass
class SolutionFile:
    solutions: list[SolutionRecord]
    metadata: dict

    def __eq__(self, other) -> bool:
        if not isinstance(other, SolutionFile):
            return NotImplemented
        return self.solutions == other.solutions and _normalize(self.metadata) == _normalize(other.metadata)

    def points(self) -> list[np.ndarray]:
        return [s.coords for s in self.solutions]


def _normalize(obj):
    return json.loads(dumps(obj))


def _solution_doc(sol: SolutionFile) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "solutions": [
            {
                "coords": [[float(c.real), float(c.imag)] for c in np.asarray(s.coords, dtype=complex)],
                "residual": float(s.residual),
                "path_id": int(s.path_id),
                "status": s.status,
            }
            for s in sol.solutions
        ],
        "metadata": sol.metadata,
    }


def write_solutions(path, sol: SolutionFile) -> str:
    """Write ``sol`` deterministically; ``path`` None or "-" returns the text only."""
    text = dumps(_solution_doc(sol))
    if path not in (None, "-"):
        Path(path).write_text(text)
    return text


def read_solutions(path) -> SolutionFile:
    doc = _read_json(path)
    _validate(doc, SOLUTION_SCHEMA, str(path))
    recs = [
        SolutionRecord(
            np.array([_as_complex(v) for v in s["coords"]], dtype=complex),
            math.inf if s["residual"] is None else float(s["residual"]),
            int(s["path_id"]),
            s["status"],
        )
        for s in doc["solutions"]
    ]
    return SolutionFile(recs, doc["metadata"])
