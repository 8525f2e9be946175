"""Problem files: JSON documents holding the system, region and candidates.

Layout::

    {
      "n_x": 2, "n_u": 0,
      "dynamics": ["x1^3 + x2^2", "x1*x2"],
      "equilibrium": {"x_s": [0, 0], "u_s": []},
      "region": {"x_box": [[-1, 1], [-1, 1]], "u_box": [],
                 "halfspaces": {"F": [[...]], "E": [[...]]}},
      "candidates": {"name": [{"A": [[...]], "B": [[...]]}, ...]},
      "families": {"name": {"loose": "cand_a", "tight": "cand_b"}}
    }

``halfspaces``, ``B`` (when ``n_u == 0``) and ``families`` are optional.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .construct import CandidateFamily
from .errors import DimensionMismatch, LdiError, ParseError, ProblemError
from .expr import parse
from .farkas import CandidateLDI, DynamicalSystem, Region


@dataclass
class Problem:
    system: DynamicalSystem
    region: Region
    candidates: dict
    families: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)
    path: str = ""

    def candidate(self, name: str) -> CandidateLDI:
        try:
            return self.candidates[name]
        except KeyError:
            raise ProblemError(f"unknown candidate {name!r}; have {sorted(self.candidates)}") from None

    def family(self, name: str) -> CandidateFamily:
        try:
            return self.families[name]
        except KeyError:
            raise ProblemError(f"unknown family {name!r}; have {sorted(self.families)}") from None


def _matrix(value, shape, where):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise DimensionMismatch(where, "not a numeric matrix") from None
    if 0 in shape and arr.size == 0:
        return np.zeros(shape)
    if arr.shape != shape:
        raise DimensionMismatch(where, f"shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(where, "non-finite entry")
    return arr


def _box(value, n, where):
    if n == 0 and (value is None or len(value) == 0):
        return np.zeros((0, 2))
    return _matrix(value, (n, 2), where)


def _require(doc, key, where="problem"):
    if key not in doc:
        raise DimensionMismatch(key, f"missing from {where}")
    return doc[key]


def _line_of(text: str, needle: str) -> int:
    idx = text.find(needle)
    return text.count("\n", 0, idx) + 1 if idx >= 0 else 1


def from_dict(doc: dict, path: str = "<memory>", text: str = "") -> Problem:
    if not isinstance(doc, dict):
        raise ParseError(path, 1, "top level must be an object")
    n_x = int(_require(doc, "n_x"))
    n_u = int(doc.get("n_u", 0))
    if n_x < 1 or n_u < 0:
        raise DimensionMismatch("n_x", "n_x must be >= 1 and n_u >= 0")

    dyn = _require(doc, "dynamics")
    if not isinstance(dyn, list) or len(dyn) != n_x:
        raise DimensionMismatch("dynamics", f"expected {n_x} expression strings")
    exprs = []
    for k, s in enumerate(dyn):
        try:
            exprs.append(parse(str(s), n_x, n_u))
        except LdiError as exc:
            raise ParseError(path, _line_of(text, str(s)), f"dynamics[{k}]: {exc}") from exc

    eq = _require(doc, "equilibrium")
    x_s = _matrix(_require(eq, "x_s", "equilibrium"), (n_x,), "equilibrium.x_s") if n_x else np.zeros(0)
    u_raw = eq.get("u_s", [])
    u_s = np.zeros(0) if n_u == 0 and len(u_raw) == 0 else _matrix(u_raw, (n_u,), "equilibrium.u_s")
    system = DynamicalSystem(n_x, n_u, exprs, x_s, u_s)

    reg = _require(doc, "region")
    x_box = _box(_require(reg, "x_box", "region"), n_x, "region.x_box")
    u_box = _box(reg.get("u_box", []), n_u, "region.u_box")
    F = E = None
    hs = reg.get("halfspaces")
    if hs is not None:
        F = np.atleast_2d(np.asarray(_require(hs, "F", "region.halfspaces"), dtype=float))
        if F.ndim != 2 or F.shape[1] != n_x:
            raise DimensionMismatch("region.halfspaces.F", f"shape {F.shape}")
        E = _matrix(hs.get("E", np.zeros((F.shape[0], n_u))), (F.shape[0], n_u), "region.halfspaces.E")
    region = Region(x_box, u_box, F, E)
    region.check_equilibrium(system)

    candidates = {}
    for name, verts in dict(_require(doc, "candidates")).items():
        if not isinstance(verts, list) or not verts:
            raise DimensionMismatch(f"candidates.{name}", "needs at least one vertex")
        A = [_matrix(v.get("A"), (n_x, n_x), f"candidates.{name}.A") for v in verts]
        B = [_matrix(v.get("B", np.zeros((n_x, n_u))), (n_x, n_u), f"candidates.{name}.B") for v in verts]
        candidates[name] = CandidateLDI(np.array(A), np.array(B).reshape(len(verts), n_x, n_u))

    families = {}
    for name, fam in dict(doc.get("families", {})).items():
        loose, tight = _require(fam, "loose", f"families.{name}"), _require(fam, "tight", f"families.{name}")
        for ref in (loose, tight):
            if ref not in candidates:
                raise DimensionMismatch(f"families.{name}", f"unknown candidate {ref!r}")
        try:
            families[name] = CandidateFamily(candidates[loose], candidates[tight])
        except ValueError as exc:
            raise DimensionMismatch(f"families.{name}", str(exc)) from None
    return Problem(system, region, candidates, families, raw=doc, path=path)


def load(path) -> Problem:
    path = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from exc
    return from_dict(doc, path, text)


def candidate_to_json(candidate: CandidateLDI) -> list:
    out = []
    for i in range(candidate.n_d):
        v = {"A": candidate.A[i].tolist()}
        if candidate.n_u:
            v["B"] = candidate.B[i].tolist()
        out.append(v)
    return out


def with_candidate(problem: Problem, name: str, candidate: CandidateLDI) -> dict:
    """Copy of the problem document with ``candidate`` stored under ``name``."""
    doc = copy.deepcopy(problem.raw)
    doc.setdefault("candidates", {})[name] = candidate_to_json(candidate)
    return doc


def bundled(name: str) -> Path:
    """Path of a problem file shipped with the package (``example1``, ``example2``)."""
    return Path(str(resources.files("ldicert") / "data" / f"{name}.json"))
