"""Input parsing, deterministic JSON output and SVG barcodes."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dgi import DgiMorphism, DgiSpace
from .filtrations import (
    Digraph,
    SimplicialComplex,
    digraph_filtration,
    monotone_values,
    sublevel_filtration,
)
from .linalg import ValidationError
from .perslap import PersistenceDgi


class InputError(ValidationError):
    """Malformed or unsupported input file."""


@dataclass
class Loaded:
    kind: str                       # "complex", "digraph", "dgi" or "persistence"
    persistence: PersistenceDgi | None = None
    space: DgiSpace | None = None
    structure: object = None        # SimplicialComplex or Digraph
    values: dict | None = None


def _parse_text(text: str):
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise InputError("empty input")
    head = lines[0].split()
    if head[0] == "complex":
        simp = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) < 2:
                raise InputError(f"complex line needs vertices and a value: {ln!r}")
            simp.append({"verts": [int(x) for x in parts[:-1]], "value": float(parts[-1])})
        return {"simplices": simp}
    if head[0] == "digraph":
        if len(head) != 2:
            raise InputError("digraph header must be 'digraph N'")
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 3:
                raise InputError(f"digraph line must be 'from to weight': {ln!r}")
            edges.append({"from": int(parts[0]), "to": int(parts[1]), "weight": float(parts[2])})
        return {"vertices": int(head[1]), "edges": edges}
    raise InputError(f"unknown text header {head[0]!r}; expected 'complex' or 'digraph N'")


def read_document(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from None
    try:
        return _parse_text(text)
    except (ValueError, IndexError) as exc:
        raise InputError(f"cannot parse {path}: {exc}") from None


def _dgi_from_doc(doc) -> DgiSpace:
    try:
        degs = doc["degrees"]
        grams = [np.asarray(d.get("gram", np.eye(int(d["dim"])).tolist()), dtype=float)
                 .reshape(int(d["dim"]), int(d["dim"])) for d in degs]
        ds = []
        for p in range(1, len(degs)):
            m = np.asarray(degs[p].get("d", []), dtype=float)
            ds.append(m.reshape(int(degs[p - 1]["dim"]), int(degs[p]["dim"])))
        labels = None
        if all("labels" in d for d in degs):
            labels = [d["labels"] for d in degs]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed DGI document: {exc}") from None
    return DgiSpace.from_matrices(grams, ds, labels)


def load_input(path: str, *, p_max: int = 3, base_level: bool = True, fill: bool = False) -> Loaded:
    doc = read_document(path)
    return load_document(doc, p_max=p_max, base_level=base_level, fill=fill)


def load_document(doc, *, p_max: int = 3, base_level: bool = True, fill: bool = False) -> Loaded:
    if not isinstance(doc, dict):
        raise InputError("top-level JSON value must be an object")
    try:
        if "simplices" in doc:
            entries = doc["simplices"]
            verts = [tuple(int(v) for v in e["verts"]) for e in entries]
            K = SimplicialComplex(verts, close=fill or bool(doc.get("close", False)))
            vals = {tuple(sorted(v)): float(e["value"]) for v, e in zip(verts, entries)
                    if e.get("value") is not None}
            vals = monotone_values(K, vals, fill=fill or bool(doc.get("close", False)))
            top = doc.get("max_degree", K.dim)
            P = sublevel_filtration(K, vals, int(top))
            return Loaded("complex", P, structure=K, values=vals)
        if "edges" in doc:
            n = int(doc["vertices"])
            edges = [(int(e["from"]), int(e["to"])) for e in doc["edges"]]
            G = Digraph(n, edges)
            w = {(int(e["from"]), int(e["to"])): float(e["weight"]) for e in doc["edges"]}
            P = digraph_filtration(G, w, p_max, base_level=base_level)
            return Loaded("digraph", P, structure=G, values=w)
        if "degrees" in doc:
            return Loaded("dgi", space=_dgi_from_doc(doc))
        if "spaces" in doc and "values" in doc:
            spaces = [_dgi_from_doc(s) for s in doc["spaces"]]
            steps = []
            for i, st in enumerate(doc.get("steps", [])):
                mats = [np.asarray(m, dtype=float).reshape(spaces[i + 1].dim(p), spaces[i].dim(p))
                        for p, m in enumerate(st["maps"])]
                steps.append(DgiMorphism(spaces[i], spaces[i + 1], mats))
            return Loaded("persistence", PersistenceDgi(doc["values"], spaces, steps))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed input: missing or invalid field {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise InputError(f"malformed input: {exc}") from None
    raise InputError("unrecognised input: expected 'simplices', 'edges', 'degrees' or 'spaces'")


def dgi_to_doc(S: DgiSpace) -> dict:
    degs = []
    for p in range(S.max_degree + 1):
        d = {"dim": S.dim(p), "gram": S.space(p).gram.tolist(), "labels": list(S.label(p))}
        if p >= 1:
            d["d"] = S.dmat(p).tolist()
        degs.append(d)
    return {"degrees": degs}


def morphism_to_doc(f: DgiMorphism) -> dict:
    return {"maps": [f.mat(p).tolist() for p in range(f.source.max_degree + 1)]}


def persistence_to_doc(P: PersistenceDgi) -> dict:
    return {"values": P.values.tolist(), "spaces": [dgi_to_doc(s) for s in P.spaces],
            "steps": [morphism_to_doc(f) for f in P.steps]}


# ---------------------------------------------------------------- output

def clean(obj, decimals: int = 12):
    """Round floats, normalise -0.0 and map infinities to strings, recursively."""
    if isinstance(obj, dict):
        return {str(k): clean(v, decimals) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v, decimals) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist(), decimals)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        x = round(x, decimals)
        return 0.0 if x == 0 else x
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), sort_keys=True, indent=2)


def barcode_svg(barcode, width: int = 640, row: int = 14, pad: int = 40) -> str:
    """Horizontal bars per degree; infinite bars end in an arrow."""
    from .analysis import INF

    bars = [(p, b, d) for p in barcode.degrees for b, d in barcode.degree(p)]
    finite = [x for _, b, d in bars for x in (b, d) if x != INF]
    lo = min(finite) if finite else 0.0
    hi = max(finite) if finite else 1.0
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    right = hi + 0.15 * span
    sx = lambda x: pad + (x - lo) / (right - lo) * (width - 2 * pad)  # noqa: E731
    n_rows = len(bars) + 2 * len(barcode.degrees)
    height = pad * 2 + row * max(n_rows, 1)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<rect width="100%" height="100%" fill="white"/>']
    y = pad
    for p in barcode.degrees:
        out.append(f'<text x="4" y="{y + row - 3}" font-family="sans-serif" font-size="11">H{p}</text>')
        y += row
        for b, d in barcode.degree(p):
            x0 = sx(b)
            x1 = sx(d if d != INF else right)
            out.append(f'<line x1="{x0:.2f}" y1="{y + row / 2:.2f}" x2="{x1:.2f}" y2="{y + row / 2:.2f}" '
                       'stroke="black" stroke-width="3"/>')
            if d == INF:
                cy = y + row / 2
                out.append(f'<polygon points="{x1:.2f},{cy:.2f} {x1 - 6:.2f},{cy - 4:.2f} '
                           f'{x1 - 6:.2f},{cy + 4:.2f}" fill="black"/>')
            y += row
        y += row
    axis_y = height - pad / 2
    out.append(f'<line x1="{pad}" y1="{axis_y}" x2="{width - pad}" y2="{axis_y}" stroke="gray"/>')
    for x in sorted(set(finite)):
        out.append(f'<text x="{sx(x):.2f}" y="{axis_y + 12}" font-family="sans-serif" '
                   f'font-size="9" text-anchor="middle">{x:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


__all__ = [
    "InputError",
    "Loaded",
    "barcode_svg",
    "clean",
    "dgi_to_doc",
    "dumps",
    "load_document",
    "load_input",
    "morphism_to_doc",
    "persistence_to_doc",
    "read_document",
]
