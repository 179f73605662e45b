"""JSON documents describing a single finite D-monoid.

Set/Pos/JSL documents list element names, the unit name and the
multiplication table by names; Pos adds ``order`` pairs (x <= y), JSL adds
a ``join`` table. Vect documents give ``field_modulus``, ``dimension``,
basis names in ``elements``, ``structure_constants[i][j]`` (coordinates of
e_i e_j) and the unit as a coordinate list.
"""

from __future__ import annotations

import json

import numpy as np

from .core import FiniteObject, InputError, Kind, VarietyTag
from .dmonoid import DMonoid, validate_dmonoid

KEYS = {
    Kind.SET: {"variety", "elements", "unit", "mult"},
    Kind.POS: {"variety", "elements", "unit", "mult", "order"},
    Kind.JSL: {"variety", "elements", "unit", "mult", "join"},
    Kind.VECT: {"variety", "field_modulus", "elements", "dimension", "structure_constants", "unit"},
}


def vector_names(basis: list[str], obj: FiniteObject) -> list[str]:
    out = []
    for row in obj.coords:
        terms = [(b if c == 1 else f"{c}{b}") for b, c in zip(basis, row.tolist()) if c]
        out.append("+".join(terms) or "0")
    return out


def _table(doc, key, index, n):
    rows = doc[key]
    if not isinstance(rows, list) or len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
        raise InputError(f"{key} table must be {n}x{n}")
    try:
        return np.array([[index[x] for x in row] for row in rows], dtype=np.int64).reshape(n, n)
    except KeyError as e:
        raise InputError(f"unknown element {e.args[0]!r} in {key} table") from None


def from_document(doc: dict, validate: bool = True) -> DMonoid:
    if not isinstance(doc, dict):
        raise InputError("document must be a JSON object")
    try:
        kind = Kind(doc.get("variety"))
    except ValueError:
        raise InputError(f"unknown variety {doc.get('variety')!r}") from None
    missing = KEYS[kind] - set(doc)
    extra = set(doc) - KEYS[kind]
    if missing:
        raise InputError(f"missing keys: {', '.join(sorted(missing))}")
    if extra:
        raise InputError(f"unexpected keys: {', '.join(sorted(extra))}")
    names = list(doc["elements"])
    if len(set(names)) != len(names):
        raise InputError("duplicate element names")
    if kind is Kind.VECT:
        tag = VarietyTag(kind, doc["field_modulus"])
        p, d = tag.field_modulus, int(doc["dimension"])
        if len(names) != d:
            raise InputError(f"need {d} basis names, got {len(names)}")
        consts = np.asarray(doc["structure_constants"], dtype=np.int64)
        if consts.shape != (d, d, d):
            raise InputError(f"structure constants must have shape {d}x{d}x{d}")
        unit = np.asarray(doc["unit"], dtype=np.int64)
        if unit.shape != (d,):
            raise InputError("unit must be a coordinate list")
        m = DMonoid.from_structure_constants(p, consts, unit)
        m._names = vector_names(names, m.carrier)
        m.basis_names = names
    else:
        index = {x: i for i, x in enumerate(names)}
        n = len(names)
        if doc["unit"] not in index:
            raise InputError(f"unknown unit element {doc['unit']!r}")
        table = _table(doc, "mult", index, n)
        if kind is Kind.SET:
            obj = FiniteObject.set(n)
        elif kind is Kind.POS:
            try:
                pairs = [(index[x], index[y]) for x, y in doc["order"]]
            except (KeyError, ValueError, TypeError):
                raise InputError("order must be a list of [smaller, larger] element pairs") from None
            obj = FiniteObject.poset_from_pairs(n, pairs)
            obj.pairs = doc["order"]
        else:
            join = _table(doc, "join", index, n)
            bottoms = [b for b in range(n) if np.array_equal(join[b], np.arange(n))]
            if not bottoms:
                raise InputError("join table has no bottom element")
            obj = FiniteObject.semilattice(join, bottoms[0])
        m = DMonoid(obj, index[doc["unit"]], table, names=names)
    if validate:
        problems = validate_dmonoid(m)
        if problems:
            raise InputError("invalid monoid: " + "; ".join(problems))
    return m


def parse_monoid_spec(text: str, validate: bool = True) -> DMonoid:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from None
    return from_document(doc, validate)


def to_document(m: DMonoid) -> dict:
    """Inverse of ``from_document`` (Pos order is emitted as its cover pairs)."""
    kind = m.kind
    if kind is Kind.VECT:
        basis = getattr(m, "basis_names", None) or [f"e{i}" for i in range(m.carrier.dimension)]
        return {
            "variety": "vect",
            "field_modulus": m.carrier.modulus,
            "elements": list(basis),
            "dimension": m.carrier.dimension,
            "structure_constants": m.structure_constants().tolist(),
            "unit": m.carrier.coords[m.unit].tolist(),
        }
    names = m.names
    doc = {
        "variety": kind.value,
        "elements": names,
        "unit": names[m.unit],
        "mult": [[names[int(x)] for x in row] for row in m.table],
    }
    if kind is Kind.POS:
        pairs = getattr(m.carrier, "pairs", None)
        if pairs is None:
            lt = m.carrier.leq & ~np.eye(m.size, dtype=bool)
            cover = lt & ~((lt.astype(np.int64) @ lt.astype(np.int64)) > 0)
            pairs = [[names[x], names[y]] for x, y in np.argwhere(cover)]
        doc["order"] = [list(pq) for pq in pairs]
    elif kind is Kind.JSL:
        doc["join"] = [[names[int(x)] for x in row] for row in m.carrier.join]
    return doc


def serialize_monoid(m: DMonoid) -> str:
    return json.dumps(to_document(m), indent=2, ensure_ascii=False) + "\n"
