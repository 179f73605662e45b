"""The bundled example monoids and their canonical letter assignments over {a, b}."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

import numpy as np

from .core import FiniteObject, Kind, VarietyTag
from .dmonoid import DMonoid, LetterAssignment
from .documents import parse_monoid_spec

CORPUS = ("trivial", "z2", "b2", "flipflop", "chain2", "bool", "chain3", "gf2", "gf2_z2")

# letter images for a and b, by element name
CANONICAL_IMAGES = {
    "trivial": ("1", "1"),
    "z2": ("g", "1"),
    "b2": ("0", "1"),
    "flipflop": ("a", "b"),
    "chain2": ("0", "1"),
    "bool": ("0", "1"),
    "chain3": ("e", "0"),
    "gf2": ("1", "0"),
    "gf2_z2": ("g", "1"),
}


def document_text(name: str) -> str:
    return resources.files("schutzkit").joinpath("corpus", f"{name}.json").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load(name: str) -> DMonoid:
    if name not in CORPUS:
        raise KeyError(f"no corpus monoid named {name!r}")
    return parse_monoid_spec(document_text(name))


def corpus() -> dict[str, DMonoid]:
    return {name: load(name) for name in CORPUS}


def corpus_pairs(kind: Kind | None = None) -> list[tuple[str, str]]:
    """Ordered pairs of corpus monoids sharing a variety (and field)."""
    ms = corpus()
    return [(x, y) for x in CORPUS for y in CORPUS
            if ms[x].variety == ms[y].variety and (kind is None or ms[x].kind is Kind(kind))]


def canonical_assignment(name: str, alphabet=("a", "b")) -> LetterAssignment:
    m = load(name)
    images = [m.names.index(x) for x in CANONICAL_IMAGES[name]]
    return LetterAssignment(tuple(alphabet), m, tuple(images[: len(alphabet)]))


@lru_cache(maxsize=None)
def trivial_monoid(variety: VarietyTag) -> DMonoid:
    kind = variety.kind
    if kind is Kind.SET:
        obj = FiniteObject.set(1)
    elif kind is Kind.POS:
        obj = FiniteObject.poset(1, [[True]])
    elif kind is Kind.JSL:
        obj = FiniteObject.semilattice([[0]], 0)
    else:
        obj = FiniteObject.vector_space(variety.field_modulus, 0)
    return DMonoid(obj, 0, np.zeros((1, 1), dtype=np.int64), names=["1"])
