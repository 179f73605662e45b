"""Finite D-monoids, their morphisms, and free-monoid morphisms given by letter images."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import gfp
from .core import FiniteObject, InputError, Kind, SizeGuardError, validate_object

EXHAUSTIVE_TRIPLES = 2**22
SAMPLED_TRIPLES = 2**16
MAX_TABLE = 2048


class DMonoid:
    """A monoid whose carrier lives in one of the four varieties.

    Either pass a full multiplication ``table`` or override ``_mul_array`` for
    carriers too big to tabulate.
    """

    def __init__(self, carrier: FiniteObject, unit: int, table=None, names=None):
        self.carrier = carrier
        self.unit = int(unit)
        if table is not None:
            table = np.asarray(table, dtype=np.int64)
            self.__dict__["table"] = table
        self._names = list(names) if names is not None else None

    @property
    def size(self) -> int:
        return self.carrier.size

    @property
    def variety(self):
        return self.carrier.variety

    @property
    def kind(self) -> Kind:
        return self.carrier.kind

    def name(self, i: int) -> str:
        if self._names is not None:
            return self._names[i]
        return str(i)

    @property
    def names(self) -> list[str]:
        return [self.name(i) for i in range(self.size)]

    def _mul_array(self, xs, ys):
        return self.table[xs, ys]

    def mul_array(self, xs, ys) -> np.ndarray:
        xs, ys = np.broadcast_arrays(np.asarray(xs, dtype=np.int64), np.asarray(ys, dtype=np.int64))
        return self._mul_array(xs, ys)

    def mul(self, x: int, y: int) -> int:
        return int(self.mul_array(x, y))

    @cached_property
    def table(self) -> np.ndarray:
        n = self.size
        if n > MAX_TABLE:
            raise SizeGuardError(f"refusing to tabulate {n}x{n} multiplication", n)
        xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        return self.mul_array(xs, ys)

    # vector-space structure, used for Vect monoids
    def structure_constants(self) -> np.ndarray:
        """``c[i, j, k]``: coordinate k of ``e_i * e_j`` in the standard basis."""
        if self.kind is not Kind.VECT:
            raise InputError("structure constants only exist for vect monoids")
        b = self.carrier.basis()
        prod = self.mul_array(b[:, None], b[None, :])
        return self.carrier.coords[prod]

    @classmethod
    def from_structure_constants(cls, p: int, consts, unit_coords, names=None) -> "DMonoid":
        c = np.asarray(consts, dtype=np.int64) % p
        d = c.shape[0]
        obj = FiniteObject.vector_space(p, d)
        x = obj.coords
        prod = np.einsum("xa,yb,abk->xyk", x, x, c) % p
        return cls(obj, int(obj.encode(unit_coords)), obj.encode(prod), names=names)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.carrier.variety}, size={self.size})"


class ValidationReport(list):
    """Violations found; empty iff everything checked holds.

    ``exhaustive`` is False when triples were sampled because the carrier is large.
    """

    def __init__(self, items=(), exhaustive: bool = True, checked: int = 0):
        super().__init__(items)
        self.exhaustive = exhaustive
        self.checked = checked


def triple_batches(n: int, seed: int = 0, exhaustive_limit: int = EXHAUSTIVE_TRIPLES,
                   samples: int = SAMPLED_TRIPLES):
    """Yield (x, y, z) index batches: all n^3 triples when small, else a seeded sample."""
    if n**3 <= exhaustive_limit:
        ys, zs = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        ys, zs = ys.ravel(), zs.ravel()
        step = max(1, exhaustive_limit // 64 // max(1, n * n))
        for x0 in range(0, n, step):
            xs = np.repeat(np.arange(x0, min(n, x0 + step)), n * n)
            k = len(xs) // (n * n)
            yield xs, np.tile(ys, k), np.tile(zs, k)
        return
    rng = np.random.default_rng(seed)
    yield rng.integers(0, n, samples), rng.integers(0, n, samples), rng.integers(0, n, samples)


def _first(mask, *cols):
    i = int(np.argmax(mask))
    return tuple(int(c[i]) for c in cols)


def validate_dmonoid(m: DMonoid, seed: int = 0, exhaustive_limit: int = EXHAUSTIVE_TRIPLES,
                     samples: int = SAMPLED_TRIPLES) -> ValidationReport:
    """Check carrier, unit, associativity and the bimorphism law of the variety."""
    obj = m.carrier
    n = m.size
    nm = m.name
    out = list(validate_object(obj, m.names if n <= 4096 else None))
    if out:
        return ValidationReport(out)
    if not 0 <= m.unit < n:
        return ValidationReport([f"unit {m.unit} out of range"])
    allx = np.arange(n)
    left, right = m.mul_array(m.unit, allx), m.mul_array(allx, m.unit)
    if (left != allx).any():
        out.append(f"unit not left-neutral at {nm(int(np.argmax(left != allx)))}")
    if (right != allx).any():
        out.append(f"unit not right-neutral at {nm(int(np.argmax(right != allx)))}")
    exhaustive = n**3 <= exhaustive_limit
    found: dict[str, str] = {}
    checked = 0

    def note(law, mask, *cols):
        if law not in found and mask.any():
            found[law] = law + " at (" + ",".join(nm(v) for v in _first(mask, *cols)) + ")"

    for xs, ys, zs in triple_batches(n, seed, exhaustive_limit, samples):
        checked += len(xs)
        xy = m.mul_array(xs, ys)
        lhs = m.mul_array(xy, zs)
        rhs = m.mul_array(xs, m.mul_array(ys, zs))
        note("associativity violated", lhs != rhs, xs, ys, zs)
        if obj.kind is Kind.POS:
            le = obj.leq[xs, ys]
            bad_r = le & ~obj.leq[m.mul_array(xs, zs), m.mul_array(ys, zs)]
            bad_l = le & ~obj.leq[m.mul_array(zs, xs), m.mul_array(zs, ys)]
            note("multiplication not monotone on the right", bad_r, xs, ys, zs)
            note("multiplication not monotone on the left", bad_l, xs, ys, zs)
        elif obj.kind is Kind.JSL:
            j = obj.join
            yz = j[ys, zs]
            note("left distributivity violated", m.mul_array(xs, yz) != j[xy, m.mul_array(xs, zs)], xs, ys, zs)
            note("right distributivity violated", m.mul_array(yz, xs) != j[m.mul_array(ys, xs), m.mul_array(zs, xs)],
                 xs, ys, zs)
        elif obj.kind is Kind.VECT:
            yz = obj.vadd(ys, zs)
            note("not linear in the right argument", m.mul_array(xs, yz) != obj.vadd(xy, m.mul_array(xs, zs)),
                 xs, ys, zs)
            note("not linear in the left argument",
                 m.mul_array(yz, xs) != obj.vadd(m.mul_array(ys, xs), m.mul_array(zs, xs)), xs, ys, zs)
    if obj.kind is Kind.JSL:
        b = obj.bottom
        zl, zr = m.mul_array(allx, b), m.mul_array(b, allx)
        if (zl != b).any() or (zr != b).any():
            out.append(f"bottom not absorbing at {nm(int(np.argmax((zl != b) | (zr != b))))}")
    if obj.kind is Kind.VECT:
        xs, ys = (a.ravel() for a in np.meshgrid(allx, allx, indexing="ij")) if n * n <= exhaustive_limit else (
            np.random.default_rng(seed).integers(0, n, samples), np.random.default_rng(seed + 1).integers(0, n, samples))
        xy = m.mul_array(xs, ys)
        for c in range(obj.modulus):
            bad = (m.mul_array(xs, obj.vscale(c, ys)) != obj.vscale(c, xy)) | (
                m.mul_array(obj.vscale(c, xs), ys) != obj.vscale(c, xy))
            if bad.any():
                x, y = _first(bad, xs, ys)
                out.append(f"scalar {c} not compatible with multiplication at ({nm(x)},{nm(y)})")
                break
    out.extend(found.values())
    return ValidationReport(out, exhaustive=exhaustive, checked=checked)


# ---------------------------------------------------------------- morphisms


@dataclass(eq=False)
class MonoidMorphism:
    source: DMonoid
    target: DMonoid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)

    def __call__(self, x):
        return self.values[x]


def preserves_structure(src: FiniteObject, dst: FiniteObject, values) -> bool:
    """Whether ``values`` is a morphism of the variety from ``src`` to ``dst``."""
    v = np.asarray(values, dtype=np.int64)
    n = src.size
    if src.kind is Kind.SET:
        return True
    if src.kind is Kind.POS:
        return bool(np.all(~src.leq | dst.leq[v[:, None], v[None, :]]))
    if src.kind is Kind.JSL:
        return v[src.bottom] == dst.bottom and bool(np.all(v[src.join] == dst.join[v[:, None], v[None, :]]))
    xs, ys = (a.ravel() for a in np.meshgrid(np.arange(n), np.arange(n), indexing="ij"))
    if not np.all(v[src.vadd(xs, ys)] == dst.vadd(v[xs], v[ys])):
        return False
    return all(np.all(v[src.vscale(c, np.arange(n))] == dst.vscale(c, v)) for c in range(src.modulus))


def is_monoid_morphism(h: MonoidMorphism, chunk: int = 2**20) -> bool:
    """Exhaustive check: unit, multiplication and variety structure preserved."""
    src, dst, v = h.source, h.target, h.values
    if src.variety != dst.variety or v.shape != (src.size,):
        return False
    if v.min(initial=0) < 0 or v.max(initial=0) >= dst.size:
        return False
    if v[src.unit] != dst.unit:
        return False
    n = src.size
    rows = max(1, chunk // max(1, n))
    ys = np.arange(n)
    for x0 in range(0, n, rows):
        xs = np.arange(x0, min(n, x0 + rows))[:, None]
        if not np.array_equal(v[src.mul_array(xs, ys)], dst.mul_array(v[xs], v[ys])):
            return False
    return preserves_structure(src.carrier, dst.carrier, v)


# ---------------------------------------------------------------- free morphisms


@dataclass(frozen=True)
class LetterAssignment:
    """Letter images determining the unique D-monoid morphism from the free D-monoid."""

    alphabet: tuple
    target: DMonoid
    images: tuple

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "images", tuple(int(i) for i in self.images))
        if len(self.alphabet) != len(self.images):
            raise InputError("one image per letter required")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise InputError("alphabet has repeated symbols")
        for i in self.images:
            if not 0 <= i < self.target.size:
                raise InputError(f"letter image {i} outside target of size {self.target.size}")

    def letter_index(self, symbol) -> int:
        try:
            return self.alphabet.index(symbol)
        except ValueError:
            raise InputError(f"unknown symbol {symbol!r}") from None

    def word(self, w) -> tuple[int, ...]:
        """Letter indices of ``w`` (a string over one-character symbols or a sequence)."""
        return tuple(self.letter_index(s) for s in w)


def eval_word(f: LetterAssignment, w) -> int:
    """Image of the word ``w``: the unit for the empty word, else a left fold."""
    x = f.target.unit
    for i in f.word(w):
        x = f.target.mul(x, f.images[i])
    return x


def eval_word_right(f: LetterAssignment, w) -> int:
    x = f.target.unit
    for i in reversed(f.word(w)):
        x = f.target.mul(f.images[i], x)
    return x


@lru_cache(maxsize=512)
def eval_all(f: LetterAssignment, bound: int) -> np.ndarray:
    """Images of every word of length <= bound, in shortlex order."""
    from .languages import word_index

    wi = word_index(len(f.alphabet), bound)
    out = np.empty(wi.count, dtype=np.int64)
    out[0] = f.target.unit
    imgs = np.array(f.images, dtype=np.int64)
    for k in range(1, bound + 1):
        sl = slice(wi.offsets[k], wi.offsets[k + 1])
        out[sl] = f.target.mul_array(out[wi.parent[sl]], imgs[wi.last[sl]])
    out.setflags(write=False)
    return out


@dataclass
class FreeImage:
    """Image of a free morphism as a sub-D-monoid.

    ``inclusion[i]`` is the target element of sub element ``i``; ``witnesses[i]``
    is a formal combination ``((coeff, word), ...)`` mapping onto it. Set/Pos
    witnesses are single shortest words (shortlex least).
    """

    assignment: LetterAssignment
    monoid: DMonoid
    inclusion: np.ndarray
    witnesses: list

    @property
    def corestriction(self) -> LetterAssignment:
        pos = {int(t): i for i, t in enumerate(self.inclusion)}
        return LetterAssignment(self.assignment.alphabet, self.monoid,
                                tuple(pos[i] for i in self.assignment.images))

    @property
    def inclusion_morphism(self) -> MonoidMorphism:
        return MonoidMorphism(self.monoid, self.assignment.target, self.inclusion)


def eval_formal(f: LetterAssignment, witness) -> int:
    """Image of a formal combination of words (join for JSL, linear sum for Vect)."""
    t = f.target
    if t.kind in (Kind.SET, Kind.POS):
        (c, w), = witness
        return eval_word(f, [f.alphabet[i] for i in w])
    if t.kind is Kind.JSL:
        acc = t.carrier.bottom
        for _, w in witness:
            acc = int(t.carrier.join[acc, eval_word(f, [f.alphabet[i] for i in w])])
        return acc
    acc = int(t.carrier.encode(np.zeros(t.carrier.dimension)))
    for c, w in witness:
        img = eval_word(f, [f.alphabet[i] for i in w])
        acc = int(t.carrier.vadd(acc, t.carrier.vscale(c, img)))
    return acc


def image_of_free_morphism(f: LetterAssignment) -> FreeImage:
    t = f.target
    unit = t.unit
    seen = {unit: ()}
    order = [unit]
    frontier = [unit]
    while frontier:
        nxt = []
        for x in frontier:
            for li, img in enumerate(f.images):
                y = t.mul(x, img)
                if y not in seen:
                    seen[y] = seen[x] + (li,)
                    order.append(y)
                    nxt.append(y)
        frontier = nxt
    words = {x: ((1, w),) for x, w in seen.items()}
    obj = t.carrier
    if t.kind is Kind.JSL:
        elems = [obj.bottom] + [x for x in order if x != obj.bottom]
        wit = {obj.bottom: words.get(obj.bottom, ())}
        wit.update(words)
        changed = True
        while changed:
            changed = False
            for x in list(elems):
                for y in order:
                    z = int(obj.join[x, y])
                    if z not in wit:
                        wit[z] = wit[x] + tuple(t_ for t_ in wit[y] if t_ not in wit[x])
                        elems.append(z)
                        changed = True
        inclusion = np.array(elems, dtype=np.int64)
        sub_join = np.array([[elems.index(int(obj.join[a, b])) for b in elems] for a in elems])
        carrier = FiniteObject.semilattice(sub_join, 0)
        witnesses = [wit[x] for x in elems]
    elif t.kind is Kind.VECT:
        p = obj.modulus
        basis, bwit = [], []
        for x in order:
            cand = np.array([obj.coords[b] for b in basis] + [obj.coords[x]])
            if gfp.rank(cand, p) > len(basis):
                basis.append(x)
                bwit.append(words[x][0][1])
        k = len(basis)
        carrier = FiniteObject.vector_space(p, k)
        bc = np.array([obj.coords[b] for b in basis], dtype=np.int64).reshape(k, obj.dimension)
        inclusion = obj.encode((carrier.coords @ bc) % p)
        witnesses = [tuple((int(c), bwit[i]) for i, c in enumerate(row) if c) for row in carrier.coords]
        elems = inclusion.tolist()
    else:
        elems = order
        inclusion = np.array(elems, dtype=np.int64)
        if t.kind is Kind.POS:
            carrier = FiniteObject.poset(len(elems), obj.leq[np.ix_(inclusion, inclusion)])
        else:
            carrier = FiniteObject.set(len(elems))
        witnesses = [words[x] for x in elems]
    pos = {int(x): i for i, x in enumerate(inclusion)}
    prod = t.mul_array(inclusion[:, None], inclusion[None, :])
    table = np.vectorize(pos.__getitem__, otypes=[np.int64])(prod) if prod.size else prod
    sub = DMonoid(carrier, pos[unit], table, names=[t.name(int(x)) for x in inclusion])
    return FreeImage(f, sub, inclusion, witnesses)
