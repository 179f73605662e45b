"""Product constructions: the quotient M∗N, the Klíma–Polák closure and
closed-subset semiring, the semilattice tensor product, lifted S-algebras,
triangular monoids and the Schützenberger product M⋄N."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .core import (FiniteObject, InputError, Kind, SizeGuardError, enumerate_valuations,
                   product_object)
from .dmonoid import DMonoid, MonoidMorphism, ValidationReport, _first, is_monoid_morphism, \
    preserves_structure

MAX_STAR = 4096
MAX_LIFT_BASE = 20
MAX_CLOSED_PAIRS = 16
MAX_TENSOR_PAIRS = 16


def _same_variety(m: DMonoid, n: DMonoid):
    if m.variety != n.variety:
        raise InputError(f"variety mismatch: {m.variety} vs {n.variety}")


def _bits(mask: int, width: int) -> list[int]:
    return [i for i in range(width) if (mask >> i) & 1]


# ---------------------------------------------------------------- M ∗ N


class StarProduct(DMonoid):
    """The D-monoid M∗N.

    ``gen[m, n]`` is the element m∗n. ``vectors[x]`` is the image of ``x`` in
    S^(P×Q), coordinate ``p_index * |Q| + q_index``, where P and Q are the
    valuation lists of M and N in enumeration order.
    """

    def __init__(self, left: DMonoid, right: DMonoid):
        _same_variety(left, right)
        self.left, self.right = left, right
        kind = left.kind
        nm, nn = left.size, right.size
        if kind in (Kind.SET, Kind.POS):
            if nm * nn > MAX_STAR:
                raise SizeGuardError(f"|M∗N| = {nm * nn} exceeds cap {MAX_STAR}", nm * nn)
            carrier = product_object(left.carrier, right.carrier)
            self.gen = np.arange(nm * nn, dtype=np.int64).reshape(nm, nn)
            super().__init__(carrier, int(self.gen[left.unit, right.unit]))
        elif kind is Kind.VECT:
            p = left.carrier.modulus
            dm, dn = left.carrier.dimension, right.carrier.dimension
            if p ** (dm * dn) > MAX_STAR:
                raise SizeGuardError(f"|M∗N| = {p ** (dm * dn)} exceeds cap {MAX_STAR}", p ** (dm * dn))
            carrier = FiniteObject.vector_space(p, dm * dn)
            cm, cn = left.structure_constants(), right.structure_constants()
            self.constants = np.einsum("ikr,jls->ijklrs", cm, cn).reshape(dm * dn, dm * dn, dm * dn) % p
            outer = np.einsum("xi,yj->xyij", left.carrier.coords, right.carrier.coords).reshape(nm, nn, dm * dn)
            self.gen = carrier.encode(outer % p)
            super().__init__(carrier, int(self.gen[left.unit, right.unit]))
        else:
            self._build_jsl()

    # valuations of the factors, enumerated lazily
    @cached_property
    def left_valuations(self):
        return enumerate_valuations(self.left.carrier)

    @cached_property
    def right_valuations(self):
        return enumerate_valuations(self.right.carrier)

    @cached_property
    def generator_vectors(self) -> np.ndarray:
        """v[m, n, (p, q)] = p(m)·q(n) in S."""
        s = self.left.variety.semiring
        pm = np.array([v.values for v in self.left_valuations]).T  # (|M|, |P|)
        qn = np.array([v.values for v in self.right_valuations]).T
        out = s.mul(pm[:, None, :, None], qn[None, :, None, :])
        return out.reshape(self.left.size, self.right.size, -1)

    @cached_property
    def vectors(self) -> np.ndarray:
        """Each element's coordinates in S^(P×Q)."""
        if self.kind is Kind.JSL:
            width = len(self.left_valuations) * len(self.right_valuations)
            return np.array([[(x >> i) & 1 for i in range(width)] for x in self.masks], dtype=np.int64)
        if self.kind in (Kind.SET, Kind.POS):
            return self.generator_vectors.reshape(self.size, -1)
        p = self.carrier.modulus
        pv = np.array([v.values for v in self.left_valuations])[:, self.left.carrier.basis()]   # (|P|, dm)
        qv = np.array([v.values for v in self.right_valuations])[:, self.right.carrier.basis()]  # (|Q|, dn)
        basis_vecs = np.einsum("pi,qj->ijpq", pv, qv).reshape(pv.shape[1] * qv.shape[1], -1) % p
        return (self.carrier.coords @ basis_vecs) % p

    def basis_vectors(self) -> np.ndarray:
        """Rows v_{e_i, f_j} over all valuation pairs (Vect only)."""
        if self.kind is not Kind.VECT:
            raise InputError("basis vectors only exist for vect")
        return self.vectors[self.carrier.basis()]

    def _build_jsl(self):
        left, right = self.left, self.right
        nm, nn = left.size, right.size
        gv = self.generator_vectors
        width = gv.shape[2]
        weights = [1 << i for i in range(width)]
        gmask = [[int(sum(w for w, b in zip(weights, gv[m, n]) if b)) for n in range(nn)] for m in range(nm)]
        found = {0}
        frontier = [0]
        gens = sorted({g for row in gmask for g in row})
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = x | g
                    if y not in found:
                        if len(found) >= MAX_STAR:
                            raise SizeGuardError(f"|M∗N| exceeds cap {MAX_STAR}", len(found) + 1)
                        found.add(y)
                        nxt.append(y)
            frontier = nxt
        masks = sorted(found)
        self.masks = masks
        pos = {x: i for i, x in enumerate(masks)}
        self._mask_pos = pos
        self.gen = np.array([[pos[g] for g in row] for row in gmask], dtype=np.int64)
        k = len(masks)
        join = np.array([[pos[a | b] for b in masks] for a in masks], dtype=np.int64).reshape(k, k)
        carrier = FiniteObject.semilattice(join, pos[0])
        # canonical maximal witness W(x) = {(m, n) : v_{m,n} <= x}
        gflat = [gmask[m][n] for m in range(nm) for n in range(nn)]
        wit = [[(i // nn, i % nn) for i, g in enumerate(gflat) if g & ~x == 0] for x in masks]
        table = np.zeros((k, k), dtype=np.int64)
        for i in range(k):
            for j in range(k):
                acc = 0
                for m, n in wit[i]:
                    for m2, n2 in wit[j]:
                        acc |= gmask[left.mul(m, m2)][right.mul(n, n2)]
                table[i, j] = pos[acc]
        self.witness = wit
        super().__init__(carrier, int(self.gen[left.unit, right.unit]), table)

    def _mul_array(self, xs, ys):
        if self.kind in (Kind.SET, Kind.POS):
            nn = self.right.size
            return self.left.mul_array(xs // nn, ys // nn) * nn + self.right.mul_array(xs % nn, ys % nn)
        if self.kind is Kind.VECT:
            c = self.carrier.coords
            p = self.carrier.modulus
            out = np.einsum("...a,...b,abk->...k", c[xs], c[ys], self.constants) % p
            return self.carrier.encode(out)
        return self.table[xs, ys]

    def name(self, i: int) -> str:
        if self.kind in (Kind.SET, Kind.POS):
            nn = self.right.size
            return f"{self.left.name(i // nn)}*{self.right.name(i % nn)}"
        return "".join(map(str, self.vectors[i])) if self.kind is Kind.JSL else \
            "".join(map(str, self.carrier.coords[i]))

    def valuation_index(self, p, q) -> tuple[int, int]:
        """Positions of valuations p (on M) and q (on N) in the enumeration lists."""
        pv = np.asarray(getattr(p, "values", p))
        qv = np.asarray(getattr(q, "values", q))
        try:
            i = next(k for k, v in enumerate(self.left_valuations) if np.array_equal(v.values, pv))
            j = next(k for k, v in enumerate(self.right_valuations) if np.array_equal(v.values, qv))
        except StopIteration:
            raise InputError("not a valuation of the factor") from None
        return i, j


@lru_cache(maxsize=128)
def star_product(m: DMonoid, n: DMonoid) -> StarProduct:
    return StarProduct(m, n)


def generator_law_violations(sp: StarProduct) -> list[tuple[int, int, int, int]]:
    """All (m, n, m', n') with (m∗n)(m'∗n') != (mm')∗(nn')."""
    nm, nn = sp.left.size, sp.right.size
    m, n, m2, n2 = (a.ravel() for a in np.meshgrid(np.arange(nm), np.arange(nn), np.arange(nm), np.arange(nn),
                                                   indexing="ij"))
    lhs = sp.mul_array(sp.gen[m, n], sp.gen[m2, n2])
    rhs = sp.gen[sp.left.mul_array(m, m2), sp.right.mul_array(n, n2)]
    bad = np.nonzero(lhs != rhs)[0]
    return [(int(m[i]), int(n[i]), int(m2[i]), int(n2[i])) for i in bad]


# ---------------------------------------------------------------- closure operator


def _jsl_ideals(obj: FiniteObject) -> list[int]:
    """All ideals (nonempty down-sets closed under join) as bitmasks, by brute force."""
    n = obj.size
    if n > 16:
        raise SizeGuardError(f"ideal brute force over 2^{n} subsets", 2**n)
    order = obj.order
    out = []
    for mask in range(1, 1 << n):
        els = _bits(mask, n)
        if not all((mask >> y) & 1 for x in els for y in range(n) if order[y, x]):
            continue
        if all((mask >> int(obj.join[x, y])) & 1 for x in els for y in els):
            out.append(mask)
    return out


class KPClosure:
    """The closure operator [X] on subsets of M×N, pairs as bits ``m * |N| + n``."""

    def __init__(self, m: DMonoid, n: DMonoid):
        if m.kind is not Kind.JSL or n.kind is not Kind.JSL:
            raise InputError("the closure operator is defined for jsl monoids")
        self.m, self.n = m, n
        nm, nn = m.size, n.size
        self.width = nm * nn
        self.regions = []
        for i in _jsl_ideals(m.carrier):
            for j in _jsl_ideals(n.carrier):
                r = 0
                for x in range(nm):
                    for y in range(nn):
                        if not (i >> x) & 1 and not (j >> y) & 1:
                            r |= 1 << (x * nn + y)
                self.regions.append(r)

    def __call__(self, x: int) -> int:
        full = (1 << self.width) - 1
        out = full
        for r in self.regions:
            if r & x == 0:
                out &= ~r
        return out & full

    def to_mask(self, pairs) -> int:
        return sum(1 << (a * self.n.size + b) for a, b in pairs)

    def to_pairs(self, mask: int) -> frozenset:
        return frozenset(divmod(i, self.n.size) for i in _bits(mask, self.width))


def kp_closure(x, m: DMonoid, n: DMonoid) -> frozenset:
    """[X]: pairs (m, n) such that every ideal pair I∌m, J∌n is hit by some (x, y)∈X with x∉I, y∉J."""
    c = KPClosure(m, n)
    return c.to_pairs(c(c.to_mask(x)))


class ClosedSetSemiring(DMonoid):
    """Closed subsets of M×N with [X]∨[Y] = [X∪Y] and [X][Y] = [XY]; ``sets[i]`` is a pair bitmask."""

    def __init__(self, m: DMonoid, n: DMonoid):
        _same_variety(m, n)
        c = KPClosure(m, n)
        if c.width > MAX_CLOSED_PAIRS:
            raise SizeGuardError(f"2^{c.width} subsets of M×N exceed the cap", 2**c.width)
        self.closure = c
        sets = sorted({c(x) for x in range(1 << c.width)})
        self.sets = sets
        pos = {s: i for i, s in enumerate(sets)}
        k = len(sets)
        nn = n.size
        pairs = [[divmod(i, nn) for i in _bits(s, c.width)] for s in sets]
        join = np.array([[pos[c(a | b)] for b in sets] for a in sets], dtype=np.int64).reshape(k, k)
        table = np.zeros((k, k), dtype=np.int64)
        for i in range(k):
            for j in range(k):
                prod = 0
                for a, b in pairs[i]:
                    for a2, b2 in pairs[j]:
                        prod |= 1 << (m.mul(a, a2) * nn + n.mul(b, b2))
                table[i, j] = pos[c(prod)]
        self.gen = np.array([[pos[c(1 << (a * nn + b))] for b in range(nn)] for a in range(m.size)])
        carrier = FiniteObject.semilattice(join, pos[c(0)])
        super().__init__(carrier, int(self.gen[m.unit, n.unit]), table)
        self.left, self.right = m, n

    def name(self, i: int) -> str:
        ps = sorted(self.closure.to_pairs(self.sets[i]))
        return "{" + ",".join(f"({self.left.name(a)},{self.right.name(b)})" for a, b in ps) + "}"


def jsl_closed_semiring(m: DMonoid, n: DMonoid) -> ClosedSetSemiring:
    return ClosedSetSemiring(m, n)


def closed_semiring_isomorphism(sp: StarProduct, cs: ClosedSetSemiring) -> np.ndarray | None:
    """The map m∗n ↦ [{(m, n)}] extended by joins, if it is a well-defined isomorphism."""
    if sp.size != cs.size:
        return None
    phi = {}
    for a in range(sp.left.size):
        for b in range(sp.right.size):
            x, y = int(sp.gen[a, b]), int(cs.gen[a, b])
            if phi.setdefault(x, y) != y:
                return None
    frontier = list(phi)
    gens = list(phi)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                z = int(sp.carrier.join[x, g])
                w = int(cs.carrier.join[phi[x], phi[g]])
                if z not in phi:
                    phi[z] = w
                    nxt.append(z)
                elif phi[z] != w:
                    return None
        frontier = nxt
    if len(phi) != sp.size or len(set(phi.values())) != cs.size:
        return None
    v = np.array([phi[i] for i in range(sp.size)], dtype=np.int64)
    if not np.array_equal(v[sp.table], cs.table[v[:, None], v[None, :]]):
        return None
    if v[sp.unit] != cs.unit or v[sp.carrier.bottom] != cs.carrier.bottom:
        return None
    if not np.array_equal(v[sp.carrier.join], cs.carrier.join[v[:, None], v[None, :]]):
        return None
    return v


# ---------------------------------------------------------------- semilattice tensor


@dataclass
class TensorProduct:
    """A⊗B as a quotient of P(A×B): ``t[a, b]`` is the class of {(a, b)};
    ``classes[i]`` is the least pair bitmask in class ``i``."""

    carrier: FiniteObject
    t: np.ndarray
    classes: list[int]
    class_of: np.ndarray


def tensor_jsl_oracle(a: FiniteObject, b: FiniteObject) -> TensorProduct:
    if a.kind is not Kind.JSL or b.kind is not Kind.JSL:
        raise InputError("tensor oracle needs two join-semilattices")
    na, nb = a.size, b.size
    w = na * nb
    if w > MAX_TENSOR_PAIRS:
        raise SizeGuardError(f"|A|·|B| = {w} exceeds cap {MAX_TENSOR_PAIRS}", w)

    def bit(x, y):
        return 1 << (x * nb + y)

    rel = []
    for x in range(na):
        for y in range(nb):
            for y2 in range(nb):
                rel.append((bit(x, int(b.join[y, y2])), bit(x, y) | bit(x, y2)))
    for y in range(nb):
        for x in range(na):
            for x2 in range(na):
                rel.append((bit(int(a.join[x, x2]), y), bit(x, y) | bit(x2, y)))
    for x in range(na):
        rel.append((bit(x, b.bottom), 0))
    for y in range(nb):
        rel.append((bit(a.bottom, y), 0))
    n = 1 << w
    z = np.arange(n, dtype=np.int64)
    src = np.concatenate([z | r for r, _ in rel])
    dst = np.concatenate([z | s for _, s in rel])
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    first = {}
    for x, lab in enumerate(labels.tolist()):
        first.setdefault(lab, x)
    classes = sorted(first.values())
    pos = {labels[c]: i for i, c in enumerate(classes)}
    class_of = np.array([pos[lab] for lab in labels.tolist()], dtype=np.int64)
    cl = np.array(classes, dtype=np.int64)
    join = class_of[cl[:, None] | cl[None, :]]
    t = np.array([[class_of[bit(x, y)] for y in range(nb)] for x in range(na)], dtype=np.int64)
    return TensorProduct(FiniteObject.semilattice(join, int(class_of[0])), t, classes, class_of)


def tensor_image_in_star(tp: TensorProduct, sp: StarProduct) -> set[int] | None:
    """Image of A⊗B in S^(P×Q) under [X] ↦ ⋁ v_{m,n}; None if not well defined."""
    nn = sp.right.size
    gv = sp.generator_vectors
    weights = 1 << np.arange(gv.shape[2], dtype=object)
    gm = [[int(sum(int(w) for w, bb in zip(weights, gv[m, n]) if bb)) for n in range(nn)]
          for m in range(sp.left.size)]
    img: dict[int, int] = {}
    for x in range(tp.class_of.size):
        v = 0
        for i in _bits(x, sp.left.size * nn):
            v |= gm[i // nn][i % nn]
        c = int(tp.class_of[x])
        if img.setdefault(c, v) != v:
            return None
    return set(img.values())


def tensor_embedding_matches_star(m: DMonoid, n: DMonoid) -> bool:
    sp = star_product(m, n)
    img = tensor_image_in_star(tensor_jsl_oracle(m.carrier, n.carrier), sp)
    return img is not None and img == set(sp.masks)


# ---------------------------------------------------------------- lifted S-algebras


def _chunk_tables(images: list[int], width: int) -> list[np.ndarray]:
    """Byte tables so that OR of ``images[i]`` over bits i of a mask is a few lookups."""
    out = []
    for c in range(0, width, 8):
        tab = np.zeros(256, dtype=np.int64)
        for byte in range(256):
            acc = 0
            for i in range(8):
                if (byte >> i) & 1 and c + i < width:
                    acc |= images[c + i]
            tab[byte] = acc
        out.append(tab)
    return out


def _apply_chunks(tables, masks) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.int64)
    out = np.zeros_like(masks)
    for k, tab in enumerate(tables):
        out |= tab[(masks >> (8 * k)) & 255]
    return out


class LiftedSAlgebra:
    """The free S-algebra on M∗N: subsets (Set), down-sets (Pos), or M∗N itself (JSL, Vect).

    Set/Pos elements are bitmasks over M∗N elements; ``masks[i]`` is element i.
    """

    def __init__(self, base: StarProduct):
        self.base = base
        self.variety = base.variety
        kind = base.kind
        k = base.size
        if kind in (Kind.SET, Kind.POS):
            if k > MAX_LIFT_BASE:
                raise SizeGuardError(f"lift of |M∗N| = {k} would have 2^{k} elements (cap {MAX_LIFT_BASE})", 2**k)
            self.width = k
            table = base.table
            # left action of each base element on masks, byte-chunked
            self._act = [_chunk_tables([1 << int(table[x, y]) for y in range(k)], k) for x in range(k)]
            if kind is Kind.SET:
                self.masks = np.arange(1 << k, dtype=np.int64)
                self._down = None
                self.eta = (1 << np.arange(k, dtype=np.int64))
            else:
                order = base.carrier.leq
                principal = [int(sum(1 << y for y in range(k) if order[y, x])) for x in range(k)]
                self._down = _chunk_tables(principal, k)
                all_masks = np.arange(1 << k, dtype=np.int64)
                self.masks = np.unique(_apply_chunks(self._down, all_masks))
                self.eta = np.searchsorted(self.masks, np.array(principal, dtype=np.int64))
            self.zero = 0
            self.one = int(self.eta[base.unit])
            self.size = len(self.masks)
        else:
            self.size = k
            self.eta = np.arange(k, dtype=np.int64)
            self.zero = int(base.carrier.bottom) if kind is Kind.JSL else 0
            self.one = base.unit

    @property
    def kind(self) -> Kind:
        return self.base.kind

    def _index(self, masks):
        if self.kind is Kind.SET:
            return masks
        return np.searchsorted(self.masks, masks)

    @cached_property
    def obj(self) -> FiniteObject:
        """Underlying carrier in the variety."""
        if self.kind is Kind.SET:
            return FiniteObject.set(self.size)
        if self.kind is Kind.POS:
            m = self.masks
            return FiniteObject.poset(self.size, (m[:, None] & ~m[None, :]) == 0)
        return self.base.carrier

    def add_array(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64))
        if self.kind in (Kind.SET, Kind.POS):
            return self._index(self.masks[x] | self.masks[y])
        if self.kind is Kind.JSL:
            return self.base.carrier.join[x, y]
        return self.base.carrier.vadd(x, y)

    def mul_array(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64))
        if self.kind in (Kind.SET, Kind.POS):
            mx, my = self.masks[x], self.masks[y]
            out = np.zeros_like(mx)
            for b in range(self.width):
                sel = ((mx >> b) & 1).astype(bool)
                if sel.any():
                    out[sel] |= _apply_chunks(self._act[b], my[sel])
            if self._down is not None:
                out = _apply_chunks(self._down, out)
            return self._index(out)
        return self.base.mul_array(x, y)

    def scale(self, c: int, x):
        x = np.asarray(x, dtype=np.int64)
        if self.kind is Kind.VECT:
            return self.base.carrier.vscale(c, x)
        return x if c else np.full_like(x, self.zero)

    def name(self, i: int) -> str:
        if self.kind in (Kind.SET, Kind.POS):
            return "{" + ",".join(self.base.name(b) for b in _bits(int(self.masks[i]), self.width)) + "}"
        return self.base.name(i)

    def members(self, i: int) -> list[int]:
        """Base elements in lifted element ``i`` (Set/Pos)."""
        return _bits(int(self.masks[i]), self.width)

    def __repr__(self):
        return f"LiftedSAlgebra({self.variety}, size={self.size})"


@lru_cache(maxsize=128)
def lift_algebra(sp: StarProduct) -> LiftedSAlgebra:
    return LiftedSAlgebra(sp)


def validate_salgebra(a: LiftedSAlgebra, seed: int = 0, exhaustive_limit: int = 2**21,
                      samples: int = 2**15) -> ValidationReport:
    """S-algebra laws: additive commutative monoid, multiplicative monoid,
    distributivity, zero absorbing, idempotent addition for Boolean S, and
    multiplicativity of eta."""
    n = a.size
    nm = a.name
    out = []
    exhaustive = n**3 <= exhaustive_limit
    if exhaustive:
        xs, ys, zs = (t.ravel() for t in np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij"))
    else:
        rng = np.random.default_rng(seed)
        xs, ys, zs = (rng.integers(0, n, samples) for _ in range(3))

    def check(law, mask, *cols):
        if mask.any():
            out.append(law + " at (" + ",".join(nm(v) for v in _first(mask, *cols)) + ")")

    add, mul = a.add_array, a.mul_array
    check("addition not commutative", add(xs, ys) != add(ys, xs), xs, ys)
    check("addition not associative", add(add(xs, ys), zs) != add(xs, add(ys, zs)), xs, ys, zs)
    check("zero not additive identity", add(xs, a.zero) != xs, xs)
    check("multiplication not associative", mul(mul(xs, ys), zs) != mul(xs, mul(ys, zs)), xs, ys, zs)
    check("one not a unit", (mul(xs, a.one) != xs) | (mul(a.one, xs) != xs), xs)
    check("left distributivity violated", mul(xs, add(ys, zs)) != add(mul(xs, ys), mul(xs, zs)), xs, ys, zs)
    check("right distributivity violated", mul(add(ys, zs), xs) != add(mul(ys, xs), mul(zs, xs)), xs, ys, zs)
    check("zero not absorbing", (mul(xs, a.zero) != a.zero) | (mul(a.zero, xs) != a.zero), xs)
    if a.variety.semiring.boolean:
        check("addition not idempotent", add(xs, xs) != xs, xs)
    k = a.base.size
    bx, by = (t.ravel() for t in np.meshgrid(np.arange(k), np.arange(k), indexing="ij"))
    bad = mul(a.eta[bx], a.eta[by]) != a.eta[a.base.mul_array(bx, by)]
    if bad.any():
        x, y = _first(bad, bx, by)
        out.append(f"eta not multiplicative at ({a.base.name(x)},{a.base.name(y)})")
    if a.eta[a.base.unit] != a.one:
        out.append("eta does not send the unit to one")
    return ValidationReport(out, exhaustive=exhaustive, checked=int(xs.size))


# ---------------------------------------------------------------- triangular monoids


class TriangularMonoid(DMonoid):
    """M × A × N with (m,a,n)(m',a',n') = (mm', f(m)a' + a g(n'), nn'), unit (1, 0, 1).

    Element index is (m * |A| + a) * |N| + n.
    """

    def __init__(self, algebra: LiftedSAlgebra, f, g, left: DMonoid, right: DMonoid, check: bool = True):
        _same_variety(left, right)
        if left.variety != algebra.variety:
            raise InputError("variety mismatch between factors and middle algebra")
        self.algebra, self.left, self.right = algebra, left, right
        self.f = np.asarray(f, dtype=np.int64)
        self.g = np.asarray(g, dtype=np.int64)
        if check:
            for name, h, src in (("f", self.f, left), ("g", self.g, right)):
                problem = _multiplicative_problem(h, src, algebra)
                if problem:
                    raise InputError(f"{name} {problem}")
        carrier = product_object(left.carrier, algebra.obj, right.carrier)
        super().__init__(carrier, self.encode(left.unit, algebra.zero, right.unit))

    def encode(self, m, a, n):
        return (np.asarray(m) * self.algebra.size + a) * self.right.size + n

    def decode(self, x):
        x = np.asarray(x, dtype=np.int64)
        nn, na = self.right.size, self.algebra.size
        return x // (nn * na), (x // nn) % na, x % nn

    def _mul_array(self, xs, ys):
        m, a, n = self.decode(xs)
        m2, a2, n2 = self.decode(ys)
        A = self.algebra
        mid = A.add_array(A.mul_array(self.f[m], a2), A.mul_array(a, self.g[n2]))
        return self.encode(self.left.mul_array(m, m2), mid, self.right.mul_array(n, n2))

    def name(self, i: int) -> str:
        m, a, n = (int(v) for v in self.decode(i))
        return f"({self.left.name(m)},{self.algebra.name(a)},{self.right.name(n)})"

    @cached_property
    def project_left(self) -> MonoidMorphism:
        return MonoidMorphism(self, self.left, self.decode(np.arange(self.size))[0])

    @cached_property
    def project_right(self) -> MonoidMorphism:
        return MonoidMorphism(self, self.right, self.decode(np.arange(self.size))[2])


def _multiplicative_problem(h, src: DMonoid, algebra: LiftedSAlgebra) -> str | None:
    if h.shape != (src.size,) or h.min() < 0 or h.max() >= algebra.size:
        return "has the wrong shape or range"
    if h[src.unit] != algebra.one:
        return "does not send the unit to one"
    xs, ys = (t.ravel() for t in np.meshgrid(np.arange(src.size), np.arange(src.size), indexing="ij"))
    bad = h[src.mul_array(xs, ys)] != algebra.mul_array(h[xs], h[ys])
    if bad.any():
        x, y = _first(bad, xs, ys)
        return f"is not multiplicative at ({src.name(x)},{src.name(y)})"
    if not preserves_structure(src.carrier, algebra.obj, h):
        return "does not preserve the carrier structure"
    return None


def triangular_monoid(algebra, f, g, left, right) -> TriangularMonoid:
    f = getattr(f, "values", f)
    g = getattr(g, "values", g)
    return TriangularMonoid(algebra, f, g, left, right)


class SchutzProduct(TriangularMonoid):
    """M⋄N: the triangular monoid on the lift of M∗N with f = η(−∗1), g = η(1∗−)."""

    def __init__(self, left: DMonoid, right: DMonoid):
        _same_variety(left, right)
        self.star = star_product(left, right)
        middle = lift_algebra(self.star)
        f = middle.eta[self.star.gen[:, right.unit]]
        g = middle.eta[self.star.gen[left.unit, :]]
        super().__init__(middle, f, g, left, right)

    @property
    def middle(self) -> LiftedSAlgebra:
        return self.algebra

    def middle_valuation(self, p, q) -> np.ndarray:
        """Values of the S-algebra extension of p∗q on every middle element."""
        sp, mid = self.star, self.algebra
        pv = np.asarray(getattr(p, "values", p), dtype=np.int64)
        qv = np.asarray(getattr(q, "values", q), dtype=np.int64)
        s = self.variety.semiring
        kind = self.kind
        if kind in (Kind.SET, Kind.POS):
            nn = self.right.size
            base = np.arange(sp.size)
            on = s.mul(pv[base // nn], qv[base % nn])
            hit = int(sum(1 << int(b) for b in np.nonzero(on)[0]))
            return ((mid.masks & hit) != 0).astype(np.int64)
        if kind is Kind.JSL:
            i, j = sp.valuation_index(pv, qv)
            return sp.vectors[:, i * len(sp.right_valuations) + j]
        mb, nb = self.left.carrier.basis(), self.right.carrier.basis()
        w = np.outer(pv[mb], qv[nb]).ravel()
        return (sp.carrier.coords @ w) % s.modulus

    def star_valuation(self, p, q) -> np.ndarray:
        """p∗q on M∗N elements (the middle valuation before lifting)."""
        return self.middle_valuation(p, q)[self.algebra.eta]


@lru_cache(maxsize=64)
def schutzenberger(m: DMonoid, n: DMonoid) -> SchutzProduct:
    return SchutzProduct(m, n)


def schutz_size_law(m: DMonoid, n: DMonoid) -> int:
    """|M|·2^(|M||N|)·|N|: the Set-case carrier size."""
    return m.size * 2 ** (m.size * n.size) * n.size


def projections_are_morphisms(sp: TriangularMonoid) -> tuple[bool, bool]:
    return is_monoid_morphism(sp.project_left), is_monoid_morphism(sp.project_right)
