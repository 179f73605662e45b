"""Finite carriers in Set, Pos, JSL and Vect over GF(p), the output semiring,
and structure-preserving valuations into it."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_VALUATION_CAP = 2**20
MAX_VECTOR_CARRIER = 4096


class SchutzError(Exception):
    pass


class InputError(SchutzError, ValueError):
    """Malformed or mismatched input (CLI exit code 2)."""


class SizeGuardError(SchutzError):
    """A construction or enumeration would exceed its configured cap (exit code 3)."""

    def __init__(self, message: str, size: int | None = None):
        super().__init__(message)
        self.size = size


class EnumerationTooLarge(SizeGuardError):
    pass


class Kind(str, enum.Enum):
    SET = "set"
    POS = "pos"
    JSL = "jsl"
    VECT = "vect"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, int(n**0.5) + 1))


@dataclass(frozen=True)
class OutputSemiring:
    """The recognition codomain: Boolean {0,1} with 1+1=1, or GF(p).

    ``ordered`` is True when the variety orders it as 0 < 1 (Pos and JSL).
    """

    modulus: int | None = None
    ordered: bool = False

    @property
    def boolean(self) -> bool:
        return self.modulus is None

    @property
    def elements(self) -> range:
        return range(2 if self.modulus is None else self.modulus)

    zero = 0
    one = 1

    def add(self, x, y):
        if self.modulus is None:
            return np.bitwise_or(x, y)
        return (np.asarray(x) + y) % self.modulus

    def mul(self, x, y):
        if self.modulus is None:
            return np.bitwise_and(x, y)
        return (np.asarray(x) * y) % self.modulus

    def leq(self, x, y):
        if self.ordered:
            return np.asarray(x) <= y
        return np.asarray(x) == y

    @cached_property
    def add_table(self) -> np.ndarray:
        e = np.arange(len(self.elements))
        return self.add(e[:, None], e[None, :])

    @cached_property
    def mul_table(self) -> np.ndarray:
        e = np.arange(len(self.elements))
        return self.mul(e[:, None], e[None, :])

    def __str__(self) -> str:
        return "B" if self.modulus is None else f"GF({self.modulus})"


@dataclass(frozen=True)
class VarietyTag:
    kind: Kind
    field_modulus: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.VECT:
            if self.field_modulus is None or not is_prime(self.field_modulus):
                raise InputError(f"modulus must be prime, got {self.field_modulus}")
        elif self.field_modulus is not None:
            raise InputError(f"field_modulus only applies to vect, not {self.kind.value}")

    @property
    def semiring(self) -> OutputSemiring:
        return OutputSemiring(self.field_modulus, self.kind in (Kind.POS, Kind.JSL))

    def __str__(self) -> str:
        if self.kind is Kind.VECT:
            return f"vect(GF({self.field_modulus}))"
        return self.kind.value


SET = VarietyTag(Kind.SET)
POS = VarietyTag(Kind.POS)
JSL = VarietyTag(Kind.JSL)


def vect(p: int) -> VarietyTag:
    return VarietyTag(Kind.VECT, p)


class FiniteObject:
    """A finite algebra of one of the four varieties, elements 0..size-1.

    Pos carries ``leq`` (boolean matrix), JSL carries ``join`` and
    ``bottom``, Vect carries ``dimension``: element i is the coordinate tuple
    whose base-p digits (most significant first) spell i.
    """

    def __init__(self, variety: VarietyTag, size: int, *, leq=None, join=None,
                 bottom: int | None = None, dimension: int | None = None):
        self.variety = variety
        self.size = int(size)
        self.leq = None if leq is None else np.asarray(leq, dtype=bool)
        self.join = None if join is None else np.asarray(join, dtype=np.int64)
        self.bottom = bottom
        self.dimension = dimension

    @classmethod
    def set(cls, n: int) -> "FiniteObject":
        return cls(SET, n)

    @classmethod
    def poset(cls, n: int, leq) -> "FiniteObject":
        leq = np.asarray(leq, dtype=bool)
        if leq.shape != (n, n):
            raise InputError(f"order matrix must be {n}x{n}")
        return cls(POS, n, leq=leq)

    @classmethod
    def poset_from_pairs(cls, n: int, pairs) -> "FiniteObject":
        """Reflexive-transitive closure of the given (x, y) meaning x <= y."""
        leq = np.eye(n, dtype=bool)
        for x, y in pairs:
            leq[x, y] = True
        for k in range(n):
            leq |= leq[:, k:k + 1] & leq[k:k + 1, :]
        return cls(POS, n, leq=leq)

    @classmethod
    def semilattice(cls, join, bottom: int) -> "FiniteObject":
        join = np.asarray(join, dtype=np.int64)
        return cls(JSL, join.shape[0], join=join, bottom=bottom)

    @classmethod
    def vector_space(cls, p: int, d: int) -> "FiniteObject":
        if p**d > MAX_VECTOR_CARRIER:
            raise SizeGuardError(f"vector carrier GF({p})^{d} has {p**d} elements, cap is {MAX_VECTOR_CARRIER}", p**d)
        return cls(vect(p), p**d, dimension=d)

    @property
    def kind(self) -> Kind:
        return self.variety.kind

    @property
    def modulus(self) -> int | None:
        return self.variety.field_modulus

    @cached_property
    def order(self) -> np.ndarray:
        """The partial order as a boolean matrix (equality for Set/Vect)."""
        if self.kind is Kind.POS:
            return self.leq
        if self.kind is Kind.JSL:
            return self.join == np.arange(self.size)[None, :]
        return np.eye(self.size, dtype=bool)

    # vector-space helpers
    @cached_property
    def coords(self) -> np.ndarray:
        p, d = self.modulus, self.dimension
        idx = np.arange(self.size)
        out = np.zeros((self.size, d), dtype=np.int64)
        for k in range(d - 1, -1, -1):
            out[:, k] = idx % p
            idx = idx // p
        return out

    def encode(self, coords) -> np.ndarray:
        c = np.asarray(coords, dtype=np.int64) % self.modulus
        out = np.zeros(c.shape[:-1], dtype=np.int64)
        for k in range(self.dimension):
            out = out * self.modulus + c[..., k]
        return out

    def basis(self) -> np.ndarray:
        return self.encode(np.eye(self.dimension, dtype=np.int64))

    def vadd(self, x, y):
        return self.encode(self.coords[x] + self.coords[y])

    def vscale(self, c, x):
        return self.encode(c * self.coords[x])

    def __repr__(self) -> str:
        extra = f", dim={self.dimension}" if self.dimension is not None else ""
        return f"FiniteObject({self.variety}, size={self.size}{extra})"


def product_object(*objs: FiniteObject) -> FiniteObject:
    """Cartesian product in the variety; element index is mixed-radix, first factor most significant."""
    tag = objs[0].variety
    if any(o.variety != tag for o in objs):
        raise InputError("variety mismatch in product")
    sizes = [o.size for o in objs]
    n = int(np.prod(sizes))
    if tag.kind is Kind.SET:
        return FiniteObject.set(n)
    if tag.kind is Kind.VECT:
        return FiniteObject.vector_space(tag.field_modulus, sum(o.dimension for o in objs))
    comps = np.array(np.unravel_index(np.arange(n), sizes))
    if tag.kind is Kind.POS:
        leq = np.ones((n, n), dtype=bool)
        for o, c in zip(objs, comps):
            leq &= o.leq[c[:, None], c[None, :]]
        return FiniteObject.poset(n, leq)
    parts = [o.join[c[:, None], c[None, :]] for o, c in zip(objs, comps)]
    join = np.ravel_multi_index(parts, sizes)
    bottom = int(np.ravel_multi_index([o.bottom for o in objs], sizes))
    return FiniteObject.semilattice(join, bottom)


def validate_object(obj: FiniteObject, names=None) -> list[str]:
    """Every violated carrier invariant, each naming offending elements."""
    nm = names or [str(i) for i in range(obj.size)]
    report: list[str] = []
    n = obj.size
    if obj.kind is Kind.POS:
        leq = obj.leq
        if leq is None or leq.shape != (n, n):
            return ["order matrix missing or misshapen"]
        bad = np.nonzero(~np.diag(leq))[0]
        if bad.size:
            report.append(f"reflexivity violated at {nm[bad[0]]}")
        anti = leq & leq.T & ~np.eye(n, dtype=bool)
        if anti.any():
            x, y = np.argwhere(anti)[0]
            report.append(f"antisymmetry violated at ({nm[x]},{nm[y]})")
        for k in range(n):
            viol = leq[:, k:k + 1] & leq[k:k + 1, :] & ~leq
            if viol.any():
                x, z = np.argwhere(viol)[0]
                report.append(f"transitivity violated at ({nm[x]},{nm[k]},{nm[z]})")
                break
    elif obj.kind is Kind.JSL:
        j = obj.join
        if j is None or j.shape != (n, n) or obj.bottom is None:
            return ["join table or bottom missing"]
        if j.min() < 0 or j.max() >= n:
            return ["join table has out-of-range entries"]
        nc = np.argwhere(j != j.T)
        if nc.size:
            x, y = nc[0]
            report.append(f"join not commutative at ({nm[x]},{nm[y]})")
        ni = np.nonzero(np.diag(j) != np.arange(n))[0]
        if ni.size:
            report.append(f"join not idempotent at {nm[ni[0]]}")
        nb = np.nonzero(j[obj.bottom] != np.arange(n))[0]
        if nb.size:
            report.append(f"bottom not neutral at {nm[nb[0]]}")
        for x in range(n):
            lhs = j[j[x][:, None], np.arange(n)[None, :]]
            rhs = j[x][j]
            if (lhs != rhs).any():
                y, z = np.argwhere(lhs != rhs)[0]
                report.append(f"join not associative at ({nm[x]},{nm[y]},{nm[z]})")
                break
    elif obj.kind is Kind.VECT:
        if obj.dimension is None or obj.modulus**obj.dimension != n:
            report.append(f"vector carrier size {n} is not p^d")
    return report


# ---------------------------------------------------------------- valuations


@dataclass(eq=False)
class SValuation:
    """A structure-preserving map from ``source`` into the output semiring."""

    source: FiniteObject
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)

    def __call__(self, x):
        return self.values[x]

    def __eq__(self, other):
        return isinstance(other, SValuation) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def __repr__(self):
        return f"SValuation({self.values.tolist()})"


def is_valuation(obj: FiniteObject, values) -> bool:
    v = np.asarray(values, dtype=np.int64)
    if v.shape != (obj.size,):
        return False
    s = obj.variety.semiring
    if v.min(initial=0) < 0 or v.max(initial=0) >= len(s.elements):
        return False
    if obj.kind is Kind.SET:
        return True
    if obj.kind is Kind.POS:
        return bool(np.all(~obj.leq | (v[:, None] <= v[None, :])))
    if obj.kind is Kind.JSL:
        return v[obj.bottom] == 0 and bool(np.all(v[obj.join] == (v[:, None] | v[None, :])))
    xs, ys = np.meshgrid(np.arange(obj.size), np.arange(obj.size), indexing="ij")
    if not np.all(v[obj.vadd(xs, ys)] == (v[xs] + v[ys]) % obj.modulus):
        return False
    return all(np.all(v[obj.vscale(c, np.arange(obj.size))] == (c * v) % obj.modulus)
               for c in range(obj.modulus))


def _upper_sets(leq: np.ndarray, cap: int):
    n = leq.shape[0]
    out: list[list[int]] = []
    vals = [0] * n

    def rec(i):
        if i == n:
            if len(out) >= cap:
                raise EnumerationTooLarge(f"more than {cap} upper sets", cap + 1)
            out.append(list(vals))
            return
        for v in (0, 1):
            ok = True
            for j in range(i):
                if v == 0 and vals[j] == 1 and leq[j, i]:
                    ok = False
                    break
                if v == 1 and vals[j] == 0 and leq[i, j]:
                    ok = False
                    break
            if ok:
                vals[i] = v
                rec(i + 1)

    rec(0)
    return out


def valuation_count(obj: FiniteObject, cap: int = DEFAULT_VALUATION_CAP) -> int:
    """Number of valuations; Pos counts by enumeration and raises past ``cap``."""
    if obj.kind is Kind.SET:
        return 2**obj.size
    if obj.kind is Kind.VECT:
        return obj.modulus**obj.dimension
    if obj.kind is Kind.JSL:
        return obj.size
    return len(_upper_sets(obj.leq, cap))


def enumerate_valuations(obj: FiniteObject, cap: int = DEFAULT_VALUATION_CAP) -> list[SValuation]:
    """All valuations ``obj -> S`` in lexicographic order of their value tuples.

    Set: all subsets; Pos: upper sets; JSL: complements of ideals (an ideal of a
    finite semilattice is a principal down-set); Vect: linear functionals.
    """
    n = obj.size
    if obj.kind is Kind.SET:
        if 2**n > cap:
            raise EnumerationTooLarge(f"enumeration too large: 2^{n} valuations exceed cap {cap}", 2**n)
        rows = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64).reshape(-1, n)
    elif obj.kind is Kind.POS:
        rows = np.array(_upper_sets(obj.leq, cap), dtype=np.int64).reshape(-1, n)
    elif obj.kind is Kind.JSL:
        if n > cap:
            raise EnumerationTooLarge(f"enumeration too large: {n} ideals exceed cap {cap}", n)
        rows = (~obj.order.T).astype(np.int64)  # row z: 1 outside the ideal of z
        rows = np.array(sorted(map(tuple, rows.tolist())), dtype=np.int64).reshape(-1, n)
    else:
        p, d = obj.modulus, obj.dimension
        if p**d > cap:
            raise EnumerationTooLarge(f"enumeration too large: {p**d} functionals exceed cap {cap}", p**d)
        coeffs = np.array(list(itertools.product(range(p), repeat=d)), dtype=np.int64).reshape(-1, d)
        rows = (coeffs @ obj.coords.T) % p
        rows = np.array(sorted(map(tuple, rows.tolist())), dtype=np.int64).reshape(-1, n)
    return [SValuation(obj, r) for r in rows]


def sample_valuations(obj: FiniteObject, k: int, rng: np.random.Generator) -> list[SValuation]:
    """``k`` pseudo-random valuations (with repetition) drawn without enumerating."""
    n = obj.size
    out = []
    for _ in range(k):
        if obj.kind is Kind.SET:
            v = rng.integers(0, 2, n)
        elif obj.kind is Kind.POS:
            seeds = rng.random(n) < rng.random() * 0.5
            v = obj.leq[seeds].any(axis=0).astype(np.int64)
        elif obj.kind is Kind.JSL:
            z = int(rng.integers(0, n))
            v = (~obj.order[:, z]).astype(np.int64)
        else:
            c = rng.integers(0, obj.modulus, obj.dimension)
            v = (obj.coords @ c) % obj.modulus
        out.append(SValuation(obj, v))
    return out


def is_separating(family, obj: FiniteObject) -> bool:
    """Whether the tupled map ``obj -> S^family`` is injective (order-reflecting for Pos)."""
    family = list(family)
    if not family:
        return obj.size <= 1
    m = np.array([np.asarray(f.values if isinstance(f, SValuation) else f) for f in family])
    if obj.kind is Kind.POS:
        below = np.all(m[:, :, None] <= m[:, None, :], axis=0)
        return bool(np.array_equal(below, obj.leq))
    return len({tuple(col) for col in m.T.tolist()}) == obj.size
