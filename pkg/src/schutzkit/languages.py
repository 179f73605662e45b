"""Truncated languages (formal power series on words of bounded length),
marked products, derivatives, combination expressions and closure membership."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from . import gfp
from .core import InputError, Kind, OutputSemiring, SizeGuardError, VarietyTag


class ClosureTooLarge(SizeGuardError):
    pass


# ---------------------------------------------------------------- word indexing


class WordIndex:
    """Shortlex numbering of all words of length <= bound over ``s`` letters."""

    def __init__(self, s: int, bound: int):
        self.s, self.bound = s, bound
        self.offsets = [0]
        for k in range(bound + 1):
            self.offsets.append(self.offsets[-1] + s**k)
        self.count = self.offsets[-1]
        self.length = np.zeros(self.count, dtype=np.int64)
        self.parent = np.zeros(self.count, dtype=np.int64)
        self.last = np.zeros(self.count, dtype=np.int64)
        self.first = np.zeros(self.count, dtype=np.int64)
        self.words: list[tuple[int, ...]] = [()]
        for k in range(1, bound + 1):
            lo = self.offsets[k]
            r = np.arange(s**k)
            self.length[lo:lo + s**k] = k
            self.parent[lo:lo + s**k] = self.offsets[k - 1] + r // s
            self.last[lo:lo + s**k] = r % s
            self.first[lo:lo + s**k] = r // s ** (k - 1)
            self.words.extend(w + (c,) for w in self.words[self.offsets[k - 1]:lo] for c in range(s))

    def index(self, word) -> int:
        k = len(word)
        if k > self.bound:
            raise InputError(f"word longer than bound {self.bound}")
        r = 0
        for c in word:
            r = r * self.s + c
        return self.offsets[k] + r

    @lru_cache(maxsize=None)
    def factorizations(self, a: int):
        """Arrays (u, v, w, |v|) over all factorizations u = v a w."""
        us, vs, ws, ks = [], [], [], []
        for u, word in enumerate(self.words):
            for i, c in enumerate(word):
                if c == a:
                    us.append(u)
                    vs.append(self.index(word[:i]))
                    ws.append(self.index(word[i + 1:]))
                    ks.append(i)
        return tuple(np.array(x, dtype=np.int64) for x in (us, vs, ws, ks))

    @lru_cache(maxsize=None)
    def shift(self, a: int, side: str) -> np.ndarray:
        """For each word u of length < bound, the index of ``a u`` (left) or ``u a`` (right)."""
        n = self.offsets[self.bound]
        return np.array([self.index((a,) + w if side == "left" else w + (a,)) for w in self.words[:n]],
                        dtype=np.int64)


@lru_cache(maxsize=64)
def word_index(s: int, bound: int) -> WordIndex:
    return WordIndex(s, bound)


# ---------------------------------------------------------------- languages


class TruncLanguage:
    """A map from words of length <= bound into the output semiring."""

    def __init__(self, alphabet, bound: int, semiring: OutputSemiring, values):
        self.alphabet = tuple(alphabet)
        self.bound = int(bound)
        self.semiring = semiring
        v = np.array(values, dtype=np.int64)
        wi = word_index(len(self.alphabet), self.bound)
        if v.shape != (wi.count,):
            raise InputError(f"expected {wi.count} values, got {v.shape}")
        if v.size and (v.min() < 0 or v.max() >= len(semiring.elements)):
            raise InputError("language values outside the semiring")
        v.setflags(write=False)
        self.values = v

    @property
    def words(self) -> WordIndex:
        return word_index(len(self.alphabet), self.bound)

    @classmethod
    def from_function(cls, alphabet, bound, semiring, fn) -> "TruncLanguage":
        alphabet = tuple(alphabet)
        wi = word_index(len(alphabet), bound)
        return cls(alphabet, bound, semiring,
                   [fn("".join(alphabet[c] for c in w)) for w in wi.words])

    @classmethod
    def constant(cls, alphabet, bound, semiring, value: int) -> "TruncLanguage":
        wi = word_index(len(tuple(alphabet)), bound)
        return cls(alphabet, bound, semiring, np.full(wi.count, value))

    @classmethod
    def char(cls, alphabet, bound, semiring, words) -> "TruncLanguage":
        """Characteristic series of a finite set of words."""
        words = set(words)
        return cls.from_function(alphabet, bound, semiring, lambda u: int(u in words))

    def word_tuple(self, w) -> tuple[int, ...]:
        try:
            return tuple(self.alphabet.index(c) for c in w)
        except ValueError:
            raise InputError(f"word {w!r} not over alphabet {self.alphabet}") from None

    def __call__(self, w) -> int:
        return int(self.values[self.words.index(self.word_tuple(w))])

    def word_str(self, i: int) -> str:
        return "".join(self.alphabet[c] for c in self.words.words[i])

    def support(self) -> list[str]:
        return [self.word_str(i) for i in np.nonzero(self.values)[0]]

    def key(self) -> bytes:
        return self.values.tobytes()

    def compatible(self, other: "TruncLanguage") -> bool:
        return (self.alphabet, self.bound, self.semiring) == (other.alphabet, other.bound, other.semiring)

    def __eq__(self, other):
        return isinstance(other, TruncLanguage) and self.compatible(other) and np.array_equal(
            self.values, other.values)

    def __hash__(self):
        return hash((self.alphabet, self.bound, self.key()))

    def like(self, values) -> "TruncLanguage":
        return TruncLanguage(self.alphabet, self.bound, self.semiring, values)

    def __add__(self, other):
        return self.like(self.semiring.add(self.values, other.values))

    def scale(self, c: int) -> "TruncLanguage":
        return self.like(self.semiring.mul(self.values, c))

    def first_difference(self, other) -> str | None:
        diff = np.nonzero(self.values != other.values)[0]
        return None if diff.size == 0 else self.word_str(int(diff[0]))

    def __repr__(self):
        return f"TruncLanguage({''.join(self.alphabet)}, L={self.bound}, {self.semiring}, nnz={np.count_nonzero(self.values)})"


def _check_pair(k: TruncLanguage, l: TruncLanguage):
    if not k.compatible(l):
        raise InputError("languages differ in alphabet, bound or semiring")


def marked_product(k: TruncLanguage, a, l: TruncLanguage) -> TruncLanguage:
    """(KaL)(u) = sum over factorizations u = v a w of K(v) * L(w).

    Exact on the truncated domain since both factors are shorter than u.
    """
    _check_pair(k, l)
    if a not in k.alphabet:
        raise InputError(f"symbol {a!r} not in alphabet")
    us, vs, ws, _ = k.words.factorizations(k.alphabet.index(a))
    s = k.semiring
    terms = s.mul(k.values[vs], l.values[ws])
    acc = np.bincount(us, weights=terms, minlength=k.words.count).astype(np.int64)
    if s.boolean:
        acc = (acc > 0).astype(np.int64)
    else:
        acc %= s.modulus
    return k.like(acc)


def derivative(lang: TruncLanguage, a, side: str = "left") -> TruncLanguage:
    """(a^-1 L)(u) = L(au) or (L a^-1)(u) = L(ua); the bound drops by one."""
    if lang.bound < 1:
        raise InputError("cannot take a derivative at bound 0")
    if a not in lang.alphabet:
        raise InputError(f"symbol {a!r} not in alphabet")
    if side not in ("left", "right"):
        raise InputError("side must be 'left' or 'right'")
    idx = lang.words.shift(lang.alphabet.index(a), side)
    return TruncLanguage(lang.alphabet, lang.bound - 1, lang.semiring, lang.values[idx])


def truncate(lang: TruncLanguage, bound: int) -> TruncLanguage:
    n = word_index(len(lang.alphabet), bound).count
    return TruncLanguage(lang.alphabet, bound, lang.semiring, lang.values[:n])


# ---------------------------------------------------------------- expressions


class Expr:
    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Atom(Expr):
    name: str

    def __str__(self):
        return self.name

    def to_json(self):
        return ["atom", self.name]


@dataclass(frozen=True)
class Marked(Expr):
    left: str
    letter: str
    right: str

    def __str__(self):
        return f"({self.left} {self.letter} {self.right})"

    def to_json(self):
        return ["marked", self.left, self.letter, self.right]


@dataclass(frozen=True)
class Empty(Expr):
    def __str__(self):
        return "∅"

    def to_json(self):
        return ["empty"]


@dataclass(frozen=True)
class Full(Expr):
    def __str__(self):
        return "Σ*"

    def to_json(self):
        return ["full"]


@dataclass(frozen=True)
class Union(Expr):
    args: tuple

    def __str__(self):
        return "(" + " ∪ ".join(map(str, self.args)) + ")"

    def to_json(self):
        return ["union", *[a.to_json() for a in self.args]]


@dataclass(frozen=True)
class Inter(Expr):
    args: tuple

    def __str__(self):
        return "(" + " ∩ ".join(map(str, self.args)) + ")"

    def to_json(self):
        return ["inter", *[a.to_json() for a in self.args]]


@dataclass(frozen=True)
class Compl(Expr):
    arg: Expr

    def __str__(self):
        return f"¬{self.arg}"

    def to_json(self):
        return ["compl", self.arg.to_json()]


@dataclass(frozen=True)
class Sum(Expr):
    args: tuple

    def __str__(self):
        return "(" + " + ".join(map(str, self.args)) + ")"

    def to_json(self):
        return ["sum", *[a.to_json() for a in self.args]]


@dataclass(frozen=True)
class Scale(Expr):
    coeff: int
    arg: Expr

    def __str__(self):
        return f"{self.coeff}·{self.arg}"

    def to_json(self):
        return ["scale", self.coeff, self.arg.to_json()]


CombinationExpr = Expr

ALLOWED = {
    Kind.SET: (Atom, Marked, Empty, Full, Union, Inter, Compl),
    Kind.POS: (Atom, Marked, Empty, Full, Union, Inter),
    Kind.JSL: (Atom, Marked, Empty, Union),
    Kind.VECT: (Atom, Marked, Empty, Sum, Scale),
}


def expr_from_json(data) -> Expr:
    tag, *rest = data
    if tag == "atom":
        return Atom(rest[0])
    if tag == "marked":
        return Marked(*rest)
    if tag == "empty":
        return Empty()
    if tag == "full":
        return Full()
    if tag == "compl":
        return Compl(expr_from_json(rest[0]))
    if tag == "scale":
        return Scale(int(rest[0]), expr_from_json(rest[1]))
    kinds = {"union": Union, "inter": Inter, "sum": Sum}
    if tag in kinds:
        return kinds[tag](tuple(expr_from_json(r) for r in rest))
    raise InputError(f"unknown expression node {tag!r}")


def walk(expr: Expr):
    yield expr
    for child in getattr(expr, "args", ()):
        yield from walk(child)
    if isinstance(expr, (Compl, Scale)):
        yield from walk(expr.arg)


def c_op_apply(expr: Expr, env: Mapping[str, TruncLanguage], variety: VarietyTag | Kind,
               cache: dict | None = None) -> TruncLanguage:
    """Evaluate a combination expression pointwise on the truncated domain."""
    kind = variety.kind if isinstance(variety, VarietyTag) else Kind(variety)
    if not env:
        raise InputError("empty environment: nothing fixes alphabet and bound")
    proto = next(iter(env.values()))
    for node in walk(expr):
        if not isinstance(node, ALLOWED[kind]):
            raise InputError(f"{type(node).__name__} is not an operation for {kind.value}")
    memo = {} if cache is None else cache
    s = proto.semiring

    def ev(e):
        if isinstance(e, Atom):
            if e.name not in env:
                raise InputError(f"unbound atom {e.name!r}")
            return env[e.name].values
        if isinstance(e, Marked):
            if e in memo:
                return memo[e]
            for n in (e.left, e.right):
                if n not in env:
                    raise InputError(f"unbound atom {n!r}")
            memo[e] = marked_product(env[e.left], e.letter, env[e.right]).values
            return memo[e]
        if isinstance(e, Empty):
            return np.zeros_like(proto.values)
        if isinstance(e, Full):
            return np.ones_like(proto.values)
        if isinstance(e, (Union, Sum)):
            acc = np.zeros_like(proto.values)
            for a in e.args:
                acc = s.add(acc, ev(a))
            return acc
        if isinstance(e, Inter):
            acc = np.ones_like(proto.values)
            for a in e.args:
                acc = acc & ev(a)
            return acc
        if isinstance(e, Compl):
            return 1 - ev(e.arg)
        if isinstance(e, Scale):
            return s.mul(ev(e.arg), e.coeff % len(s.elements))
        raise InputError(f"unknown expression {e!r}")

    return proto.like(ev(expr))


# ---------------------------------------------------------------- closure membership


class Closure:
    """Decision procedure for membership in the closure of ``atoms`` under the
    operations of ``variety``; built once, queried for many targets.

    ``leaves`` optionally replaces ``Atom(name)`` by another expression for the
    same language (e.g. a ``Marked`` node).
    """

    def __init__(self, atoms: Mapping[str, TruncLanguage], variety: VarietyTag | Kind,
                 leaves: Mapping[str, Expr] | None = None):
        self.kind = variety.kind if isinstance(variety, VarietyTag) else Kind(variety)
        self.names = list(atoms)
        self.leaves = [leaves[n] if leaves and n in leaves else Atom(n) for n in self.names]
        langs = list(atoms.values())
        self.matrix = np.array([lang.values for lang in langs], dtype=np.int64).reshape(len(langs), -1)
        self.by_key = {}
        for leaf, lang in zip(self.leaves, langs):
            self.by_key.setdefault(lang.key(), leaf)
        if langs:
            self.semiring = langs[0].semiring
        if self.kind is Kind.SET:
            sig = np.ascontiguousarray(self.matrix.T)
            _, self.block_rep, self.block = np.unique(sig, axis=0, return_index=True, return_inverse=True)
            self.block = self.block.ravel()

    def member(self, target: TruncLanguage) -> Expr | None:
        v = target.values
        hit = self.by_key.get(target.key())
        if hit is not None:
            return hit
        if not v.any():
            return Empty()
        if self.kind is Kind.SET:
            return self._boolean(v)
        if self.kind is Kind.POS:
            return self._positive(v)
        if self.kind is Kind.JSL:
            return self._unions(v)
        return self._linear(v)

    def _unions(self, v):
        below = np.all(self.matrix <= v[None, :], axis=1)
        if not below.any():
            return None
        if np.array_equal(self.matrix[below].max(axis=0), v):
            return _union([l for l, b in zip(self.leaves, below) if b])
        return None

    def _boolean(self, v):
        if v.all():
            return Full()
        if (v[self.block_rep][self.block] != v).any():
            return None
        simple = self._unions(v)
        if simple is not None:
            return simple
        return self._cover(v, allow_negation=True)

    def _positive(self, v):
        if v.all():
            return Full()
        for w in np.nonzero(v)[0]:
            holds = self.matrix[:, w] == 1
            meet = self.matrix[holds].min(axis=0) if holds.any() else np.ones_like(v)
            if (meet > v).any():
                return None
        simple = self._unions(v)
        if simple is not None:
            return simple
        return self._cover(v, allow_negation=False)

    def _cover(self, v, allow_negation):
        """Union of greedy implicants: for each uncovered word, intersect literals
        true at that word until nothing outside the target survives."""
        lits = [(leaf, row) for leaf, row in zip(self.leaves, self.matrix)]
        if allow_negation:
            lits += [(Compl(leaf), 1 - row) for leaf, row in zip(self.leaves, self.matrix)]
        outside = v == 0
        covered = np.zeros_like(v, dtype=bool)
        terms = []
        for w in np.nonzero(v)[0]:
            if covered[w]:
                continue
            cur = np.ones_like(v, dtype=bool)
            chosen = []
            usable = [(leaf, row.astype(bool)) for leaf, row in lits if row[w]]
            while (cur & outside).any():
                best = max(usable, key=lambda lr: int((cur & outside & ~lr[1]).sum()))
                if not (cur & outside & ~best[1]).any():
                    return None
                chosen.append(best[0])
                cur &= best[1]
            covered |= cur
            terms.append(_inter(chosen))
        return _union(terms)

    def _linear(self, v):
        p = self.semiring.modulus
        if not self.names:
            return None
        x = gfp.solve(self.matrix.T, v, p)
        if x is None:
            return None
        terms = [l if c == 1 else Scale(int(c), l) for l, c in zip(self.leaves, x) if c]
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))


def _union(terms):
    if not terms:
        return Empty()
    return terms[0] if len(terms) == 1 else Union(tuple(terms))


def _inter(terms):
    if not terms:
        return Full()
    return terms[0] if len(terms) == 1 else Inter(tuple(terms))


def closure_membership(target: TruncLanguage, atoms: Mapping[str, TruncLanguage], variety,
                       leaves: Mapping[str, Expr] | None = None) -> Expr | None:
    """A witness expression evaluating exactly to ``target``, or None if none exists.

    Set: Boolean-algebra blocks and minterms; Pos: each supported word's atom
    meet must lie below the target; JSL: union of atoms below the target;
    Vect: Gaussian elimination over GF(p).
    """
    for lang in atoms.values():
        _check_pair(target, lang)
    return Closure(atoms, variety, leaves).member(target)


def positive_closure(atoms: Mapping[str, TruncLanguage], cap: int = 2**16) -> dict[bytes, Expr]:
    """Fixpoint of {atoms, ∅, Σ*} under union and intersection (Boolean languages)."""
    langs = list(atoms.items())
    if not langs:
        raise InputError("need at least one atom")
    proto = langs[0][1]
    n = proto.values.size
    full = (1 << n) - 1

    def as_int(vals):
        return int("".join(map(str, vals[::-1].tolist())) or "0", 2)

    found: dict[int, Expr] = {0: Empty(), full: Full()}
    for name, lang in langs:
        found.setdefault(as_int(lang.values), Atom(name))
    work = list(found)
    while work:
        x = work.pop()
        for y in list(found):
            for z, e in ((x | y, Union((found[x], found[y]))), (x & y, Inter((found[x], found[y])))):
                if z not in found:
                    if len(found) >= cap:
                        raise ClosureTooLarge(f"closure too large: more than {cap} languages", cap + 1)
                    found[z] = e
                    work.append(z)
    out = {}
    for x, e in found.items():
        vals = np.array([(x >> i) & 1 for i in range(n)], dtype=np.int64)
        out[vals.tobytes()] = e
    return out
