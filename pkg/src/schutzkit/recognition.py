"""Recognition of truncated languages by finite D-monoids, and bounded
verification of the Schützenberger-product theorems."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import gfp
from .core import (EnumerationTooLarge, InputError, Kind, SValuation, enumerate_valuations,
                   sample_valuations, valuation_count)
from .dmonoid import (LetterAssignment, MonoidMorphism, eval_all, eval_formal,
                      image_of_free_morphism, is_monoid_morphism)
from .languages import (Closure, Empty, Marked, Scale, Sum, TruncLanguage, Union,
                        c_op_apply, marked_product, word_index)
from .products import SchutzProduct, schutzenberger

DEFAULT_BOUND = 8
FULL_ENUMERATION_LIMIT = 2**12
EXTRA_SAMPLES = 64
TRUNCATION_NOTE = "checked on all words of length <= {L}; pass means verified up to this bound"


class PreconditionError(InputError):
    pass


@dataclass
class VerificationReport:
    theorem: str
    instance: str
    bound: int
    verdict: str = "pass"
    counterexample: str | None = None
    witness: object = None
    notes: list = field(default_factory=list)
    timing: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def fail(self, counterexample: str | None, note: str | None = None):
        if self.verdict == "pass":
            self.verdict = "fail"
            self.counterexample = counterexample
        if note:
            self.notes.append(note)

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "theorem": self.theorem,
            "instance": self.instance,
            "bound": self.bound,
            "verdict": self.verdict,
            "counterexample": self.counterexample,
            "witness": self.witness,
            "notes": list(self.notes),
        }
        if timing:
            out["timing"] = round(self.timing, 6)
        return out


class _Timer:
    def __init__(self, report):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.timing = time.perf_counter() - self.t0
        return False


def _word(alphabet, bound, i) -> str:
    return "".join(alphabet[c] for c in word_index(len(alphabet), bound).words[i]) or "ε"


def language_of(f: LetterAssignment, valuation, bound: int = DEFAULT_BOUND) -> TruncLanguage:
    """The language p∘f on all words of length <= bound."""
    v = np.asarray(getattr(valuation, "values", valuation), dtype=np.int64)
    return TruncLanguage(f.alphabet, bound, f.target.variety.semiring, v[eval_all(f, bound)])


# ---------------------------------------------------------------- recognition


@dataclass
class RecognitionWitness:
    assignment: LetterAssignment
    valuation: SValuation
    language: TruncLanguage

    def counterexample(self) -> str | None:
        got = language_of(self.assignment, self.valuation, self.language.bound)
        bad = got.first_difference(self.language)
        return None if bad is None else (bad or "ε")

    def holds(self) -> bool:
        return self.counterexample() is None


def recognizes(f: LetterAssignment, target: TruncLanguage) -> SValuation | None:
    """The least valuation p (in enumeration order) with p∘f = target, or None."""
    if tuple(f.alphabet) != target.alphabet:
        raise InputError("alphabet of assignment and language differ")
    obj = f.target.carrier
    img = eval_all(f, target.bound)
    t = target.values
    n = obj.size
    kind = obj.kind
    if kind in (Kind.SET, Kind.POS):
        ones = np.zeros(n, dtype=bool)
        zeros = np.zeros(n, dtype=bool)
        ones[img[t == 1]] = True
        zeros[img[t == 0]] = True
        if kind is Kind.POS:
            ones = obj.leq[ones].any(axis=0)
        if (ones & zeros).any():
            return None
        return SValuation(obj, ones.astype(np.int64))
    if kind is Kind.JSL:
        for v in enumerate_valuations(obj):
            if np.array_equal(v.values[img], t):
                return v
        return None
    p, d = obj.modulus, obj.dimension
    reached, first, inverse = np.unique(img, return_index=True, return_inverse=True)
    vals = t[first]
    if (vals[inverse.ravel()] != t).any():
        return None
    c = gfp.lex_min_solution(obj.coords[reached], vals, p, priority=list(range(d - 1, -1, -1)))
    if c is None:
        return None
    return SValuation(obj, (obj.coords @ c) % p)


def recognition_witness(f: LetterAssignment, target: TruncLanguage) -> RecognitionWitness | None:
    v = recognizes(f, target)
    return None if v is None else RecognitionWitness(f, v, target)


# ---------------------------------------------------------------- projections of assignments


def _components(f: LetterAssignment) -> tuple[LetterAssignment, LetterAssignment, np.ndarray]:
    sp = f.target
    if not isinstance(sp, SchutzProduct):
        raise InputError("assignment must target a Schützenberger product")
    m, a, n = sp.decode(np.array(f.images, dtype=np.int64))
    fm = LetterAssignment(f.alphabet, sp.left, tuple(int(x) for x in m))
    fn = LetterAssignment(f.alphabet, sp.right, tuple(int(x) for x in n))
    return fm, fn, a


def schutz_assignment(sp: SchutzProduct, alphabet, left_images, middle_images, right_images) -> LetterAssignment:
    imgs = sp.encode(np.asarray(left_images), np.asarray(middle_images), np.asarray(right_images))
    return LetterAssignment(tuple(alphabet), sp, tuple(int(x) for x in imgs))


def random_schutz_assignment(sp: SchutzProduct, alphabet, rng: np.random.Generator) -> LetterAssignment:
    k = len(alphabet)
    return schutz_assignment(sp, alphabet, rng.integers(0, sp.left.size, k),
                             rng.integers(0, sp.algebra.size, k), rng.integers(0, sp.right.size, k))


# ---------------------------------------------------------------- L_{M,N}(f)


@dataclass
class LmnSet:
    """K-list (via π_M∘f), L-list (via π_N∘f) and all marked products K a L.

    ``languages`` maps atom names to languages; ``leaves`` maps product names
    to their ``Marked`` expression. Languages are deduplicated, first name wins.
    """

    assignment: LetterAssignment
    bound: int
    k_list: dict
    l_list: dict
    products: dict
    leaves: dict

    @property
    def languages(self) -> dict:
        return {**self.k_list, **self.l_list, **self.products}

    def non_constant(self) -> list[str]:
        return [name for name, lang in self.languages.items() if len(set(lang.values.tolist())) > 1]


def _distinct(langs: list[TruncLanguage], prefix: str) -> dict:
    out, seen = {}, set()
    for lang in langs:
        key = lang.key()
        if key not in seen:
            seen.add(key)
            out[f"{prefix}{len(out)}"] = lang
    return out


def lmn_set(f: LetterAssignment, bound: int = DEFAULT_BOUND) -> LmnSet:
    fm, fn, _ = _components(f)
    ks = _distinct([language_of(fm, p, bound) for p in enumerate_valuations(fm.target.carrier)], "K")
    ls = _distinct([language_of(fn, q, bound) for q in enumerate_valuations(fn.target.carrier)], "L")
    products, leaves = {}, {}
    for kn, k in ks.items():
        for ln, lang in ls.items():
            for a in f.alphabet:
                name = f"{kn}{a}{ln}"
                products[name] = marked_product(k, a, lang)
                leaves[name] = Marked(kn, a, ln)
    return LmnSet(f, bound, ks, ls, products, leaves)


# ---------------------------------------------------------------- schurec


@dataclass
class SchurecResult:
    assignment: LetterAssignment
    witnesses: tuple
    report: VerificationReport


def schurec_witness(g: LetterAssignment, p, h: LetterAssignment, q, a, bound: int = DEFAULT_BOUND) -> SchurecResult:
    """f(a) = (g(a), one, h(a)), f(b) = (g(b), 0, h(b)); witnesses for K, L and KaL."""
    if tuple(g.alphabet) != tuple(h.alphabet):
        raise InputError("g and h must share the alphabet")
    alphabet = tuple(g.alphabet)
    if a not in alphabet:
        raise InputError(f"marked letter {a!r} not in alphabet")
    sp = schutzenberger(g.target, h.target)
    mid = [sp.algebra.one if b == a else sp.algebra.zero for b in alphabet]
    f = schutz_assignment(sp, alphabet, g.images, mid, h.images)
    pv = np.asarray(getattr(p, "values", p), dtype=np.int64)
    qv = np.asarray(getattr(q, "values", q), dtype=np.int64)
    k = language_of(g, pv, bound)
    lang_l = language_of(h, qv, bound)
    kal = marked_product(k, a, lang_l)
    m_of, a_of, n_of = sp.decode(np.arange(sp.size))
    wk = RecognitionWitness(f, SValuation(sp.carrier, pv[m_of]), k)
    wl = RecognitionWitness(f, SValuation(sp.carrier, qv[n_of]), lang_l)
    wkal = RecognitionWitness(f, SValuation(sp.carrier, sp.middle_valuation(pv, qv)[a_of]), kal)
    report = VerificationReport("schurec", f"{sp.left.variety}: |M|={sp.left.size}, |N|={sp.right.size}, mark {a}",
                                bound, notes=[TRUNCATION_NOTE.format(L=bound)])
    for label, w in (("K", wk), ("L", wl), ("KaL", wkal)):
        bad = w.counterexample()
        if bad is not None:
            report.fail(bad, f"{label} differs")
    report.witness = {"images": [sp.name(x) for x in f.images]}
    return SchurecResult(f, (wk, wl, wkal), report)


# ---------------------------------------------------------------- Reutenauer formula


def reutenauer_check(f: LetterAssignment, bound: int = DEFAULT_BOUND) -> VerificationReport:
    """f_MN(u) against the sum over u = v a w of η(f_M(v)∗1)·f_MN(a)·η(1∗f_N(w))."""
    sp = f.target
    report = VerificationReport("reutenauer", repr(sp), bound, notes=[TRUNCATION_NOTE.format(L=bound)])
    with _Timer(report):
        fm, fn, mid_letters = _components(f)
        A = sp.algebra
        star = sp.star
        left_eta = A.eta[star.gen[:, sp.right.unit]]
        right_eta = A.eta[star.gen[sp.left.unit, :]]
        actual = sp.decode(eval_all(f, bound))[1]
        em, en = eval_all(fm, bound), eval_all(fn, bound)
        wi = word_index(len(f.alphabet), bound)
        acc = np.full(wi.count, A.zero, dtype=np.int64)
        for li in range(len(f.alphabet)):
            us, vs, ws, ks = wi.factorizations(li)
            for k in range(bound):
                sel = ks == k
                if not sel.any():
                    continue
                u, v, w = us[sel], vs[sel], ws[sel]
                term = A.mul_array(A.mul_array(left_eta[em[v]], mid_letters[li]), right_eta[en[w]])
                acc[u] = A.add_array(acc[u], term)
        bad = np.nonzero(acc != actual)[0]
        if bad.size:
            report.fail(_word(f.alphabet, bound, int(bad[0])))
        report.witness = {"words_checked": int(wi.count)}
    return report


# ---------------------------------------------------------------- decomposition


@dataclass
class Decomposition:
    expression: object
    env: dict
    terms: list
    report: VerificationReport


def _generator_terms(sp: SchutzProduct, x: int) -> list[tuple[int, int, int]]:
    """(λ, m, n) with x = Σ λ·η(m∗n) in the middle algebra."""
    A, star = sp.algebra, sp.star
    nn = sp.right.size
    kind = sp.kind
    if kind in (Kind.SET, Kind.POS):
        return [(1, b // nn, b % nn) for b in A.members(x)]
    if kind is Kind.JSL:
        return [(1, m, n) for m, n in star.witness[x]]
    mb, nb = sp.left.carrier.basis(), sp.right.carrier.basis()
    gens = [(int(m), int(n)) for m in mb for n in nb]
    mat = np.array([star.carrier.coords[star.gen[m, n]] for m, n in gens]).T
    lam = gfp.solve(mat, star.carrier.coords[x], star.carrier.modulus)
    if lam is None:
        raise RuntimeError("internal error: generator solve infeasible")
    return [(int(c), m, n) for c, (m, n) in zip(lam, gens) if c]


def decompose_middle(f: LetterAssignment, p, q, bound: int = DEFAULT_BOUND) -> Decomposition:
    """Σ_a Σ_j λ_j^a (L_M^{a,j} a L_N^{a,j}) against (p∗q)‾∘π_MN∘f."""
    sp = f.target
    fm, fn, mid_letters = _components(f)
    pv = np.asarray(getattr(p, "values", p), dtype=np.int64)
    qv = np.asarray(getattr(q, "values", q), dtype=np.int64)
    report = VerificationReport("decompose", repr(sp), bound, notes=[TRUNCATION_NOTE.format(L=bound)])
    with _Timer(report):
        s = sp.variety.semiring
        em, en = eval_all(fm, bound), eval_all(fn, bound)
        env, terms, pieces = {}, [], []
        for li, a in enumerate(f.alphabet):
            for j, (lam, m, n) in enumerate(_generator_terms(sp, int(mid_letters[li]))):
                km, kn = f"LM_{a}_{j}", f"LN_{a}_{j}"
                env[km] = TruncLanguage(f.alphabet, bound, s, pv[sp.left.mul_array(em, m)])
                env[kn] = TruncLanguage(f.alphabet, bound, s, qv[sp.right.mul_array(n, en)])
                node = Marked(km, a, kn)
                pieces.append(node if lam == 1 else Scale(lam, node))
                terms.append({"letter": a, "coeff": lam, "left": sp.left.name(m), "right": sp.right.name(n)})
        if not pieces:
            expr = Empty()
        elif len(pieces) == 1:
            expr = pieces[0]
        else:
            expr = (Sum if sp.kind is Kind.VECT else Union)(tuple(pieces))
        target = TruncLanguage(f.alphabet, bound, s,
                               sp.middle_valuation(pv, qv)[sp.decode(eval_all(f, bound))[1]])
        if env:
            got = c_op_apply(expr, env, sp.variety)
        else:
            got = TruncLanguage.constant(f.alphabet, bound, s, 0)
        bad = got.first_difference(target)
        if bad is not None:
            report.fail(bad or "ε")
        report.witness = {"expression": str(expr), "terms": terms}
    return Decomposition(expr, env, terms, report)


# ---------------------------------------------------------------- universal property


@dataclass
class UniversalResult:
    morphism: MonoidMorphism | None
    report: VerificationReport


def universal_property_check(f: LetterAssignment, e: LetterAssignment, bound: int = DEFAULT_BOUND,
                             check_recognition: bool = True) -> UniversalResult:
    """Build h: P → M⋄N with h∘e = f from e's word witnesses and verify it.

    With ``check_recognition`` False the requirement that e recognizes
    L_{M,N}(f) is skipped (and the report says so); h is still verified.
    """
    if tuple(f.alphabet) != tuple(e.alphabet):
        raise InputError("f and e must share the alphabet")
    img = image_of_free_morphism(e)
    if img.monoid.size != e.target.size:
        raise PreconditionError(f"e is not surjective: image has {img.monoid.size} of {e.target.size} elements")
    report = VerificationReport("universal", f"{f.target!r} via P of size {e.target.size}", bound,
                                notes=[TRUNCATION_NOTE.format(L=bound),
                                       "h is forced on the word witnesses of P; uniqueness follows from surjectivity of e"])
    with _Timer(report):
        lmn = lmn_set(f, bound) if check_recognition else None
        if lmn is None:
            report.notes.append("recognition precondition not checked")
        for name, lang in (lmn.languages.items() if lmn else ()):
            if recognizes(e, lang) is None:
                report.verdict = "precondition-violated"
                report.counterexample = name
                report.notes.append(f"language {name} is not recognized by e")
                return UniversalResult(None, report)
        h = np.empty(e.target.size, dtype=np.int64)
        for x, wit in zip(img.inclusion, img.witnesses):
            h[int(x)] = eval_formal(f, wit)
        hom = MonoidMorphism(e.target, f.target, h)
        mismatch = np.nonzero(h[eval_all(e, bound)] != eval_all(f, bound))[0]
        if mismatch.size:
            report.fail(_word(f.alphabet, bound, int(mismatch[0])), "h∘e differs from f")
        if not is_monoid_morphism(hom):
            report.fail(None, "h is not a monoid morphism")
        report.witness = {"h": [f.target.name(int(v)) for v in h]}
    return UniversalResult(hom if report.passed else None, report)


def corestriction(f: LetterAssignment) -> LetterAssignment:
    return image_of_free_morphism(f).corestriction


def trivial_assignment(f: LetterAssignment) -> LetterAssignment:
    """Letter assignment into the one-element monoid of the same variety."""
    from .corpus import trivial_monoid

    return LetterAssignment(f.alphabet, trivial_monoid(f.target.variety), (0,) * len(f.alphabet))


# ---------------------------------------------------------------- closure


def _schutz_valuation_family(sp: SchutzProduct, reached: np.ndarray, seed: int):
    """All valuations when few enough, else an exact generating family over the
    reached elements plus seeded samples. Returns (family, notes, exhaustive)."""
    obj = sp.carrier
    try:
        count = valuation_count(obj, cap=FULL_ENUMERATION_LIMIT)
    except EnumerationTooLarge:
        count = None
    if count is not None and count <= FULL_ENUMERATION_LIMIT:
        return enumerate_valuations(obj), [f"all {count} valuations checked"], True
    kind = obj.kind
    n = obj.size
    fam = []
    if kind is Kind.SET:
        for x in reached:
            v = np.zeros(n, dtype=np.int64)
            v[x] = 1
            fam.append(SValuation(obj, v))
        what = "indicator valuations of reached elements"
    elif kind is Kind.POS:
        for x in reached:
            fam.append(SValuation(obj, obj.leq[x].astype(np.int64)))
        what = "principal upper sets of reached elements"
    elif kind is Kind.JSL:
        fam = enumerate_valuations(obj)
        what = "all valuations"
    else:
        for i in range(obj.dimension):
            fam.append(SValuation(obj, obj.coords[:, i] % obj.modulus))
        what = "dual basis functionals"
    fam += sample_valuations(obj, EXTRA_SAMPLES, np.random.default_rng(seed))
    notes = [f"valuation count {'> ' + str(FULL_ENUMERATION_LIMIT) if count is None else count} exceeds "
             f"{FULL_ENUMERATION_LIMIT}: checked {what} (every recognized language is a "
             f"{'union' if kind in (Kind.SET, Kind.POS) else 'combination'} of these) "
             f"plus {EXTRA_SAMPLES} seeded samples (seed {seed})"]
    return fam, notes, False


def derivative_atoms(f: LetterAssignment, bound: int) -> dict:
    """Derivatives of the K- and L-lists computed through transformed valuations
    p∘(f_M(a)•−) and p∘(−•f_M(a)), so no truncation is lost."""
    fm, fn, _ = _components(f)
    out = {}
    for tag, g in (("K", fm), ("L", fn)):
        t = g.target
        for i, p in enumerate(enumerate_valuations(t.carrier)):
            for li, a in enumerate(f.alphabet):
                x = g.images[li]
                left = p.values[t.mul_array(x, np.arange(t.size))]
                right = p.values[t.mul_array(np.arange(t.size), x)]
                out[f"{a}\\{tag}p{i}"] = language_of(g, left, bound)
                out[f"{tag}p{i}/{a}"] = language_of(g, right, bound)
    return out


def closure_check(f: LetterAssignment, mode: str = "without", bound: int = DEFAULT_BOUND,
                  seed: int = 0) -> VerificationReport:
    """Every language recognized by f through a valuation of M⋄N lies in the
    closure of L_{M,N}(f) under the operations of the variety."""
    if mode not in ("with", "without", "with-derivatives"):
        raise InputError(f"unknown mode {mode!r}")
    with_derivs = mode != "without"
    sp = f.target
    report = VerificationReport("closure", f"{sp!r}, mode {'with' if with_derivs else 'without'} derivatives",
                                bound, notes=[TRUNCATION_NOTE.format(L=bound)])
    with _Timer(report):
        lmn = lmn_set(f, bound)
        atoms = lmn.languages
        leaves = dict(lmn.leaves)
        if with_derivs:
            extra = derivative_atoms(f, bound)
            known = {lang.key() for lang in atoms.values()}
            new = [name for name, lang in extra.items() if lang.key() not in known]
            report.notes.append(f"{len(extra)} derivative atoms added, {len(new)} of them new languages")
            atoms = {**atoms, **extra}
        closure = Closure(atoms, sp.variety, leaves)
        env = {**lmn.k_list, **lmn.l_list, **atoms}
        img = eval_all(f, bound)
        family, notes, _ = _schutz_valuation_family(sp, np.unique(img), seed)
        report.notes.extend(notes)
        entries, seen, cache = [], {}, {}
        s = sp.variety.semiring
        for idx, val in enumerate(family):
            lang = TruncLanguage(f.alphabet, bound, s, val.values[img])
            key = lang.key()
            if key in seen:
                continue
            expr = closure.member(lang)
            seen[key] = expr
            if expr is None:
                report.fail(f"valuation {idx}", f"language of valuation {idx} has no witness")
                entries.append({"valuation": idx, "witness": None})
                continue
            back = c_op_apply(expr, env, sp.variety, cache)
            if back != lang:
                report.fail(back.first_difference(lang) or "ε", f"witness of valuation {idx} does not re-evaluate")
            entries.append({"valuation": idx, "witness": str(expr)})
        report.witness = {"atoms": len(atoms), "languages": len(entries), "entries": entries}
    return report


def recognized_languages(f: LetterAssignment, bound: int = DEFAULT_BOUND) -> list[TruncLanguage]:
    """Distinct languages p∘f over all valuations p of the target."""
    out, seen = [], set()
    for p in enumerate_valuations(f.target.carrier):
        lang = language_of(f, p, bound)
        if lang.key() not in seen:
            seen.add(lang.key())
            out.append(lang)
    return out
