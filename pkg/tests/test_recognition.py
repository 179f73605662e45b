import numpy as np
import pytest

import oracles
from schutzkit.core import InputError, enumerate_valuations
from schutzkit.corpus import CORPUS, canonical_assignment, corpus_pairs, load
from schutzkit.dmonoid import LetterAssignment, is_monoid_morphism
from schutzkit.languages import Marked, TruncLanguage, c_op_apply, derivative, truncate, word_index
from schutzkit.products import schutzenberger
from schutzkit.recognition import (PreconditionError, VerificationReport, closure_check, corestriction,
                                   decompose_middle, derivative_atoms, language_of, lmn_set,
                                   random_schutz_assignment, recognition_witness, recognized_languages,
                                   recognizes, reutenauer_check, schurec_witness, trivial_assignment,
                                   universal_property_check)

BOUND = 5
SMALL = [(x, y) for x, y in corpus_pairs() if schutzenberger(load(x), load(y)).size <= 1024]


def schutz(x, y, seed=0, alphabet="ab"):
    sp = schutzenberger(load(x), load(y))
    return random_schutz_assignment(sp, tuple(alphabet), np.random.default_rng(seed))


class TestRecognizes:
    @pytest.mark.parametrize("name", CORPUS)
    def test_agrees_with_enumeration(self, name):
        f = canonical_assignment(name)
        vals = enumerate_valuations(f.target.carrier)
        langs = {language_of(f, v, 4).key() for v in vals}
        s = f.target.variety.semiring
        rng = np.random.default_rng(0)
        n = word_index(2, 4).count
        candidates = [language_of(f, v, 4) for v in vals]
        candidates += [TruncLanguage(("a", "b"), 4, s, rng.integers(0, len(s.elements), n)) for _ in range(20)]
        for target in candidates:
            v = recognizes(f, target)
            assert (v is not None) == (target.key() in langs)
            if v is not None:
                assert language_of(f, v, 4) == target

    def test_even_a_by_z2(self):
        f = canonical_assignment("z2")
        even = TruncLanguage.from_function(("a", "b"), 6, load("z2").variety.semiring,
                                           lambda u: int(u.count("a") % 2 == 0))
        w = recognition_witness(f, even)
        assert w is not None and w.holds()
        assert w.valuation.values.tolist() == [1, 0]

    def test_contains_a_not_by_z2(self):
        f = canonical_assignment("z2")
        lang = TruncLanguage.from_function(("a", "b"), 4, load("z2").variety.semiring,
                                           lambda u: int("a" in u))
        assert recognizes(f, lang) is None

    def test_pos_needs_upward_closure(self):
        f = canonical_assignment("chain2")
        s = load("chain2").variety.semiring
        # b ↦ 1 (top), a ↦ 0: "no a" is recognized by the upper set {1}; "some a" is not an upper set
        assert recognizes(f, TruncLanguage.from_function(("a", "b"), 4, s, lambda u: int("a" not in u)))
        assert recognizes(f, TruncLanguage.from_function(("a", "b"), 4, s, lambda u: int("a" in u))) is None

    def test_alphabet_mismatch(self):
        f = canonical_assignment("z2")
        with pytest.raises(InputError):
            recognizes(f, TruncLanguage.constant(("a",), 2, load("z2").variety.semiring, 1))

    def test_recognized_languages_distinct(self):
        f = canonical_assignment("flipflop")
        langs = recognized_languages(f, 4)
        assert len({lang.key() for lang in langs}) == len(langs) == 8


class TestLmn:
    def test_names_and_products(self):
        f = schutz("z2", "z2")
        lmn = lmn_set(f, 4)
        assert set(lmn.k_list) <= {"K0", "K1", "K2", "K3"}
        for name, leaf in lmn.leaves.items():
            assert isinstance(leaf, Marked)
            assert c_op_apply(leaf, lmn.languages, f.target.variety) == lmn.products[name]

    def test_distinct(self):
        lmn = lmn_set(schutz("flipflop", "b2"), 4)
        keys = [lang.key() for lang in {**lmn.k_list, **lmn.l_list}.values()]
        assert len(set(lmn.k_list[k].key() for k in lmn.k_list)) == len(lmn.k_list)
        assert len(keys) >= 2

    def test_rejects_non_schutz(self):
        with pytest.raises(InputError):
            lmn_set(canonical_assignment("z2"))


class TestSchurec:
    @pytest.mark.parametrize("x,y", corpus_pairs())
    def test_all_valuations(self, x, y):
        g, h = canonical_assignment(x), canonical_assignment(y)
        for p in enumerate_valuations(g.target.carrier):
            for q in enumerate_valuations(h.target.carrier):
                for a in "ab":
                    res = schurec_witness(g, p, h, q, a, bound=BOUND)
                    assert res.report.passed, res.report
                    assert all(w.holds() for w in res.witnesses)

    def test_witness_languages(self):
        g, h = canonical_assignment("z2"), canonical_assignment("z2")
        p = [1, 0]
        res = schurec_witness(g, p, h, p, "a", bound=4)
        k, l, kal = (w.language for w in res.witnesses)
        for w in oracles.all_words("ab", 4):
            assert k(w) == int(w.count("a") % 2 == 0)
            expect = any(c == "a" and w[:i].count("a") % 2 == 0 and w[i + 1:].count("a") % 2 == 0
                         for i, c in enumerate(w))
            assert kal(w) == int(expect)

    def test_bad_mark(self):
        g = canonical_assignment("z2")
        with pytest.raises(InputError):
            schurec_witness(g, [1, 0], g, [1, 0], "c")


class TestReutenauer:
    @pytest.mark.parametrize("x,y", SMALL)
    def test_random_assignments(self, x, y):
        for seed in range(3):
            assert reutenauer_check(schutz(x, y, seed), bound=BOUND).passed

    def test_counts_words(self):
        rep = reutenauer_check(schutz("z2", "z2", 1), bound=4)
        assert rep.passed and rep.witness == {"words_checked": word_index(2, 4).count}


class TestDecompose:
    @pytest.mark.parametrize("x,y", SMALL)
    def test_all_valuation_pairs(self, x, y):
        f = schutz(x, y, 2)
        sp = f.target
        for p in enumerate_valuations(sp.left.carrier):
            for q in enumerate_valuations(sp.right.carrier):
                d = decompose_middle(f, p, q, bound=BOUND)
                assert d.report.passed, d.report

    def test_terms_listed(self):
        f = schutz("gf2_z2", "gf2", 0)
        d = decompose_middle(f, [0, 1, 1, 0], [0, 1], bound=4)
        assert d.report.passed
        assert all(t["letter"] in "ab" for t in d.terms)


class TestUniversal:
    @pytest.mark.parametrize("x,y", SMALL)
    def test_one_letter_image_corestriction(self, x, y):
        g, h = canonical_assignment(x, ("a",)), canonical_assignment(y, ("a",))
        f = schurec_witness(g, enumerate_valuations(g.target.carrier)[0], h,
                            enumerate_valuations(h.target.carrier)[0], "a", bound=4).assignment
        res = universal_property_check(f, corestriction(f), bound=6)
        assert res.report.passed, res.report
        assert is_monoid_morphism(res.morphism)

    @pytest.mark.parametrize("x,y", SMALL)
    def test_two_letter_factorization(self, x, y):
        f = schutz(x, y, 3)
        res = universal_property_check(f, corestriction(f), bound=6, check_recognition=False)
        assert res.report.passed, res.report
        assert is_monoid_morphism(res.morphism)

    def test_trivial_violates(self):
        f = schutz("z2", "z2", 0)
        assert lmn_set(f, 4).non_constant()
        res = universal_property_check(f, trivial_assignment(f), bound=4)
        assert res.report.verdict == "precondition-violated"
        assert res.report.counterexample in lmn_set(f, 4).languages
        assert res.morphism is None

    def test_non_surjective_rejected(self):
        f = schutz("z2", "z2", 0)
        z2 = load("z2")
        with pytest.raises(PreconditionError):
            universal_property_check(f, LetterAssignment(("a", "b"), z2, (z2.unit, z2.unit)))


class TestClosure:
    @pytest.mark.parametrize("x,y", SMALL)
    @pytest.mark.parametrize("mode", ["without", "with"])
    def test_passes(self, x, y, mode):
        rep = closure_check(schutz(x, y, 4), mode, bound=BOUND)
        assert rep.passed, rep
        assert all(e["witness"] is not None for e in rep.witness["entries"])

    def test_derivatives_bring_nothing_new(self):
        rep = closure_check(schutz("flipflop", "z2", 0), "with", bound=4)
        assert any("0 of them new languages" in n for n in rep.notes)

    def test_derivative_atoms_are_derivatives(self):
        f = schutz("z2", "b2", 0)
        fm = LetterAssignment(f.alphabet, f.target.left, tuple(int(x) for x in f.target.decode(f.images)[0]))
        atoms = derivative_atoms(f, 4)
        for i, p in enumerate(enumerate_valuations(fm.target.carrier)):
            k = language_of(fm, p, 4)
            for a in "ab":
                assert truncate(atoms[f"{a}\\Kp{i}"], 3) == derivative(k, a)
                assert truncate(atoms[f"Kp{i}/{a}"], 3) == derivative(k, a, "right")

    def test_large_product_notes_sampling(self):
        rep = closure_check(schutz("flipflop", "flipflop", 0), "without", bound=4)
        assert rep.passed
        assert any("seeded samples" in n for n in rep.notes)

    def test_bad_mode(self):
        with pytest.raises(InputError):
            closure_check(schutz("z2", "z2"), "sometimes")


class TestReport:
    def test_to_dict_excludes_timing(self):
        r = VerificationReport("t", "i", 3)
        r.timing = 1.5
        assert "timing" not in r.to_dict()
        assert r.to_dict(timing=True)["timing"] == 1.5

    def test_fail(self):
        r = VerificationReport("t", "i", 3)
        r.fail("ab", "bad")
        assert not r.passed and r.counterexample == "ab" and "bad" in r.notes
