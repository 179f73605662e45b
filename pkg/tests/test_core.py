import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from schutzkit.core import (JSL, EnumerationTooLarge, FiniteObject, InputError, Kind, OutputSemiring,
                            SizeGuardError, SValuation, VarietyTag, enumerate_valuations, is_separating,
                            is_valuation, product_object, sample_valuations, validate_object,
                            valuation_count, vect)


def chain(n):
    return FiniteObject.poset(n, np.less_equal.outer(np.arange(n), np.arange(n)))


def chain_jsl(n):
    return FiniteObject.semilattice(np.maximum.outer(np.arange(n), np.arange(n)), 0)


def powerset_jsl(k):
    n = 2 ** k
    return FiniteObject.semilattice(np.bitwise_or.outer(np.arange(n), np.arange(n)), 0)


OBJECTS = [FiniteObject.set(3), chain(3), FiniteObject.poset_from_pairs(3, [(0, 1), (0, 2)]),
           chain_jsl(3), powerset_jsl(2), FiniteObject.vector_space(2, 2), FiniteObject.vector_space(3, 1)]


class TestVarietyAndSemiring:
    def test_vect_needs_prime(self):
        with pytest.raises(InputError, match="modulus must be prime"):
            vect(4)
        with pytest.raises(InputError):
            VarietyTag(Kind.SET, 2)

    def test_semiring_laws(self):
        for s in (OutputSemiring(), OutputSemiring(3), OutputSemiring(None, True)):
            e = np.arange(len(s.elements))
            x, y, z = np.meshgrid(e, e, e, indexing="ij")
            assert np.array_equal(s.add(s.add(x, y), z), s.add(x, s.add(y, z)))
            assert np.array_equal(s.mul(s.mul(x, y), z), s.mul(x, s.mul(y, z)))
            assert np.array_equal(s.add(x, y), s.add(y, x))
            assert np.array_equal(s.mul(x, s.add(y, z)), s.add(s.mul(x, y), s.mul(x, z)))
            assert np.all(s.mul(e, s.zero) == 0) and np.all(s.add(e, s.zero) == e)
            assert np.all(s.mul(e, s.one) == e)

    def test_boolean_one_plus_one(self):
        assert OutputSemiring().add(1, 1) == 1
        assert OutputSemiring(2).add(1, 1) == 0


class TestValidateObject:
    def test_set_is_valid(self):
        assert validate_object(FiniteObject.set(3)) == []

    def test_join_not_commutative(self):
        j = np.array([[0, 1, 2], [1, 1, 1], [2, 2, 2]])
        rep = validate_object(FiniteObject.semilattice(j, 0), ["0", "x", "y"])
        assert "join not commutative at (x,y)" in rep

    def test_antisymmetry(self):
        leq = np.array([[1, 1], [1, 1]], dtype=bool)
        rep = validate_object(FiniteObject.poset(2, leq), ["a", "b"])
        assert any(r.startswith("antisymmetry violated") for r in rep)

    def test_transitivity(self):
        leq = np.eye(3, dtype=bool)
        leq[0, 1] = leq[1, 2] = True
        rep = validate_object(FiniteObject.poset(3, leq))
        assert any(r.startswith("transitivity violated") for r in rep)

    def test_vector_space_guard(self):
        with pytest.raises(SizeGuardError):
            FiniteObject.vector_space(2, 13)


class TestValuations:
    def test_set_two_elements(self):
        assert len(enumerate_valuations(FiniteObject.set(2))) == 4

    def test_boolean_semilattice(self):
        vals = [v.values.tolist() for v in enumerate_valuations(chain_jsl(2))]
        assert vals == [[0, 0], [0, 1]]

    def test_vect_dim_two(self):
        assert len(enumerate_valuations(FiniteObject.vector_space(2, 2))) == 4

    @pytest.mark.parametrize("obj", OBJECTS, ids=repr)
    def test_matches_brute_force(self, obj):
        k = obj.modulus or 2
        expect = sorted(oracles.maps_preserving(obj, k))
        got = [v.values.tolist() for v in enumerate_valuations(obj)]
        assert got == expect
        assert valuation_count(obj) == len(expect)

    @pytest.mark.parametrize("obj", OBJECTS, ids=repr)
    def test_each_is_a_valuation_and_family_separates(self, obj):
        vals = enumerate_valuations(obj)
        assert all(is_valuation(obj, v.values) for v in vals)
        assert is_separating(vals, obj)

    def test_jsl_count_is_number_of_ideals(self):
        obj = powerset_jsl(2)
        assert len(enumerate_valuations(obj)) == len(oracles.jsl_ideals(obj)) == 4

    def test_cap(self):
        with pytest.raises(EnumerationTooLarge, match="enumeration too large"):
            enumerate_valuations(FiniteObject.set(21))
        with pytest.raises(EnumerationTooLarge):
            enumerate_valuations(FiniteObject.set(5), cap=16)

    def test_samples_are_valuations(self):
        rng = np.random.default_rng(0)
        for obj in OBJECTS:
            assert all(is_valuation(obj, v.values) for v in sample_valuations(obj, 10, rng))


class TestSeparating:
    def test_identity_separates(self):
        obj = chain_jsl(2)
        assert is_separating([SValuation(obj, [0, 1])], obj)

    def test_constants_do_not(self):
        obj = FiniteObject.set(2)
        assert not is_separating([[0, 0], [1, 1]], obj)

    def test_empty_family(self):
        assert not is_separating([], FiniteObject.set(2))
        assert is_separating([], FiniteObject.set(1))

    def test_pos_needs_order_reflection(self):
        obj = chain(2)
        # injective but reverses nothing: the identity reflects the order
        assert is_separating([[0, 1]], obj)
        antichain = FiniteObject.poset(2, np.eye(2, dtype=bool))
        assert not is_separating([[0, 1]], antichain)


@given(st.lists(st.integers(1, 3), min_size=1, max_size=3))
@settings(max_examples=30, deadline=None)
def test_product_object_of_chains_is_valid(sizes):
    objs = [chain_jsl(k) for k in sizes]
    prod = product_object(*objs)
    assert prod.size == int(np.prod(sizes))
    assert validate_object(prod) == []
    assert prod.variety == JSL


def test_product_of_vector_spaces_adds_dimensions():
    p = product_object(FiniteObject.vector_space(2, 1), FiniteObject.vector_space(2, 2))
    assert p.dimension == 3 and p.size == 8
