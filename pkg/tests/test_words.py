"""Word algebra: reduction, conjugacy, roots, independence, the grammar."""

import random

import pytest
from hypothesis import given, strategies as st

from forge import words as W
from forge.errors import (AlphabetMismatchError, DegenerateInputError,
                          ParseError)

AB = W.Alphabet(["a", "b"])

letters_st = st.lists(
    st.tuples(st.sampled_from(["a", "b"]), st.sampled_from([1, -1])),
    max_size=24)


def w(text):
    return W.parse_word(AB, text)


class TestAlphabet:
    def test_rejects_bad_names(self):
        with pytest.raises(ParseError):
            W.Alphabet(["1bad"])
        with pytest.raises(ParseError):
            W.Alphabet(["a", "a"])

    def test_accepts_primes_and_underscores(self):
        W.Alphabet(["a'_0", "b_12", "x'"])


class TestReduce:
    @given(letters_st)
    def test_idempotent(self, letters):
        once = W.reduce(AB, letters)
        assert W.reduce(AB, once.letters) == once

    @given(letters_st)
    def test_inverse_cancels(self, letters):
        x = W.reduce(AB, letters)
        assert (x * x.inverse()).is_identity()
        assert (x.inverse() * x).is_identity()

    def test_example(self):
        assert w("a b b^-1 a^-1 b") == w("b")

    def test_rejects_unknown_generator(self):
        with pytest.raises(AlphabetMismatchError):
            W.reduce(AB, [("c", 1)])


class TestOperations:
    def test_commutator(self):
        assert W.commutator(w("a"), w("b")) == w("a b a^-1 b^-1")
        assert W.commutator(w("a"), w("a")).is_identity()

    def test_conjugate(self):
        assert W.conjugate(w("a"), w("b")) == w("b^-1 a b")

    def test_power(self):
        assert w("a b") ** 3 == w("a b a b a b")
        assert w("a b") ** -1 == w("b^-1 a^-1")
        assert (w("a") ** 0).is_identity()

    def test_exponent_sum(self):
        assert w("a b a b^-2").exponent_sum("a") == 2
        assert w("a b a b^-2").exponent_sum("b") == -1


class TestCyclic:
    def test_cyclic_reduction(self):
        core, conj = W.cyclic_reduction(w("b^-1 a b"))
        assert core == w("a")
        assert conj * core * conj.inverse() == w("b^-1 a b")

    def test_rotations_equal(self):
        assert W.CyclicWord(w("a b")) == W.CyclicWord(w("b a"))
        assert W.CyclicWord(w("a b")) != W.CyclicWord(w("a b^-1"))

    def test_is_conjugate_oracle(self):
        # Oracle: x ~ y iff the cyclic core of y is some rotation of the
        # cyclic core of x (rotation enumeration, no canonicalization).
        rng = random.Random(7001)
        print("seed 7001")
        from helpers import random_reduced_word
        for _ in range(200):
            x = random_reduced_word(rng, AB, rng.randint(0, 5))
            y = random_reduced_word(rng, AB, rng.randint(0, 5))
            cx, _ = W.cyclic_reduction(x)
            cy, _ = W.cyclic_reduction(y)
            oracle = any(cy.letters == cx.letters[i:] + cx.letters[:i]
                         for i in range(max(1, len(cx.letters))))
            assert W.is_conjugate(x, y) == oracle

    def test_conjugates_are_conjugate(self):
        rng = random.Random(7002)
        print("seed 7002")
        from helpers import random_reduced_word
        for _ in range(100):
            x = random_reduced_word(rng, AB, rng.randint(1, 5))
            c = random_reduced_word(rng, AB, rng.randint(0, 5))
            assert W.is_conjugate(x, W.conjugate(x, c))


class TestRoot:
    def test_power_root(self):
        r, k = W.root(w("a b a b a b"))
        assert r == W.CyclicWord(w("a b"))
        assert k == 3

    def test_primitive(self):
        r, k = W.root(w("a b"))
        assert k == 1

    def test_conjugated_power(self):
        r, k = W.root(w("b^-1 a^4 b"))
        assert k == 4

    def test_identity_rejected(self):
        with pytest.raises(DegenerateInputError):
            W.root(w("1"))


class TestIndependence:
    def test_dependent_pair(self):
        flag, witness = W.is_independent([w("a"), w("b a b^-1")])
        assert flag is False
        assert witness == (1, 2)

    def test_independent_pair(self):
        flag, witness = W.is_independent([w("a"), w("b")])
        assert flag is True
        assert witness is None

    def test_inverse_power_dependent(self):
        flag, witness = W.is_independent([w("a b"), w("b^-1 a^-1 b^-1 a^-1")])
        assert flag is False

    def test_identity_rejected(self):
        with pytest.raises(DegenerateInputError):
            W.is_independent([w("a"), w("1")])


class TestGrammar:
    @given(letters_st)
    def test_round_trip(self, letters):
        x = W.reduce(AB, letters)
        assert W.parse_word(AB, W.format_word(x)) == x

    def test_identity_token(self):
        assert w("1").is_identity()
        assert W.format_word(w("1")) == "1"

    def test_powers(self):
        assert w("a^3 b^-2") == W.Word(AB, (("a", 1),) * 3 + (("b", -1),) * 2)
        assert W.format_word(w("a a a b^-1 b^-1")) == "a^3 b^-2"

    def test_errors(self):
        with pytest.raises(ParseError):
            w("a^0")
        with pytest.raises(ParseError):
            w("a^")
        with pytest.raises(AlphabetMismatchError):
            w("c")
