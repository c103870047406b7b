"""Presentations: products, generator changes, abelianization."""

import random

import pytest

from forge import words as W
from forge.errors import (DegenerateInputError, InvalidSubstitutionError,
                          NameCollisionError)
from forge.presentations import (FinitePresentation, abelianization,
                                 add_conjugation_relators, free_power,
                                 free_product, free_product_with_renaming,
                                 tietze_change_generators,
                                 verify_generator_change)
from helpers import random_reduced_word


def pres(gens, *rels):
    p = FinitePresentation(gens)
    return FinitePresentation(p.alphabet, [p.word(r) for r in rels])


def random_presentation(rng, max_gens=3, max_rels=3, max_len=5):
    names = ["a", "b", "c"][:rng.randint(1, max_gens)]
    alphabet = W.Alphabet(names)
    rels = [random_reduced_word(rng, alphabet, rng.randint(1, max_len))
            for _ in range(rng.randint(0, max_rels))]
    return FinitePresentation(alphabet, rels)


class TestBasics:
    def test_identity_relators_dropped(self):
        p = pres(["a"], "1", "a a^-1")
        assert p.relators == ()

    def test_repr(self):
        assert "a" in repr(pres(["a"], "a^2"))


class TestAbelianization:
    def test_free(self):
        assert abelianization(pres(["a", "b"])).betti == 2

    def test_torus(self):
        inv = abelianization(pres(["a", "b"], "a b a^-1 b^-1"))
        assert (inv.betti, inv.torsion) == (2, ())

    def test_cyclic(self):
        inv = abelianization(pres(["a"], "a^2"))
        assert (inv.betti, inv.torsion) == (0, (2,))

    def test_trefoil(self):
        inv = abelianization(pres(["a", "b"], "a^2 b^-3"))
        assert (inv.betti, inv.torsion) == (1, ())

    def test_klein_bottle(self):
        inv = abelianization(pres(["a", "b"], "a b a b^-1"))
        assert (inv.betti, inv.torsion) == (1, (2,))


class TestFreeProduct:
    def test_renaming(self):
        p = pres(["a"], "a^2")
        product, rename = free_product_with_renaming(p, p)
        assert rename == {"a": "a_2"}
        assert len(product.generators) == 2
        assert len(product.relators) == 2

    def test_abelianization_additive(self):
        # Betti numbers add and torsion combines as a multiset of prime
        # powers (invariant-factor chains do not simply concatenate).
        def elementary_divisors(torsion):
            out = []
            for d in torsion:
                for prime in range(2, d + 1):
                    power = 1
                    while d % prime == 0:
                        power *= prime
                        d //= prime
                    if power > 1:
                        out.append(power)
            return sorted(out)

        rng = random.Random(7201)
        print("seed 7201")
        for _ in range(20):
            p = random_presentation(rng)
            q = random_presentation(rng)
            ip, iq = abelianization(p), abelianization(q)
            ipq = abelianization(free_product(p, q))
            assert ipq.betti == ip.betti + iq.betti
            assert elementary_divisors(ipq.torsion) == \
                elementary_divisors(ip.torsion + iq.torsion)

    def test_free_power(self):
        p = free_power(pres(["a"], "a^2"), 3)
        assert len(p.generators) == 3
        assert len(p.relators) == 3
        with pytest.raises(DegenerateInputError):
            free_power(pres(["a"]), 0)


class TestConjugationRelators:
    def test_shape(self):
        p = pres(["a", "b"])
        q = add_conjugation_relators(
            p, p.word("a b"), [p.word("a"), p.word("b")], ["s", "t"])
        assert q.generators == ("a", "b", "s", "t")
        assert len(q.relators) == 2
        assert q.relators[0] == q.word("s^-1 a b s a^-1")

    def test_collision(self):
        p = pres(["a"])
        with pytest.raises(NameCollisionError):
            add_conjugation_relators(p, p.word("a"), [p.word("a")], ["a"])
        with pytest.raises(DegenerateInputError):
            add_conjugation_relators(p, p.word("a"), [p.word("a")], ["s", "t"])


class TestTietze:
    def test_simple_change(self):
        p = pres(["a", "b"], "a b a^-1 b^-1")
        new = W.Alphabet(["x", "y"])
        definitions = {"x": p.word("a"), "y": p.word("a b")}
        inverse = {"a": new.gen("x"), "b": new.gen("x", -1) * new.gen("y")}
        q = tietze_change_generators(p, definitions, inverse)
        assert q.generators == ("x", "y")
        iq = abelianization(q)
        ip = abelianization(p)
        assert (iq.betti, iq.torsion) == (ip.betti, ip.torsion)

    def test_bad_inverse_rejected(self):
        p = pres(["a"])
        definitions = {"x": p.word("a^2")}
        inverse = {"a": W.Alphabet(["x"]).gen("x")}
        with pytest.raises(InvalidSubstitutionError):
            verify_generator_change(p, definitions, inverse)

    def test_missing_inverse_rejected(self):
        p = pres(["a", "b"])
        definitions = {"x": p.word("a"), "y": p.word("b")}
        new = W.Alphabet(["x", "y"])
        with pytest.raises(InvalidSubstitutionError):
            verify_generator_change(p, definitions, {"a": new.gen("x")})

    def test_preserves_abelianization_random(self):
        # Random change: x_i = old_i * old_0^k (always invertible).
        rng = random.Random(7202)
        print("seed 7202")
        for _ in range(20):
            p = random_presentation(rng)
            if not p.generators:
                continue
            names = [f"x{i}" for i in range(len(p.generators))]
            new = W.Alphabet(names)
            k = rng.randint(-2, 2)
            g0 = p.alphabet.gen(p.generators[0])
            definitions = {"x0": g0}
            inverse = {p.generators[0]: new.gen("x0")}
            for i, g in enumerate(p.generators[1:], 1):
                definitions[f"x{i}"] = p.alphabet.gen(g) * g0 ** k
                inverse[g] = new.gen(f"x{i}") * new.gen("x0") ** -k
            q = tietze_change_generators(p, definitions, inverse)
            assert abelianization(q) == abelianization(p)
