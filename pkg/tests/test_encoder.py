"""The encoding pipeline: stage bookkeeping, certificates, determinism."""

import pytest

from forge import words as W
from forge.encoder import (MalnormalCertificate, U_IN_TW, V_IN_TW,
                           assemble_Gw, discrete_c_word, encode,
                           encode_discrete, revalidate_certificate,
                           select_malnormal_words, step_conjugators,
                           step_injective_generators, step_order_control)
from forge.errors import (BudgetExhaustedError, DegenerateInputError,
                          ThresholdError)
from forge.fileformats import trace_to_json
from forge.presentations import FinitePresentation, abelianization


def pres(gens, *rels):
    p = FinitePresentation(gens)
    return FinitePresentation(p.alphabet, [p.word(r) for r in rels])


class TestDerivedLetters:
    def test_zero_exponent_sums(self):
        for word in (U_IN_TW, V_IN_TW):
            assert word.exponent_sum("t") == 0
            assert word.exponent_sum("w") == 0

    def test_reduced_forms(self):
        assert str(U_IN_TW) == "w^-1 t w^-1 t^-1 w^2"
        assert str(V_IN_TW) == "w^-1 t w^2 t^-1 w^-1"


class TestStageOne:
    def test_counts(self):
        p = pres(["a"], "a^2")
        pd, wd = step_injective_generators(p, p.word("a"))
        m = 1
        assert len(pd.generators) == (m + 1) * (2 * m + 1)
        assert len(pd.relators) == (2 * m + 1) * (len(p.relators) + 1)
        assert str(wd) == "y1"

    def test_counts_two_generators(self):
        p = pres(["a", "b"], "a b")
        pd, _ = step_injective_generators(p, p.word("a b"))
        m = 2
        assert len(pd.generators) == (m + 1) * (2 * m + 1)
        assert len(pd.relators) == (2 * m + 1) * (len(p.relators) + 1)

    def test_identity_word_rejected(self):
        p = pres(["a"])
        with pytest.raises(DegenerateInputError):
            step_injective_generators(p, p.word("1"))


class TestStageTwoThree:
    def test_order_control_shapes(self):
        p = pres(["a"], "a^2")
        pd, wd = step_injective_generators(p, p.word("a"))
        pp, wp = step_order_control(pd, wd)
        assert len(pp.generators) == len(pd.generators) + 1
        assert pp.generators[0] == "a'_0"
        # w' is a commutator, so it dies under abelianization.
        assert all(wp.exponent_sum(g) == 0 for g in pp.generators)

    def test_conjugators(self):
        p = pres(["a"], "a^2")
        pd, wd = step_injective_generators(p, p.word("a"))
        pp, wp = step_order_control(pd, wd)
        p1, b_letters = step_conjugators(pp, wp)
        assert len(b_letters) == len(pp.generators)
        assert len(p1.generators) == 2 * len(pp.generators)
        assert len(p1.relators) == len(pp.relators) + len(b_letters)


class TestSelection:
    def test_certificates_for_small_m(self):
        for m in (0, 1):
            c_words, cert = select_malnormal_words(m, N=7)
            assert len(c_words) == m + 2
            assert cert.is_valid()
            assert cert.rank == m + 2
            assert revalidate_certificate(cert)

    def test_low_modulus_rejected(self):
        with pytest.raises(ThresholdError):
            select_malnormal_words(0, N=6)

    def test_budget_exhaustion(self):
        with pytest.raises(BudgetExhaustedError):
            select_malnormal_words(2, N=7, max_candidates=0)

    def test_tampered_certificate_fails(self):
        _, cert = select_malnormal_words(0, N=7)
        bad = MalnormalCertificate(
            m=cert.m, modulus=cert.modulus, tuple_uv=cert.tuple_uv,
            rank=cert.rank + 1, family_malnormal=cert.family_malnormal,
            base_rank=cert.base_rank,
            translates_malnormal=cert.translates_malnormal)
        assert not revalidate_certificate(bad)


class TestAssemble:
    def test_doubling(self):
        p = pres(["a", "s"], "a^2")
        c = [p.word("a s"), p.word("s")]
        q = assemble_Gw(p, ["a", "s"], c)
        assert len(q.generators) == 4
        assert "a'" in q.generators
        assert len(q.relators) == 2 * len(p.relators) + 4

    def test_mismatch_rejected(self):
        p = pres(["a"], "a^2")
        with pytest.raises(DegenerateInputError):
            assemble_Gw(p, ["a"], [])


class TestEncode:
    def test_identity_short_circuit(self):
        p = pres(["a"])
        trace = encode(p, p.word("1"))
        assert trace.short_circuited
        assert trace.p_w.generators == ("x",)
        assert len(trace.p_w.relators) == 1

    def test_deterministic(self):
        p = pres(["a"])
        t1 = encode(p, p.word("a"))
        t2 = encode(p, p.word("a"))
        assert trace_to_json(t1) == trace_to_json(t2)

    def test_stage_sizes(self):
        p = pres(["a"])
        trace = encode(p, p.word("a"))
        m = 1
        assert len(trace.p_dagger.generators) == (m + 1) * (2 * m + 1)
        assert len(trace.p_prime.generators) == (m + 1) * (2 * m + 1) + 1
        assert len(trace.p1.generators) == 2 * len(trace.p_prime.generators)
        assert len(trace.p2.generators) == len(trace.p1.generators) + 1
        assert len(trace.p_w.generators) == 2 * len(trace.p2.generators)

    def test_output_abelianization_trivial(self):
        p = pres(["a"])
        trace = encode(p, p.word("a"))
        inv = trace.abelianizations["p_w"]
        assert (inv.betti, inv.torsion) == (0, ())


class TestDiscrete:
    def test_c_word_formula(self):
        tw = W.Alphabet(["t", "w"])
        w_ = tw.gen("w")
        t = tw.gen("t")
        c0 = discrete_c_word(w_, t, 0)
        assert c0 == W.parse_word(tw, "t^-1 w t w t^-1 w^-1 t")

    def test_trivial_abelianization(self):
        p = pres(["a"])
        g = encode_discrete(p, p.word("a"))
        inv = abelianization(g)
        assert (inv.betti, inv.torsion) == (0, ())

    def test_identity_short_circuit(self):
        p = pres(["a"])
        g = encode_discrete(p, p.word("1"))
        assert g.generators == ("x",)

    def test_deterministic(self):
        p = pres(["a"], "a^3")
        assert encode_discrete(p, p.word("a")) == encode_discrete(p, p.word("a"))
