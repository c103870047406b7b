"""The encoding pipeline: from (presentation, word) to a presentation whose
profinite completion is trivial exactly when the word dies in every finite
quotient of the input group.

The pipeline is a composition of four stages, each a plain presentation
transformation, with every intermediate object kept in an EncodingTrace:

  1. pass to generators that map injectively under the relevant quotients
     (2m+1 copies, then a verified change of generating set);
  2. adjoin a fresh letter and re-generate so orders can be controlled,
     replacing the word by a commutator;
  3. make every generator conjugate to the word via fresh stable letters,
     add one more free stable letter t, and select a certified malnormal
     tuple of words c_j in the derived letters u, v;
  4. double the result and glue the b's of each half to the c's of the other.

Everything is deterministic: identical inputs give byte-identical traces.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import stallings as S
from . import words as W
from .errors import (AlphabetMismatchError, BudgetExhaustedError,
                     DegenerateInputError, NameCollisionError, ThresholdError)
from .presentations import (FinitePresentation, abelianization,
                            add_conjugation_relators, free_product_with_renaming,
                            substitute, tietze_change_generators,
                            verify_generator_change)

UV = W.Alphabet(["u", "v"])
TW = W.Alphabet(["t", "w"])

# u and v in terms of t and w (t, w playing the roles of the generator and
# the grading letter of the rank-3 kernel subgroup):
#   u = t^w (t^{w^2})^-1,  v = t^w (t^{w^-1})^-1
U_IN_TW = W.parse_word(TW, "w^-1 t w w^-2 t^-1 w^2")
V_IN_TW = W.parse_word(TW, "w^-1 t w w t^-1 w^-1")


def step_injective_generators(p, w):
    """Stage 1: build 2m+1 copies and change to the injectivity-friendly
    generating set x_ij = a_ij w_{j+m+1} w_{i+j}, y_j = w_j (indices 1-based
    mod 2m+1, residue 0 read as 2m+1).  Returns (P-dagger, w-dagger = y_1)."""
    if w.alphabet != p.alphabet:
        raise AlphabetMismatchError("word over a different alphabet than the presentation")
    if w.is_identity():
        raise DegenerateInputError("stage 1 requires a nonempty word")
    m = len(p.generators)
    k = 2 * m + 1

    def mod1(x):
        return (x - 1) % k + 1

    copy_names = [f"g{i}_{j}" for j in range(1, k + 1) for i in range(1, m + 1)]
    copies = W.Alphabet(copy_names)
    renames = {j: {g: f"g{i}_{j}" for i, g in enumerate(p.generators, 1)}
               for j in range(1, k + 1)}

    def to_copy(word, j):
        return W.reduce(copies, [(renames[j][g], s) for g, s in word.letters])

    pre_relators = [to_copy(r, j) for j in range(1, k + 1) for r in p.relators]
    pre = FinitePresentation(copies, pre_relators)
    w_copy = {j: to_copy(w, j) for j in range(1, k + 1)}

    definitions = {}
    for i in range(1, m + 1):
        for j in range(1, k + 1):
            definitions[f"x{i}_{j}"] = (copies.gen(f"g{i}_{j}")
                                        * w_copy[mod1(j + m + 1)] * w_copy[mod1(i + j)])
    for j in range(1, k + 1):
        definitions[f"y{j}"] = w_copy[j]
    new_alphabet = W.Alphabet(tuple(definitions.keys()))
    inverse = {}
    for i in range(1, m + 1):
        for j in range(1, k + 1):
            inverse[f"g{i}_{j}"] = (new_alphabet.gen(f"x{i}_{j}")
                                    * new_alphabet.gen(f"y{mod1(i + j)}", -1)
                                    * new_alphabet.gen(f"y{mod1(j + m + 1)}", -1))
    verify_generator_change(pre, definitions, inverse)

    # The x-definitions become redundant once every y_j is pinned to the
    # rewritten w_j, so the presentation needs only the copied relators and
    # one relator per y.
    relators = [substitute(r, new_alphabet, inverse) for r in pre.relators]
    for j in range(1, k + 1):
        relators.append(new_alphabet.gen(f"y{j}")
                        * substitute(w_copy[j], new_alphabet, inverse).inverse())
    p_dagger = FinitePresentation(new_alphabet, relators)
    return p_dagger, new_alphabet.gen("y1")


def step_order_control(p_dagger, w_dagger):
    """Stage 2: adjoin a fresh a'_0 and re-generate with a'_i = (old_i) a'_0;
    the word becomes the commutator w' = [w-dagger, a'_0]."""
    if w_dagger.alphabet != p_dagger.alphabet:
        raise AlphabetMismatchError("word over a different alphabet than the presentation")
    product, rename = free_product_with_renaming(
        p_dagger, FinitePresentation(["a0"], []))
    a0 = rename["a0"]
    definitions = {"a'_0": product.alphabet.gen(a0)}
    for i, g in enumerate(p_dagger.generators, 1):
        definitions[f"a'_{i}"] = product.alphabet.gen(g) * product.alphabet.gen(a0)
    new_alphabet = W.Alphabet(tuple(definitions.keys()))
    inverse = {a0: new_alphabet.gen("a'_0")}
    for i, g in enumerate(p_dagger.generators, 1):
        inverse[g] = new_alphabet.gen(f"a'_{i}") * new_alphabet.gen("a'_0", -1)
    p_prime = tietze_change_generators(product, definitions, inverse)

    w_lifted = W.reduce(product.alphabet, w_dagger.letters)
    w_new = substitute(w_lifted, new_alphabet, inverse)
    w_prime = W.commutator(w_new, new_alphabet.gen("a'_0"))
    return p_prime, w_prime


def step_conjugators(p_prime, w_prime):
    """Stage 3a: adjoin b_0..b_m and relators (w')^{b_i} = i-th generator."""
    targets = [p_prime.alphabet.gen(g) for g in p_prime.generators]
    letters = [f"b_{i}" for i in range(len(targets))]
    return add_conjugation_relators(p_prime, w_prime, targets, letters), letters


@dataclass(frozen=True)
class MalnormalCertificate:
    """Evidence that a selected tuple works: the folded candidate graph has
    the right rank and certifies malnormal, and the rank-3 base family of
    the modulus-N kernel passes the rotation-translate check."""

    m: int
    modulus: int
    tuple_uv: tuple          # the c_j as Words over {u, v}
    rank: int                # rank of the folded candidate subgroup graph
    family_malnormal: bool
    base_rank: int           # rank of the <e_0, u, v> kernel core (3)
    translates_malnormal: bool

    def is_valid(self):
        return (self.rank == self.m + 2 and self.family_malnormal
                and self.base_rank == 3 and self.translates_malnormal)


def _kernel_base_family(N):
    """The modulus-N instance: core graph of <e_0, e_{N-1}e_{N-2}^-1,
    e_{N-1}e_1^-1> in the rose on e_0..e_{N-1}, with the rotation action."""
    E = W.Alphabet([f"e{i}" for i in range(N)])
    base = S.rose(E.names)
    gens = [E.gen("e0"),
            E.gen(f"e{N - 1}") * E.gen(f"e{N - 2}", -1),
            E.gen(f"e{N - 1}") * E.gen("e1", -1)]
    sub = S.graph_of_subgroup(base, gens)
    rotation = {f"e{i}": f"e{(i + 1) % N}" for i in range(N)}
    action = S.RelabelingAction.cyclic(base, rotation)
    return base, sub, action


def _candidate_tuples(size):
    """Deterministic candidate stream.

    The first candidate is the commutator-power family [u^{j+1}, v^{j+1}],
    which certifies at every size tried; after that the stream falls back to
    exhaustive enumeration of tuples of nontrivial reduced words ordered by
    total length then lexicographically."""
    yield tuple(W.commutator(UV.gen("u") ** (j + 1), UV.gen("v") ** (j + 1))
                for j in range(size))
    by_length = {}

    def words_of_length(n):
        if n not in by_length:
            out = []
            for signs in itertools.product([("u", 1), ("u", -1), ("v", 1), ("v", -1)],
                                           repeat=n):
                word = W.Word(UV, signs) if _reduced(signs) else None
                if word is not None:
                    out.append(word)
            out.sort(key=lambda x: [W._letter_key(l) for l in x.letters])
            by_length[n] = out
        return by_length[n]

    total = size
    while True:
        for split in _compositions(total, size):
            pools = [words_of_length(n) for n in split]
            yield from itertools.product(*pools)
        total += 1


def _reduced(letters):
    return all(not (a[0] == b[0] and a[1] == -b[1])
               for a, b in zip(letters, letters[1:]))


def _compositions(total, parts):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def select_malnormal_words(m, N=7, max_candidates=64):
    """Choose m+2 words c_0..c_{m+1} in {u, v} whose subgroup is free of
    rank m+2 and malnormal, certifying every claim at runtime.

    Returns (tuple of Words over {t, w}, certificate).  Requires N > 6; the
    modulus-N rotation check (independent of the candidate) is part of the
    certificate.  Raises when the candidate budget runs out."""
    if N <= 6:
        raise ThresholdError(f"modulus {N} is below the certified threshold (need > 6)")
    if m < 0:
        raise DegenerateInputError("m must be nonnegative")
    base, kernel_sub, action = _kernel_base_family(N)
    base_rank = S.total_rank(kernel_sub.domain)
    translates_ok, _ = S.translate_family_check(base, action, kernel_sub,
                                                action.elements)
    rose_uv = S.rose(["u", "v"])
    for candidate in itertools.islice(_candidate_tuples(m + 2), max_candidates):
        graph = S.graph_of_subgroup(rose_uv, candidate)
        r = S.total_rank(graph.domain)
        if r != m + 2:
            continue
        ok, _ = S.malnormal_family_check([graph])
        if not ok:
            continue
        cert = MalnormalCertificate(
            m=m, modulus=N, tuple_uv=tuple(candidate), rank=r,
            family_malnormal=True, base_rank=base_rank,
            translates_malnormal=translates_ok)
        if not cert.is_valid():
            continue
        table = {"u": U_IN_TW, "v": V_IN_TW}
        in_tw = tuple(substitute(c, TW, table) for c in candidate)
        return in_tw, cert
    raise BudgetExhaustedError(
        f"no certified tuple among the first {max_candidates} candidates")


def revalidate_certificate(cert):
    """Re-run every check recorded in a certificate from scratch."""
    try:
        base, kernel_sub, action = _kernel_base_family(cert.modulus)
    except Exception:
        return False
    if S.total_rank(kernel_sub.domain) != cert.base_rank:
        return False
    translates_ok, _ = S.translate_family_check(base, action, kernel_sub,
                                                action.elements)
    rose_uv = S.rose(["u", "v"])
    graph = S.graph_of_subgroup(rose_uv, cert.tuple_uv)
    ok, _ = S.malnormal_family_check([graph])
    return (translates_ok == cert.translates_malnormal
            and S.total_rank(graph.domain) == cert.rank
            and ok == cert.family_malnormal
            and cert.is_valid())


def assemble_Gw(p2, b_letters, c_words):
    """Stage 4: double p2 with primed generator names and glue each half's
    b_i to the other half's c_i."""
    if len(b_letters) != len(c_words):
        raise DegenerateInputError(
            f"{len(b_letters)} b-letters but {len(c_words)} c-words")
    primed = {g: g + "'" for g in p2.generators}
    names = p2.generators + tuple(primed[g] for g in p2.generators)
    if len(set(names)) != len(names):
        raise NameCollisionError("priming generator names caused a collision")
    alphabet = W.Alphabet(names)
    lift = {g: g for g in p2.generators}

    def as_new(word, table):
        return W.reduce(alphabet, [(table[g], s) for g, s in word.letters])

    relators = [as_new(r, lift) for r in p2.relators]
    relators += [as_new(r, primed) for r in p2.relators]
    for b, c in zip(b_letters, c_words):
        relators.append(as_new(c, lift) * alphabet.gen(primed[b]).inverse())
        relators.append(alphabet.gen(b) * as_new(c, primed).inverse())
    return FinitePresentation(alphabet, relators)


@dataclass
class EncodingTrace:
    """Every intermediate object of one encoding run."""

    input_presentation: FinitePresentation
    input_word: W.Word
    modulus: int
    short_circuited: bool
    p_dagger: FinitePresentation | None = None
    w_dagger: W.Word | None = None
    p_prime: FinitePresentation | None = None
    w_prime: W.Word | None = None
    p1: FinitePresentation | None = None
    b_letters: tuple = ()
    p2: FinitePresentation | None = None
    t_letter: str | None = None
    u: W.Word | None = None
    v: W.Word | None = None
    c_words_tw: tuple = ()
    c_words: tuple = ()
    certificate: MalnormalCertificate | None = None
    p_w: FinitePresentation | None = None
    abelianizations: dict | None = None

    def stages(self):
        out = {"input": self.input_presentation}
        for name in ("p_dagger", "p_prime", "p1", "p2", "p_w"):
            stage = getattr(self, name)
            if stage is not None:
                out[name] = stage
        return out


def encode(p, w, N=7, max_candidates=64):
    """Run the full pipeline on (p, w) and keep every intermediate object.

    The identity word short-circuits to the trivial presentation <x | x>;
    otherwise the four stages run in order and each stage's abelian
    invariants are recorded."""
    if w.alphabet != p.alphabet:
        raise AlphabetMismatchError("word over a different alphabet than the presentation")
    if w.is_identity():
        x = W.Alphabet(["x"])
        trivial = FinitePresentation(x, [x.gen("x")])
        trace = EncodingTrace(p, w, N, short_circuited=True, p_w=trivial)
        trace.abelianizations = {"input": abelianization(p),
                                 "p_w": abelianization(trivial)}
        return trace

    trace = EncodingTrace(p, w, N, short_circuited=False)
    trace.p_dagger, trace.w_dagger = step_injective_generators(p, w)
    trace.p_prime, trace.w_prime = step_order_control(trace.p_dagger, trace.w_dagger)
    trace.p1, b_letters = step_conjugators(trace.p_prime, trace.w_prime)

    m = len(trace.p_prime.generators) - 1
    t_name = f"b_{m + 1}"
    p2, rename = free_product_with_renaming(
        trace.p1, FinitePresentation([t_name], []))
    trace.p2 = p2
    trace.t_letter = rename[t_name]
    trace.b_letters = tuple(b_letters) + (trace.t_letter,)

    t = p2.alphabet.gen(trace.t_letter)
    w_prime_2 = W.reduce(p2.alphabet, trace.w_prime.letters)
    table = {"t": t, "w": w_prime_2}
    trace.u = substitute(U_IN_TW, p2.alphabet, table)
    trace.v = substitute(V_IN_TW, p2.alphabet, table)

    trace.c_words_tw, trace.certificate = select_malnormal_words(
        m, N, max_candidates)
    trace.c_words = tuple(substitute(c, p2.alphabet, table)
                          for c in trace.c_words_tw)

    trace.p_w = assemble_Gw(p2, trace.b_letters, trace.c_words)
    trace.abelianizations = {name: abelianization(stage)
                             for name, stage in trace.stages().items()}
    return trace


def discrete_c_word(w, t, j):
    """The discrete-case conjugator word (w^t)^{j+1} w (w^t)^{-1-j}."""
    w_t = W.conjugate(w, t)
    return (w_t ** (j + 1)) * w * (w_t ** (-1 - j))


def encode_discrete(p, w):
    """The simpler discrete-case construction.

    Adjoins a fresh a0 so the generator list reads a_0..a_m and replaces the
    word by the commutator [w, a0] (so a nontrivial word gains infinite
    order), conjugates every generator to it with stable letters b_0..b_m,
    adds a free b_{m+1}, takes c_j = (w^{b_{m+1}})^{j+1} w (w^{b_{m+1}})^{-1-j}
    and doubles."""
    if w.alphabet != p.alphabet:
        raise AlphabetMismatchError("word over a different alphabet than the presentation")
    if w.is_identity():
        x = W.Alphabet(["x"])
        return FinitePresentation(x, [x.gen("x")])
    g0, rename = free_product_with_renaming(FinitePresentation(["a0"], []), p)
    a0 = "a0"  # first factor keeps its names; rename covers p's generators
    w_lifted = W.reduce(g0.alphabet, [(rename[g], s) for g, s in w.letters])
    w_used = W.commutator(w_lifted, g0.alphabet.gen(a0))
    m = len(p.generators)
    targets = [g0.alphabet.gen(g) for g in g0.generators]
    letters = [f"b_{i}" for i in range(m + 1)]
    g1 = add_conjugation_relators(g0, w_used, targets, letters)
    t_name = f"b_{m + 1}"
    g2, rename2 = free_product_with_renaming(g1, FinitePresentation([t_name], []))
    t_name = rename2[t_name]
    w2 = W.reduce(g2.alphabet, w_used.letters)
    t = g2.alphabet.gen(t_name)
    cs = [discrete_c_word(w2, t, j) for j in range(m + 2)]
    return assemble_Gw(g2, tuple(letters) + (t_name,), cs)
