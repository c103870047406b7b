"""Finite-quotient search: homomorphisms into symmetric groups.

Survival of a word in every finite quotient is only semi-decidable, so all
searches run under an explicit budget and an exhausted search is reported
as inconclusive, never as a proof of triviality.

Determinism: generators are assigned in alphabet order and candidate
permutations in lexicographic order of their image tuples, so witnesses are
canonical and re-running a search reproduces them byte for byte.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

from . import words as W
from .errors import AlphabetMismatchError, DegenerateInputError, IndependenceError
from .presentations import FinitePresentation, substitute

# Permutations are tuples p with p[i] = image of point i (0-based internally;
# cycle notation is printed 1-based).


def identity_perm(n):
    return tuple(range(n))


def perm_mul(p, q):
    """p then q (left-to-right composition, matching word evaluation)."""
    return tuple(q[p[i]] for i in range(len(p)))


def perm_inv(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def perm_order(p):
    order = 1
    for length in _cycle_lengths(p):
        order = order * length // math.gcd(order, length)
    return order


def _cycle_lengths(p):
    seen = [False] * len(p)
    lengths = []
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        lengths.append(length)
    return lengths


def cycle_notation(p):
    """1-based disjoint-cycle string, 'id' for the identity."""
    seen = [False] * len(p)
    parts = []
    for i in range(len(p)):
        if seen[i] or p[i] == i:
            seen[i] = True
            continue
        cycle = []
        j = i
        while not seen[j]:
            seen[j] = True
            cycle.append(j + 1)
            j = p[j]
        parts.append("(" + " ".join(map(str, cycle)) + ")")
    return "".join(parts) if parts else "id"


@dataclass(frozen=True)
class PermutationAssignment:
    """A homomorphism to a symmetric group, given on the generators."""

    degree: int
    images: dict = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "images", dict(self.images))

    def __eq__(self, other):
        return (isinstance(other, PermutationAssignment)
                and self.degree == other.degree and self.images == other.images)

    def evaluate(self, word):
        out = identity_perm(self.degree)
        for name, sign in word.letters:
            if name not in self.images:
                raise AlphabetMismatchError(f"no image assigned for generator {name!r}")
            p = self.images[name]
            out = perm_mul(out, p if sign > 0 else perm_inv(p))
        return out

    def is_trivial(self):
        ident = identity_perm(self.degree)
        return all(p == ident for p in self.images.values())

    def describe(self):
        return {name: cycle_notation(p) for name, p in sorted(self.images.items())}


@dataclass(frozen=True)
class OrderSpec:
    """Targets gamma_1..gamma_m with required orders kappa * e_i and pairwise
    trivial cyclic intersections."""

    targets: tuple
    kappa: int
    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        if len(self.targets) != len(self.exponents):
            raise DegenerateInputError("one exponent per target is required")
        if len(self.targets) < 2:
            raise DegenerateInputError("an order spec needs at least two targets")
        if self.kappa < 1 or any(e < 1 for e in self.exponents):
            raise DegenerateInputError("kappa and all exponents must be >= 1")


@dataclass(frozen=True)
class SearchBudget:
    """Hard limits for a semi-decision search."""

    max_degree: int
    max_nodes: int = 10 ** 7
    time_limit: float | None = None

    def __post_init__(self):
        if self.max_degree < 1 or self.max_nodes < 1:
            raise DegenerateInputError("budget bounds must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise DegenerateInputError("time limit must be positive")


@dataclass
class SearchOutcome:
    """Result of a budgeted search.  status is 'witness' or 'exhausted';
    exhausted never proves anything and is reported as inconclusive."""

    status: str
    witness: PermutationAssignment | None
    nodes: int
    max_degree_searched: int


class _Budget:
    def __init__(self, budget):
        self.max_nodes = budget.max_nodes
        self.deadline = (time.monotonic() + budget.time_limit
                         if budget.time_limit is not None else None)
        self.nodes = 0

    def spend(self):
        self.nodes += 1
        if self.nodes > self.max_nodes:
            return False
        if self.deadline is not None and self.nodes % 1024 == 0 \
                and time.monotonic() > self.deadline:
            return False
        return True


def _class_minimal_perms(n):
    """Lexicographically least permutation of each cycle type of degree n."""
    best = {}
    for p in itertools.permutations(range(n)):
        key = tuple(sorted(_cycle_lengths(p)))
        if key not in best or p < best[key]:
            best[key] = p
    return sorted(best.values())


def _enumerate_homs(p, n, budget=None, reduce_first=False):
    """DFS over generator assignments in canonical order, yielding complete
    homomorphisms.  A relator is checked as soon as all its generators are
    assigned.  With reduce_first=True the first generator ranges only over
    conjugacy-class-minimal permutations (sound for existence questions,
    since conjugating a homomorphism preserves relators and element orders).
    """
    gens = p.generators
    all_perms = sorted(itertools.permutations(range(n)))
    checkpoints = {}  # index of last assigned generator -> relators to check
    for r in p.relators:
        last = max(gens.index(g) for g, _ in r.letters) if r.letters else 0
        checkpoints.setdefault(last, []).append(r)
    if not gens:
        yield PermutationAssignment(n, {})
        return

    def dfs(i, images):
        if budget is not None and not budget.spend():
            raise _BudgetStop
        if i == len(gens):
            yield PermutationAssignment(n, dict(images))
            return
        choices = all_perms if (i > 0 or not reduce_first) else _class_minimal_perms(n)
        for perm in choices:
            images[gens[i]] = perm
            partial = PermutationAssignment(n, images)
            if all(partial.evaluate(r) == identity_perm(n)
                   for r in checkpoints.get(i, [])):
                yield from dfs(i + 1, images)
            del images[gens[i]]

    yield from dfs(0, {})


class _BudgetStop(Exception):
    pass


def search_homs(p, n, mode="all"):
    """All homomorphisms of the presented group into the degree-n symmetric
    group, or the first one with nontrivial image.

    `all` enumerates the full assignment space (no symmetry reduction), so
    the count matches brute-force enumeration."""
    if n < 1:
        raise DegenerateInputError("degree must be >= 1")
    if mode not in ("all", "first-nontrivial"):
        raise DegenerateInputError(f"unknown mode {mode!r}")
    if mode == "all":
        return list(_enumerate_homs(p, n))
    for q in _enumerate_homs(p, n, reduce_first=True):
        if not q.is_trivial():
            return [q]
    return []


# ---------------------------------------------------------------------------
# Presentation simplification (internal).
#
# One Tietze move, applied to a fixpoint: a generator occurring exactly once
# in some relator (with exponent +-1) can be solved for there; it is then
# substituted away in every other relator and dropped along with the solving
# relator.  Each move removes one generator and one relator, so the loop
# terminates.  Each eliminated generator gets an expression over the
# surviving alphabet, so homomorphisms and words transfer back and forth
# exactly.


@dataclass
class SimplifiedPresentation:
    presentation: FinitePresentation
    expressions: dict  # original generator -> Word over the simplified alphabet


def simplify_presentation(p):
    """Iterate the two deletion moves to a fixpoint.

    The simplified presentation presents an isomorphic group; `expressions`
    rewrites every original generator over the surviving generators, which
    is what lets searches run on the small presentation and report witnesses
    on the original one."""
    alphabet = p.alphabet
    relators = list(p.relators)
    steps = []  # (gen, expression Word over the post-elimination alphabet)
    while True:
        move = _find_move(alphabet, relators)
        if move is None:
            break
        gen, expr_letters, drop_index = move
        new_alphabet = W.Alphabet(tuple(g for g in alphabet.names if g != gen))
        expr = W.reduce(new_alphabet, expr_letters)
        steps.append((gen, expr))
        table = {g: new_alphabet.gen(g) for g in new_alphabet.names}
        table[gen] = expr
        new_relators = []
        for idx, r in enumerate(relators):
            if idx == drop_index:
                continue
            reduced = substitute(r, new_alphabet, table)
            if not reduced.is_identity():
                new_relators.append(reduced)
        alphabet, relators = new_alphabet, new_relators
    simplified = FinitePresentation(alphabet, relators)
    expressions = {g: alphabet.gen(g) for g in alphabet.names}
    for gen, expr in reversed(steps):
        expressions[gen] = substitute(expr, alphabet, expressions)
    return SimplifiedPresentation(simplified, expressions)


def _find_move(alphabet, relators):
    """Next elimination: a generator with exactly one occurrence in some
    relator.  The shortest usable relator is preferred (then relator index,
    then position), which keeps the substitution blow-up small.  Returns
    (generator, expression letters, index of relator to drop) or None."""
    best = None
    for idx, r in enumerate(relators):
        counts = {}
        for g, _ in r.letters:
            counts[g] = counts.get(g, 0) + 1
        for pos, (g, sign) in enumerate(r.letters):
            if counts[g] != 1:
                continue
            key = (len(r.letters), idx, pos)
            if best is None or key < best[0]:
                best = (key, idx, pos, g, sign)
            break
    if best is None:
        return None
    _, idx, pos, g, sign = best
    letters = relators[idx].letters
    # r = u g^sign v = 1  =>  g^sign = u^-1 v^-1
    u, v = letters[:pos], letters[pos + 1:]
    solved = tuple((h, -s) for h, s in reversed(u)) \
        + tuple((h, -s) for h, s in reversed(v))
    if sign < 0:
        solved = tuple((h, -s) for h, s in reversed(solved))
    return g, solved, idx


def _transfer_word(simp, word):
    return substitute(word, simp.presentation.alphabet, simp.expressions)


def _restore_assignment(p, simp, q):
    """Extend a hom on the simplified presentation to the original generators."""
    images = {g: q.evaluate(expr) for g, expr in simp.expressions.items()}
    full = PermutationAssignment(q.degree, {g: images[g] for g in p.generators})
    return full


def word_survives_upto(p, w, budget):
    """Look for a finite quotient in which w is nontrivial.

    Searches symmetric groups of degree 2..budget.max_degree in canonical
    order.  An exhausted search is NOT evidence that w dies in every finite
    quotient; callers must report it as inconclusive."""
    if w.alphabet != p.alphabet:
        raise AlphabetMismatchError("word over a different alphabet than the presentation")
    simp = simplify_presentation(p)
    ws = _transfer_word(simp, w)
    tracker = _Budget(budget)
    top = 1
    try:
        for n in range(2, budget.max_degree + 1):
            top = n
            for q in _enumerate_homs(simp.presentation, n, tracker, reduce_first=True):
                if q.evaluate(ws) != identity_perm(n):
                    return SearchOutcome("witness", _restore_assignment(p, simp, q),
                                         tracker.nodes, n)
    except _BudgetStop:
        pass
    return SearchOutcome("exhausted", None, tracker.nodes, top)


def has_nontrivial_quotient_upto(p, budget):
    """First-nontrivial search over degrees 2..max; exhausted is inconclusive."""
    simp = simplify_presentation(p)
    tracker = _Budget(budget)
    top = 1
    try:
        for n in range(2, budget.max_degree + 1):
            top = n
            for q in _enumerate_homs(simp.presentation, n, tracker, reduce_first=True):
                full = _restore_assignment(p, simp, q)
                if not full.is_trivial():
                    return SearchOutcome("witness", full, tracker.nodes, n)
    except _BudgetStop:
        pass
    return SearchOutcome("exhausted", None, tracker.nodes, top)


def element_order(q, w):
    """Multiplicative order of the image of w."""
    return perm_order(q.evaluate(w))


def verify_order_spec(q, spec):
    """Check o(q(gamma_i)) = kappa*e_i and that distinct cyclic subgroups
    <q(gamma_i)> intersect trivially.  Returns (ok, report)."""
    order_report = []
    perms = [q.evaluate(t) for t in spec.targets]
    ok = True
    for i, (perm, e) in enumerate(zip(perms, spec.exponents)):
        expected = spec.kappa * e
        actual = perm_order(perm)
        good = actual == expected
        ok = ok and good
        order_report.append({"target": i, "expected": expected,
                             "actual": actual, "ok": good})
    subgroups = [_cyclic_subgroup(perm) for perm in perms]
    pair_report = []
    for i in range(len(perms)):
        for j in range(i + 1, len(perms)):
            meet = subgroups[i] & subgroups[j]
            good = meet == {identity_perm(q.degree)}
            ok = ok and good
            pair_report.append({"pair": (i, j), "intersection_size": len(meet),
                                "ok": good})
    return ok, {"orders": order_report, "intersections": pair_report}


def _cyclic_subgroup(perm):
    ident = identity_perm(len(perm))
    out = {ident}
    cur = perm
    while cur != ident:
        out.add(cur)
        cur = perm_mul(cur, perm)
    return out


def search_order_targeted(p, spec, budget):
    """Search for a hom satisfying an order spec.

    For a free presentation the targets must be pairwise independent, which
    is a necessary condition for such quotients to exist with unconstrained
    kappa; dependence is rejected up front."""
    for t in spec.targets:
        if t.alphabet != p.alphabet:
            raise AlphabetMismatchError("spec target over a different alphabet")
    if not p.relators:
        flag, pair = W.is_independent(spec.targets)
        if not flag:
            raise IndependenceError(f"targets {pair[0]} and {pair[1]} are dependent")
    tracker = _Budget(budget)
    top = 1
    try:
        for n in range(2, budget.max_degree + 1):
            top = n
            for q in _enumerate_homs(p, n, tracker, reduce_first=True):
                ok, _ = verify_order_spec(q, spec)
                if ok:
                    return SearchOutcome("witness", q, tracker.nodes, n)
    except _BudgetStop:
        pass
    return SearchOutcome("exhausted", None, tracker.nodes, top)


def grushko_lower_bound(n):
    """ceil(59n/60): a lower bound for the profinite rank of an n-fold free
    product of any fixed group with nontrivial profinite completion."""
    if n < 0:
        raise DegenerateInputError("n must be nonnegative")
    return -(-59 * n // 60)
