"""Independent oracles shared by the test modules.

Everything here is deliberately naive: closures by repeated multiplication,
exhaustive assignment enumeration, gcds of minors.  The oracles never call
the code paths they are used to check.
"""

import itertools
import math

from forge import words as W


def nielsen_reduce(generators):
    """Shorten a generating set by length-decreasing Nielsen moves.

    Replaces a generator by its product with another whenever that is
    strictly shorter, until no move applies; the subgroup is unchanged and
    the resulting basis is short, so products reach every short subgroup
    element through short intermediates."""
    gens = [g for g in generators if not g.is_identity()]
    changed = True
    while changed:
        changed = False
        gens = [g for g in gens if not g.is_identity()]
        # Deduplicate up to inversion.
        seen = set()
        unique = []
        for g in gens:
            key = min(g.letters, g.inverse().letters)
            if key not in seen:
                seen.add(key)
                unique.append(g)
        gens = unique
        for i in range(len(gens)):
            for j in range(len(gens)):
                if i == j:
                    continue
                for x in (gens[i], gens[i].inverse()):
                    for y in (gens[j], gens[j].inverse()):
                        t = x * y
                        if len(t) < len(gens[i]):
                            gens[i] = t
                            changed = True
            if changed:
                break
    return gens


def _tuple_mul(a, b):
    i, j = len(a), 0
    while i > 0 and j < len(b) and a[i - 1][0] == b[j][0] \
            and a[i - 1][1] == -b[j][1]:
        i -= 1
        j += 1
    return a[:i] + b[j:]


def _tuple_inv(a):
    return tuple((g, -s) for g, s in reversed(a))


def subgroup_ball(generators, radius, cap=None):
    """All subgroup elements of reduced length <= radius, as letter tuples.

    Nielsen-reduces the generating set first, then closes it under
    multiplication with intermediate lengths capped; the short basis keeps
    the intermediates short enough for the cap to be harmless."""
    generators = nielsen_reduce(generators)
    alphabet = generators[0].alphabet if generators else None
    if alphabet is not None and \
            {min(g.letters, _tuple_inv(g.letters)) for g in generators} == \
            {((name, 1),) for name in alphabet.names}:
        # The basis is the whole ambient free group: the ball is every
        # reduced word, enumerated directly.
        out = {()}
        frontier = [()]
        for _ in range(radius):
            frontier = [w + (l,) for w in frontier
                        for l in ((n, s) for n in alphabet.names for s in (1, -1))
                        if not (w and w[-1][0] == l[0] and w[-1][1] == -l[1])]
            out.update(frontier)
        return out
    if cap is None:
        cap = radius + max((len(g) for g in generators), default=0)
    gens = []
    for g in generators:
        gens.append(g.letters)
        gens.append(_tuple_inv(g.letters))
    seen = {()}
    frontier = [()]
    while frontier:
        new = []
        for s in frontier:
            for g in gens:
                t = _tuple_mul(s, g)
                if len(t) <= cap and t not in seen:
                    seen.add(t)
                    new.append(t)
        frontier = new
    return {s for s in seen if len(s) <= radius}


def random_reduced_word(rng, alphabet, length):
    """A uniformly random freely reduced word of exactly `length` letters."""
    letters = []
    while len(letters) < length:
        choices = [(g, s) for g in alphabet.names for s in (1, -1)]
        if letters:
            last = letters[-1]
            choices = [c for c in choices if c != (last[0], -last[1])]
        letters.append(rng.choice(choices))
    return W.Word(alphabet, tuple(letters))


def brute_force_homs(p, n):
    """Exhaustive assignment enumeration: every tuple of permutations that
    satisfies every relator."""
    from forge.quotients import PermutationAssignment, identity_perm
    perms = sorted(itertools.permutations(range(n)))
    out = []
    for images in itertools.product(perms, repeat=len(p.generators)):
        q = PermutationAssignment(n, dict(zip(p.generators, images)))
        if all(q.evaluate(r) == identity_perm(n) for r in p.relators):
            out.append(q)
    return out


def determinantal_divisors(matrix):
    """gcd of all k x k minors for k = 1..rank; the k-th invariant factor is
    d_k / d_{k-1}.  Exact and independent of any normal-form code."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    divisors = []
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for ri in itertools.combinations(range(rows), k):
            for ci in itertools.combinations(range(cols), k):
                g = math.gcd(g, _minor(matrix, ri, ci))
        if g == 0:
            break
        divisors.append(g)
    return divisors


def _minor(matrix, ri, ci):
    sub = [[matrix[r][c] for c in ci] for r in ri]
    return _det(sub)


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        if m[0][j]:
            rest = [row[:j] + row[j + 1:] for row in m[1:]]
            total += (-1) ** j * m[0][j] * _det(rest)
    return total


def invariant_factors_oracle(matrix):
    """Nonzero invariant factors from determinantal divisors."""
    divisors = determinantal_divisors(matrix)
    factors = []
    prev = 1
    for d in divisors:
        factors.append(d // prev)
        prev = d
    return factors
