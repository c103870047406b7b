"""Exact free-group word algebra over named alphabets.

Words are stored freely reduced; all operations are pure and all values
immutable, so words can be shared freely between workers.

Canonical orders used throughout:
  * letters compare by generator name, then sign (plain before inverse);
  * cyclic words are normalised to their lexicographically least rotation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import AlphabetMismatchError, DegenerateInputError, ParseError

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_']*")

# A letter is a pair (name, sign) with sign in {+1, -1}.


def _letter_key(letter):
    name, sign = letter
    return (name, 0 if sign > 0 else 1)


class Alphabet:
    """An ordered set of generator names; name is its own identity."""

    def __init__(self, names):
        names = tuple(names)
        for name in names:
            if not NAME_RE.fullmatch(name):
                raise ParseError(f"invalid generator name {name!r}")
        if len(set(names)) != len(names):
            raise ParseError(f"duplicate generator names in {names}")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    def __contains__(self, name):
        return name in self._index

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Alphabet({', '.join(self.names)})"

    def check(self, name):
        if name not in self._index:
            raise AlphabetMismatchError(f"unknown generator {name!r} (alphabet {self.names})")

    def word(self, letters=()):
        return reduce(self, letters)

    def gen(self, name, sign=1):
        return reduce(self, [(name, sign)])


@dataclass(frozen=True)
class Word:
    """A freely reduced word; the empty word is the identity."""

    alphabet: Alphabet
    letters: tuple

    def __post_init__(self):
        for i in range(len(self.letters) - 1):
            a, b = self.letters[i], self.letters[i + 1]
            if a[0] == b[0] and a[1] == -b[1]:
                raise ValueError("Word letters are not freely reduced; use reduce()")

    def __len__(self):
        return len(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other):
        _require_same_alphabet(self, other)
        return reduce(self.alphabet, self.letters + other.letters)

    def __pow__(self, n):
        if n == 0:
            return Word(self.alphabet, ())
        base = self if n > 0 else self.inverse()
        return reduce(self.alphabet, base.letters * abs(n))

    def inverse(self):
        return Word(self.alphabet, tuple((g, -s) for g, s in reversed(self.letters)))

    def is_identity(self):
        return not self.letters

    def exponent_sum(self, name):
        self.alphabet.check(name)
        return sum(s for g, s in self.letters if g == name)

    def __str__(self):
        return format_word(self)

    def __repr__(self):
        return f"Word({format_word(self)})"


def _require_same_alphabet(x, y):
    if x.alphabet != y.alphabet:
        raise AlphabetMismatchError(
            f"words over different alphabets: {x.alphabet} vs {y.alphabet}")


def reduce(alphabet, letters):
    """Freely reduce a raw letter sequence; idempotent."""
    stack = []
    for name, sign in letters:
        alphabet.check(name)
        if sign not in (1, -1):
            raise ValueError(f"letter sign must be +1 or -1, got {sign}")
        if stack and stack[-1][0] == name and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((name, sign))
    return Word(alphabet, tuple(stack))


def commutator(x, y):
    """[x, y] = x y x^-1 y^-1, freely reduced."""
    _require_same_alphabet(x, y)
    return reduce(x.alphabet, x.letters + y.letters
                  + x.inverse().letters + y.inverse().letters)


def conjugate(x, by):
    """x^by = by^-1 x by, freely reduced."""
    _require_same_alphabet(x, by)
    return reduce(x.alphabet, by.inverse().letters + x.letters + by.letters)


def cyclic_reduction(x):
    """Strip matching first/last letters; returns (core, conjugator) with
    x = conjugator * core * conjugator^-1."""
    letters = list(x.letters)
    prefix = []
    while len(letters) >= 2 and letters[0][0] == letters[-1][0] \
            and letters[0][1] == -letters[-1][1]:
        prefix.append(letters[0])
        letters = letters[1:-1]
    return Word(x.alphabet, tuple(letters)), Word(x.alphabet, tuple(prefix))


class CyclicWord:
    """A cyclically reduced word up to rotation, with a canonical rotation.

    Two CyclicWords are equal iff their canonical (lexicographically least)
    rotations coincide.
    """

    def __init__(self, word):
        core, _ = cyclic_reduction(word)
        self.representative = core
        self.rotation_index = _least_rotation(core.letters)
        letters = core.letters
        self.canonical = letters[self.rotation_index:] + letters[:self.rotation_index]

    @property
    def alphabet(self):
        return self.representative.alphabet

    def inverse(self):
        return CyclicWord(self.representative.inverse())

    def __len__(self):
        return len(self.canonical)

    def __eq__(self, other):
        return (isinstance(other, CyclicWord)
                and self.alphabet == other.alphabet
                and self.canonical == other.canonical)

    def __hash__(self):
        return hash((self.alphabet, self.canonical))

    def __repr__(self):
        return f"CyclicWord({format_word(Word(self.alphabet, self.canonical))})"


def _least_rotation(letters):
    if not letters:
        return 0
    keys = [_letter_key(l) for l in letters]
    best = 0
    for i in range(1, len(letters)):
        if keys[i:] + keys[:i] < keys[best:] + keys[:best]:
            best = i
    return best


def is_conjugate(x, y):
    """Conjugacy in the free group: equality of canonical cyclic reductions."""
    _require_same_alphabet(x, y)
    return CyclicWord(x) == CyclicWord(y)


def root(x):
    """Primitive root: (p, k) with the cyclic reduction of x equal to p^k, k maximal."""
    if x.is_identity():
        raise DegenerateInputError("the identity has no primitive root")
    core, _ = cyclic_reduction(x)
    letters = core.letters
    n = len(letters)
    for d in range(1, n + 1):
        if n % d == 0 and letters == letters[:d] * (n // d):
            return CyclicWord(Word(x.alphabet, letters[:d])), n // d
    raise AssertionError("unreachable: d = n always matches")


def is_independent(words):
    """Pairwise independence of a tuple of non-identity words.

    In a free group, x and y are dependent iff root(x) is conjugate to
    root(y) or root(y)^-1.  Returns (flag, witness) where witness is the
    offending 1-based index pair (i, j) when the tuple is dependent, else
    None.
    """
    words = list(words)
    for w in words:
        if w.is_identity():
            raise DegenerateInputError("independence is undefined for the identity")
    roots = [root(w)[0] for w in words]
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            if roots[i] == roots[j] or roots[i] == roots[j].inverse():
                return False, (i + 1, j + 1)
    return True, None


TOKEN_RE = re.compile(r"([A-Za-z][A-Za-z0-9_']*)(?:\^(-?\d+))?$")


def parse_word(alphabet, text):
    """Parse the word grammar: whitespace-separated tokens name, name^-1 or
    name^k; '1' (alone or as a token) denotes the identity."""
    letters = []
    for token in text.split():
        if token == "1":
            continue
        match = TOKEN_RE.fullmatch(token)
        if not match:
            raise ParseError(f"bad word token {token!r}")
        name, power = match.group(1), match.group(2)
        if name not in alphabet:
            raise AlphabetMismatchError(
                f"unknown generator {name!r} (alphabet {alphabet.names})")
        k = 1 if power is None else int(power)
        if k == 0:
            raise ParseError(f"zero power in token {token!r}")
        letters.extend([(name, 1 if k > 0 else -1)] * abs(k))
    return reduce(alphabet, letters)


def format_word(word):
    """Inverse of parse_word, with runs printed as powers."""
    if not word.letters:
        return "1"
    out = []
    i = 0
    letters = word.letters
    while i < len(letters):
        name, sign = letters[i]
        j = i
        while j < len(letters) and letters[j] == (name, sign):
            j += 1
        k = (j - i) * sign
        out.append(name if k == 1 else f"{name}^{k}")
        i = j
    return " ".join(out)
