"""Reduced words in a free group of finite rank.

Letters are nonzero ints: ``i`` is the i-th generator and ``-i`` its inverse.
Most of the heavy lifting elsewhere runs on plain tuples through the
underscore helpers here; :class:`Word` is the public wrapper.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Alphabet",
    "Word",
    "reduce",
    "multiply",
    "inverse",
    "commutator",
    "power",
    "cyclic_reduce",
    "parse_word",
    "format_word",
    "words_up_to",
]


def _reduce(letters: Iterable[int]) -> tuple:
    out: list = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _cancel_len(u: Sequence[int], v: Sequence[int]) -> int:
    # u and v reduced; length of the cancelling suffix of u against prefix of v
    k = 0
    m = min(len(u), len(v))
    while k < m and u[-1 - k] == -v[k]:
        k += 1
    return k


def _mul(u: tuple, v: tuple) -> tuple:
    k = _cancel_len(u, v)
    return u[: len(u) - k] + v[k:]


def _inv(u: tuple) -> tuple:
    return tuple(-x for x in reversed(u))


def _pow(u: tuple, n: int) -> tuple:
    if n < 0:
        u, n = _inv(u), -n
    if n == 0 or not u:
        return ()
    core, conj = _cyclic(u)
    return _mul(_mul(conj, core * n), _inv(conj))


def _comm(g: tuple, x: tuple) -> tuple:
    return _mul(_mul(_mul(g, x), _inv(g)), _inv(x))


def _cyclic(u: tuple) -> tuple:
    """Split reduced u as conj * core * conj^-1 with core cyclically reduced."""
    i, j = 0, len(u) - 1
    while i < j and u[i] == -u[j]:
        i += 1
        j -= 1
    return u[i: j + 1], u[:i]


def _rotations(core: tuple) -> list:
    return [core[i:] + core[:i] for i in range(len(core))] or [()]


def _cyclic_key(u: tuple) -> tuple:
    """Canonical representative of the conjugacy class of u."""
    core, _ = _cyclic(u)
    if not core:
        return ()
    return min(core[i:] + core[:i] for i in range(len(core)))


def _letter_key(x: int) -> tuple:
    return (abs(x), x < 0)


def _letter_key_seq(u: Sequence[int]) -> tuple:
    return tuple(_letter_key(x) for x in u)


@dataclass(frozen=True)
class Alphabet:
    rank: int

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise ValueError(f"rank must be a positive integer, got {self.rank!r}")

    def letters(self) -> list:
        return [s * i for i in range(1, self.rank + 1) for s in (1, -1)]

    def check(self, letters: Iterable[int]) -> None:
        for x in letters:
            if not isinstance(x, int) or x == 0 or abs(x) > self.rank:
                raise ValueError(f"letter {x!r} outside alphabet of rank {self.rank}")

    def word(self, letters: Iterable[int] = ()) -> "Word":
        return reduce(self, letters)

    @property
    def identity(self) -> "Word":
        return Word((), self.rank)

    def gen(self, i: int) -> "Word":
        return reduce(self, [i])

    def parse(self, text: str) -> "Word":
        return parse_word(self, text)


@dataclass(frozen=True, order=False)
class Word:
    """A freely reduced word. Construct through :func:`reduce` or ``Alphabet.word``."""

    letters: tuple
    rank: int

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)[0]

    def __pow__(self, n: int) -> "Word":
        return power(self, n)

    def __invert__(self) -> "Word":
        return inverse(self)

    def inv(self) -> "Word":
        return inverse(self)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.rank)

    def sort_key(self) -> tuple:
        return (len(self.letters), _letter_key_seq(self.letters))

    def __lt__(self, other: "Word") -> bool:
        return self.sort_key() < other.sort_key()

    def exponent_sums(self) -> list:
        sums = [0] * self.rank
        for x in self.letters:
            sums[abs(x) - 1] += 1 if x > 0 else -1
        return sums

    def __str__(self):
        return format_word(self)

    def __repr__(self):
        return f"Word({format_word(self)!r})"


def _wrap(letters: tuple, rank: int) -> Word:
    return Word(letters, rank)


def reduce(alphabet: Alphabet, raw: Iterable[int]) -> Word:
    raw = tuple(raw)
    alphabet.check(raw)
    return Word(_reduce(raw), alphabet.rank)


def _same(g: Word, h: Word) -> None:
    if g.rank != h.rank:
        raise ValueError(f"alphabet mismatch: rank {g.rank} vs rank {h.rank}")


def multiply(g: Word, h: Word) -> tuple:
    """Return (g*h, cancellation length)."""
    _same(g, h)
    k = _cancel_len(g.letters, h.letters)
    return Word(g.letters[: len(g) - k] + h.letters[k:], g.rank), k


def inverse(g: Word) -> Word:
    return Word(_inv(g.letters), g.rank)


def commutator(g: Word, x: Word) -> Word:
    _same(g, x)
    return Word(_comm(g.letters, x.letters), g.rank)


def power(g: Word, n: int) -> Word:
    return Word(_pow(g.letters, n), g.rank)


def cyclic_reduce(g: Word) -> tuple:
    core, conj = _cyclic(g.letters)
    return Word(core, g.rank), Word(conj, g.rank)


def words_up_to(rank: int, maxlen: int, minlen: int = 0) -> list:
    """All reduced letter tuples of length in [minlen, maxlen], shortlex order."""
    letters = [s * i for i in range(1, rank + 1) for s in (1, -1)]
    level = [()]
    out = [()] if minlen == 0 else []
    for n in range(1, maxlen + 1):
        level = [w + (x,) for w in level for x in letters if not w or w[-1] != -x]
        if n >= minlen:
            out.extend(level)
    return out


# ---- text syntax ----------------------------------------------------------

_TOKEN = re.compile(r"\s*(x\d+|[A-Za-z]|\^-?\d+|[\[\](),]|1)")


class _Parser:
    def __init__(self, alphabet: Alphabet, text: str):
        self.alphabet = alphabet
        self.text = text
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise ValueError(f"cannot parse word {self.text!r} at column {pos + 1}")
            self.toks.append((m.group(1), m.start(1)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            col = self.toks[self.i][1] + 1 if self.i < len(self.toks) else len(self.text) + 1
            want = expected if expected is not None else "a token"
            raise ValueError(f"expected {want} in {self.text!r} at column {col}")
        self.i += 1
        return tok

    def expr(self) -> tuple:
        out: tuple = ()
        while self.peek() not in (None, ")", "]", ","):
            out = _mul(out, self.term())
        return out

    def term(self) -> tuple:
        base = self.atom()
        while self.peek() is not None and self.peek().startswith("^"):
            base = _pow(base, int(self.take()[1:]))
        return base

    def atom(self) -> tuple:
        col = self.toks[self.i][1] + 1 if self.i < len(self.toks) else len(self.text) + 1
        tok = self.take()
        try:
            return self._atom(tok)
        except ValueError as exc:
            if "column" in str(exc):
                raise
            raise ValueError(f"{exc} in {self.text!r} at column {col}") from None

    def _atom(self, tok: str) -> tuple:
        if tok == "(":
            inner = self.expr()
            self.take(")")
            return inner
        if tok == "[":
            u = self.expr()
            self.take(",")
            v = self.expr()
            self.take("]")
            return _comm(u, v)
        if tok == "1":
            return ()
        if tok.startswith("x") and len(tok) > 1:
            idx = int(tok[1:])
            self.alphabet.check([idx])
            return (idx,)
        if tok == "e" and self.alphabet.rank < 5:
            return ()
        if len(tok) == 1 and tok.isalpha():
            idx = ord(tok.lower()) - ord("a") + 1
            self.alphabet.check([idx])
            return (idx,) if tok.islower() else (-idx,)
        raise ValueError(f"unexpected {tok!r}")


def parse_word(alphabet: Alphabet, text: str) -> Word:
    """Parse the text syntax: ``a``..``z`` (upper case = inverse), ``x3``,
    ``^n`` exponents, parentheses, ``[u,v]`` commutators, and ``e``/``1``
    for the identity (``e`` is a generator once rank >= 5)."""
    p = _Parser(alphabet, text)
    out = p.expr()
    if p.peek() is not None:
        p.take("end of word")
    return Word(out, alphabet.rank)


def format_word(g: Word) -> str:
    if not g.letters:
        return "e" if g.rank < 5 else "1"
    if g.rank <= 26:
        return "".join(chr(ord("a") + abs(x) - 1) if x > 0 else chr(ord("A") + abs(x) - 1)
                       for x in g.letters)
    return " ".join(f"x{x}" if x > 0 else f"x{-x}^-1" for x in g.letters)
