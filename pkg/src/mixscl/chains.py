"""Rational 1-chains and 2-chains over a free group, the boundary map and
the explicit prime 2-chains that witness membership in the boundary space."""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Optional

from .words import Alphabet, Word, _inv, _mul

__all__ = [
    "Chain1",
    "Chain2",
    "boundary",
    "l1_norm",
    "is_prime_support",
    "chain_power",
    "normalize_signs",
    "witness_chain2",
    "split_product_witness",
    "chain_witness",
    "parse_chain",
    "chain_to_json",
]


def _frac(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, float):
        raise TypeError("chain coefficients must be exact rationals, not floats")
    return Fraction(q)


def _signed(q) -> str:
    return f"+{q}" if q >= 0 else str(q)


class _Chain:
    __slots__ = ("_d", "rank")

    def __init__(self, terms=(), rank: Optional[int] = None):
        d: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for k, q in items:
            q = _frac(q)
            if q:
                d[k] = d.get(k, 0) + q
                if not d[k]:
                    del d[k]
        self._d = d
        self.rank = rank if rank is not None else self._infer_rank()

    def _infer_rank(self):
        return None

    def __getitem__(self, k):
        return self._d.get(k, Fraction(0))

    def __contains__(self, k):
        return k in self._d

    def __len__(self):
        return len(self._d)

    def __bool__(self):
        return bool(self._d)

    def __iter__(self):
        return iter(self.keys())

    def items(self):
        return [(k, self._d[k]) for k in self.keys()]

    def coefficients(self):
        return [q for _, q in self.items()]

    def __eq__(self, other):
        return type(self) is type(other) and self._d == other._d

    def __hash__(self):
        return hash(frozenset(self._d.items()))

    def _combine(self, other, sign):
        if type(other) is not type(self):
            return NotImplemented
        d = dict(self._d)
        for k, q in other._d.items():
            d[k] = d.get(k, 0) + sign * q
        return type(self)(d, self.rank if self.rank is not None else other.rank)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return type(self)({k: -q for k, q in self._d.items()}, self.rank)

    def __rmul__(self, s):
        s = _frac(s)
        return type(self)({k: s * q for k, q in self._d.items()}, self.rank)

    __mul__ = __rmul__

    def is_integral(self) -> bool:
        return all(q.denominator == 1 for q in self._d.values())

    def l1(self) -> Fraction:
        return sum((abs(q) for q in self._d.values()), Fraction(0))


class Chain1(_Chain):
    """Finite rational combination of reduced words."""

    __slots__ = ()

    def _infer_rank(self):
        return next((w.rank for w in self._d), None)

    @classmethod
    def of(cls, *words: Word, coeff=1):
        return cls([(w, coeff) for w in words])

    def keys(self):
        return sorted(self._d, key=Word.sort_key)

    def support(self):
        return self.keys()

    def __repr__(self):
        return "Chain1(" + " ".join(f"{_signed(q)}*{w}" for w, q in self.items()) + ")"

    def __str__(self):
        if not self._d:
            return "0"
        out = []
        for i, (w, q) in enumerate(self.items()):
            sign = "-" if q < 0 else "+"
            a = abs(q)
            body = str(w) if a == 1 else f"{a} {w}" if a.denominator == 1 else f"({a}) {w}"
            out.append(("-" + body) if i == 0 and sign == "-" else body if i == 0 else f"{sign} {body}")
        return " ".join(out)


class Chain2(_Chain):
    """Finite rational combination of ordered pairs (g1, g2)."""

    __slots__ = ()

    def _infer_rank(self):
        return next((p[0].rank for p in self._d), None)

    def keys(self):
        return sorted(self._d, key=lambda p: (p[0].sort_key(), p[1].sort_key()))

    def __repr__(self):
        return "Chain2(" + " ".join(f"{_signed(q)}*({a},{b})" for (a, b), q in self.items()) + ")"


def pair_boundary(g1: Word, g2: Word) -> list:
    return [(g2, 1), (g1 * g2, -1), (g1, 1)]


def boundary(c2: Chain2) -> Chain1:
    terms = []
    for (g1, g2), q in c2.items():
        for w, s in pair_boundary(g1, g2):
            terms.append((w, s * q))
    return Chain1(terms, c2.rank)


def l1_norm(c) -> Fraction:
    return c.l1()


def is_prime_support(pair, c2: Chain2) -> bool:
    if pair is None or pair.is_plain:
        return True
    return all(pair.in_N_letters(g1.letters) or pair.in_N_letters(g2.letters) for g1, g2 in c2.keys())


def normalize_signs(c: Chain1) -> list:
    """Integral chain -> list of words with multiplicity; -x becomes +x^-1."""
    if not c.is_integral():
        raise ValueError("chain must have integer coefficients")
    out = []
    for w, q in c.items():
        n = int(q)
        out.extend([w if n > 0 else ~w] * abs(n))
    return out


def chain_power(c: Chain1, n: int) -> Chain1:
    """Replace each support element x by x^n, keeping coefficients."""
    if not c.is_integral():
        raise ValueError("chain_power needs an integral chain")
    if n < 1:
        raise ValueError("power must be positive")
    return Chain1([(w ** n, q) for w, q in c.items()], c.rank)


def _check_N(pair, x: Word, what: str):
    if pair is not None and not pair.in_N_letters(x.letters):
        raise ValueError(f"{what} {x} is not in N")


def _conj(h: Word, w: Word) -> Word:
    return Word(_mul(_mul(h.letters, w.letters), _inv(h.letters)), w.rank)


def _comm_witness(g: Word, x: Word) -> list:
    # d([g,x], xg) - d(g,x) + d(x,g) = [g,x]
    return [((g * x * ~g * ~x, x * g), 1), ((g, x), -1), ((x, g), 1)]


def witness_chain2(pair, decomposition, rank: Optional[int] = None) -> tuple:
    """Prime 2-chain w with boundary(w) = y = prod [g_i, x_i] (as one-term chain).

    ``decomposition`` is a list of (g_i, x_i) with x_i in N. Conjugated
    commutators can be passed already conjugated: h[g,x]h^-1 = [hgh^-1, hxh^-1].
    Returns (w, y). The l1 norm is at most 4k - 1.
    """
    dec = list(decomposition)
    if rank is None:
        rank = pair.alphabet.rank if pair is not None else (dec[0][0].rank if dec else 1)
    terms = []
    y = Word((), rank)
    for i, (g, x) in enumerate(dec):
        _check_N(pair, x, "commutator entry")
        c = g * x * ~g * ~x
        terms.extend(_comm_witness(g, x))
        if i > 0:
            # y*c = y + c - d(y, c)
            terms.append(((y, c), -1))
        y = y * c
    return Chain2(terms, rank), y


def split_product_witness(pair, x_list, conjugators=None, rank: Optional[int] = None) -> tuple:
    """Prime 2-chain with boundary sum(x_i) - (prod h_i x_i h_i^-1).

    Returns (w, product)."""
    xs = list(x_list)
    if rank is None:
        rank = pair.alphabet.rank if pair is not None else (xs[0].rank if xs else 1)
    hs = list(conjugators) if conjugators is not None else [Word((), rank)] * len(xs)
    if len(hs) != len(xs):
        raise ValueError("need one conjugator per term")
    terms = []
    prod = Word((), rank)
    for i, (x, h) in enumerate(zip(xs, hs)):
        _check_N(pair, x, "term")
        z = _conj(h, x) if h else x
        if h:
            # d(h,x) - d(hxh^-1, h) = x - hxh^-1
            terms.append(((h, x), 1))
            terms.append(((z, h), -1))
        if i > 0:
            terms.append(((prod, z), 1))
        prod = prod * z
    return Chain2(terms, rank), prod


def chain_witness(pair, c: Chain1, found) -> Chain2:
    """Prime 2-chain with boundary exactly c, from a conjugated-product
    decomposition found by the commutator search."""
    terms = normalize_signs(c)
    rank = c.rank
    split, y = split_product_witness(pair, terms, found.conjugators, rank)
    if y != found.target:
        raise ValueError("decomposition target does not match the chain product")
    comm, y2 = witness_chain2(pair, found.pairs, rank)
    assert y2 == y
    w = split + comm
    one = Word((), rank)
    if not y.letters and not found.pairs:
        # the split leaves -1 behind; d(1, 1) = 1
        w = w + Chain2([((one, one), 1)], rank)
    for x, q in c.items():
        if q < 0:
            # -x = x^-1 - d(x, x^-1) - d(1, 1)
            n = -q
            w = w + Chain2([((x, ~x), -n), ((one, one), -n)], rank)
    return w


def parse_chain(alphabet: Alphabet, data) -> Chain1:
    """Chain file payload: list of [coeff, "word"] with coeff like "p/q"."""
    if not isinstance(data, list):
        raise ValueError("chain must be a list of [coeff, word] entries")
    terms = []
    for i, entry in enumerate(data):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ValueError(f"chain entry {i} must be [coeff, word]")
        q, text = entry
        if isinstance(q, float):
            raise ValueError(f"chain entry {i}: coefficient must be an integer or 'p/q' string")
        try:
            q = Fraction(q)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"chain entry {i}: bad coefficient {entry[0]!r}") from exc
        terms.append((alphabet.parse(text), q))
    return Chain1(terms, alphabet.rank)


def chain_to_json(c: Chain1) -> list:
    return [[str(q), str(w)] for w, q in c.items()]
