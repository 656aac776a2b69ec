"""Products of commutators: the explicit n-commutator identity for
(g1 g2)^-2n g1^2n g2^2n and a bounded search for short commutator
decompositions of words and chains."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

from .words import (Word, _comm, _cyclic, _cyclic_key, _inv, _mul, _pow,
                    words_up_to)

__all__ = ["Decomposition", "Budget", "lemma26_decompose", "cl_upper_search",
           "cl_chain_upper", "parse_budget"]


@dataclass
class Decomposition:
    """target = prod [g_i, x_i]; for chains, target is the product of the
    terms conjugated by ``conjugators`` (first one trivial)."""

    pairs: list
    target: Word
    conjugators: Optional[list] = None
    terms: Optional[list] = None

    @property
    def k(self) -> int:
        return len(self.pairs)

    def product(self) -> Word:
        out: tuple = ()
        for g, x in self.pairs:
            out = _mul(out, _comm(g.letters, x.letters))
        return Word(out, self.target.rank)

    def verify(self, pair=None) -> bool:
        if self.product() != self.target:
            return False
        if pair is not None and not pair.is_plain:
            if not all(pair.in_N_letters(x.letters) for _, x in self.pairs):
                return False
        if self.terms is not None:
            out: tuple = ()
            for h, t in zip(self.conjugators, self.terms):
                out = _mul(out, _mul(_mul(h.letters, t.letters), _inv(h.letters)))
            if out != self.target.letters:
                return False
        return True

    def to_json(self) -> dict:
        out = {"k": self.k, "target": str(self.target),
               "commutators": [[str(g), str(x)] for g, x in self.pairs]}
        if self.conjugators is not None:
            out["conjugators"] = [str(h) for h in self.conjugators]
            out["terms"] = [str(t) for t in self.terms]
        return out


def _conj_pair(h: tuple, g: tuple, x: tuple) -> tuple:
    hi = _inv(h)
    return _mul(_mul(h, g), hi), _mul(_mul(h, x), hi)


def lemma26_decompose(g1: Word, g2: Word, n: int) -> Decomposition:
    """n commutators with product (g1 g2)^-2n g1^2n g2^2n.

    Recursion: the n+1 case is the n case with g1, g2 swapped, followed by
    [g1^-2n g2^-2n g1^-1, g2^-1 g1^2n], all conjugated by g2^-1.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rank = g1.rank

    def rec(a: tuple, b: tuple, k: int) -> list:
        if k == 0:
            return []
        m = k - 1
        inner = rec(b, a, m)
        x = _mul(_mul(_pow(a, -2 * m), _pow(b, -2 * m)), _inv(a))
        y = _mul(_inv(b), _pow(a, 2 * m))
        inner = inner + [(x, y)]
        bi = _inv(b)
        return [_conj_pair(bi, g, h) for g, h in inner]

    pairs = rec(g1.letters, g2.letters, n)
    target = _mul(_mul(_pow(_mul(g1.letters, g2.letters), -2 * n), _pow(g1.letters, 2 * n)),
                  _pow(g2.letters, 2 * n))
    dec = Decomposition([(Word(g, rank), Word(x, rank)) for g, x in pairs], Word(target, rank))
    assert dec.verify(), "commutator identity failed"
    return dec


@dataclass(frozen=True)
class Budget:
    k: int = 2                 # largest number of commutators tried
    length: int = 4            # longest entry word g_i, x_i
    conj_length: int = 2       # longest chain conjugator


def parse_budget(text: str) -> Budget:
    parts = [int(p) for p in str(text).split(":")]
    if not 1 <= len(parts) <= 3 or any(p < 0 for p in parts):
        raise ValueError(f"budget must look like K:L[:C], got {text!r}")
    if len(parts) == 1:
        return Budget(parts[0])
    if len(parts) == 2:
        return Budget(parts[0], parts[1])
    return Budget(*parts)


class _Table:
    """Commutators [g, x] with |g|, |x| <= L (x in N for proper pairs),
    indexed by conjugacy class of the reduced commutator word."""

    _cache: dict = {}

    def __init__(self, pair, L: int):
        rank = pair.alphabet.rank
        plain = pair.is_plain
        ws = words_up_to(rank, L)
        inN = [plain or pair.in_N_letters(w) for w in ws]
        self.entries = []
        self.classes: dict = {}
        seen = set()
        for i, g in enumerate(ws):
            for j, x in enumerate(ws):
                if not (inN[j] or inN[i]):
                    continue
                if inN[j]:
                    gg, xx = g, x
                else:
                    # [g,x] = [g x g^-1, g^-1] with g in N
                    gg, xx = _mul(_mul(g, x), _inv(g)), _inv(g)
                c = _comm(gg, xx)
                if not c or c in seen:
                    continue
                seen.add(c)
                self.entries.append((c, gg, xx))
                key = _cyclic_key(c)
                if key not in self.classes:
                    self.classes[key] = (c, gg, xx)
        self.maxcore = max((len(k) for k in self.classes), default=0)

    @classmethod
    def get(cls, pair, L):
        key = (id(pair), L)
        tab = cls._cache.get(key)
        if tab is None or tab[0] is not pair:
            tab = (pair, cls(pair, L))
            cls._cache[key] = tab
        return tab[1]


def _conjugator_to(src: tuple, dst: tuple) -> Optional[tuple]:
    """h with h src h^-1 = dst, when src and dst are conjugate."""
    cs, hs = _cyclic(src)
    cd, hd = _cyclic(dst)
    if len(cs) != len(cd):
        return None
    n = len(cs)
    for r in range(n or 1):
        if cs[r:] + cs[:r] == cd:
            return _mul(_mul(hd, _inv(cs[:r])), _inv(hs))
    return None


def _one(tab: _Table, t: tuple) -> Optional[list]:
    if not t:
        return []
    hit = tab.classes.get(_cyclic_key(t))
    if hit is None:
        return None
    c, g, x = hit
    h = _conjugator_to(c, t)
    return [_conj_pair(h, g, x)]


def _search(peel: _Table, tab: _Table, t: tuple, k: int) -> Optional[list]:
    """Write t as a product of k commutators: peel one short commutator off
    a cyclic rotation of t and recurse; the last one is a class lookup."""
    if k == 0:
        return [] if not t else None
    if k == 1:
        return _one(tab, t)
    core, conj = _cyclic(t)
    if not core:
        return []
    n = len(core)
    for r in range(n):
        rot = core[r:] + core[:r]
        for c, g, x in peel.entries:
            rest = _mul(_inv(c), rot)
            if k == 2 and len(rest) > 2 * tab.maxcore + len(rot):
                continue
            sub = _search(peel, tab, rest, k - 1)
            if sub is not None:
                h = _mul(conj, core[:r])  # t = h rot h^-1
                return [_conj_pair(h, a, b) for a, b in [(g, x)] + sub]
    return None


def _peel_len(budget: "Budget", k: int) -> int:
    return min(budget.length, 3 if k <= 2 else 2)


def _cl_exact_k(pair, y: Word, k: int, budget: "Budget") -> Optional[Decomposition]:
    if k == 0:
        return Decomposition([], y) if not y.letters else None
    rank = y.rank
    tab = _Table.get(pair, budget.length)
    peel = _Table.get(pair, _peel_len(budget, k))
    found = _search(peel, tab, y.letters, k)
    if found is None:
        return None
    dec = Decomposition([(Word(g, rank), Word(x, rank)) for g, x in found], y)
    if not dec.verify(pair):
        raise RuntimeError("search produced an invalid decomposition")
    return dec


def cl_upper_search(pair, y: Word, budget: Budget = Budget()) -> Optional[Decomposition]:
    """Iterative deepening over k = 0, 1, ..., budget.k; the first hit is a
    verified upper bound for (mixed) commutator length. None means unknown."""
    if not pair.is_plain and not pair.in_N_letters(y.letters):
        raise ValueError(f"{y} is not in N")
    if any(y.exponent_sums()):
        return None
    for k in range(0, budget.k + 1):
        dec = _cl_exact_k(pair, y, k, budget)
        if dec is not None:
            return dec
    return None


def cl_chain_upper(pair, c, budget: Budget = Budget()) -> Optional[Decomposition]:
    """Search conjugators h_i (|h_i| <= budget.conj_length) and a
    decomposition of x_1 (h_2 x_2 h_2^-1) ... ; negative terms enter as
    inverses. Returns the decomposition with the smallest k found."""
    from .chains import normalize_signs
    terms = normalize_signs(c)
    rank = c.rank
    if not terms:
        return Decomposition([], Word((), rank), [], [])
    for t in terms:
        if not pair.is_plain and not pair.in_N_letters(t.letters):
            raise ValueError(f"{t} is not in N")
    tot = [0] * rank
    for t in terms:
        for i, v in enumerate(t.exponent_sums()):
            tot[i] += v
    if any(tot):
        return None
    hs = words_up_to(rank, budget.conj_length)
    best = None
    for k in range(0, budget.k + 1):
        seen = set()
        for combo in product(hs, repeat=len(terms) - 1):
            prod_ = terms[0].letters
            for h, t in zip(combo, terms[1:]):
                prod_ = _mul(prod_, _mul(_mul(h, t.letters), _inv(h)))
            key = _cyclic_key(prod_)
            if key in seen:
                continue
            seen.add(key)
            target = Word(prod_, rank)
            found = _cl_exact_k(pair, target, k, budget)
            if found is not None:
                conj = [Word((), rank)] + [Word(h, rank) for h in combo]
                dec = Decomposition(found.pairs, target, conj, list(terms))
                if not dec.verify(pair):
                    raise RuntimeError("chain search produced an invalid decomposition")
                return dec
    return best
