"""Counting quasimorphisms, their homogenizations and certified defects,
plus the operators that move quasimorphisms between N and G."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Optional

import numpy as np

from .words import Alphabet, Word, _cyclic, _inv, _mul, _reduce, words_up_to
from .circle import CircleLift, translation_number  # noqa: F401  (re-exported)

__all__ = [
    "count_subword",
    "CircleLift",
    "translation_number",
    "CountingQm",
    "eval_raw",
    "homogenize_counting",
    "defect_counting",
    "defect_bruteforce",
    "QmCertificate",
    "make_certificate",
    "evaluate_on_chain",
    "restrict_to_N",
    "counting_on_N",
    "invariant_average",
    "NQmExtension",
    "extend_N_quasimorphism",
    "VirtualExtension",
    "extend_virtual_section",
    "quasi_invariance_sample",
    "auto_certificates",
]


def count_subword(w, g) -> int:
    """Number of positions where w occurs as a contiguous subword of g."""
    w = tuple(w)
    g = tuple(g)
    n, m = len(g), len(w)
    if m == 0:
        raise ValueError("pattern must be nonempty")
    return sum(1 for i in range(n - m + 1) if g[i:i + m] == w)


class CountingQm:
    """phi = sum_w c_w (C_w - C_{w^-1}), a rational combination of
    antisymmetrized counting functions on F(rank)."""

    def __init__(self, terms, rank: int, name: Optional[str] = None):
        if isinstance(terms, (Word, tuple)) and terms and isinstance(next(iter(terms)), int):
            terms = {tuple(terms): 1}
        elif isinstance(terms, Word):
            terms = {terms.letters: 1}
        coeffs: dict = {}
        for w, q in (terms.items() if isinstance(terms, Mapping) else terms):
            w = w.letters if isinstance(w, Word) else tuple(w)
            if not w or _reduce(w) != w:
                raise ValueError(f"counting word must be reduced and nonempty, got {w}")
            Alphabet(rank).check(w)
            # fold w^-1 onto w so each pattern pair is stored once
            wi = _inv(w)
            q = Fraction(q)
            if wi in coeffs:
                coeffs[wi] -= q
            else:
                coeffs[w] = coeffs.get(w, 0) + q
        self.terms = {w: q for w, q in coeffs.items() if q}
        self.rank = rank
        pat: dict = {}
        for w, q in self.terms.items():
            pat[w] = pat.get(w, 0) + q
            wi = _inv(w)
            pat[wi] = pat.get(wi, 0) - q
        self.patterns = {p: q for p, q in pat.items() if q}
        self.lengths = sorted({len(p) for p in self.patterns})
        self.maxlen = max(self.lengths) if self.lengths else 0
        self.name = name or " + ".join(f"{q}*{Word(w, rank)}" for w, q in self.terms.items())

    @classmethod
    def single(cls, w, rank=None):
        if isinstance(w, Word):
            rank = w.rank
            w = w.letters
        return cls({tuple(w): 1}, rank, name=f"phi_{Word(tuple(w), rank)}")

    def raw(self, g: tuple) -> Fraction:
        total = Fraction(0)
        pats = self.patterns
        n = len(g)
        for L in self.lengths:
            for i in range(n - L + 1):
                q = pats.get(g[i:i + L])
                if q:
                    total += q
        return total

    def cyclic(self, core: tuple) -> Fraction:
        n = len(core)
        if n == 0:
            return Fraction(0)
        total = Fraction(0)
        pats = self.patterns
        for L in self.lengths:
            reps = -(-L // n) + 1
            ext = core * reps
            for i in range(n):
                q = pats.get(ext[i:i + L])
                if q:
                    total += q
        return total

    def homogeneous(self, g: tuple) -> Fraction:
        core, _ = _cyclic(tuple(g))
        return self.cyclic(core)

    def __repr__(self):
        return f"CountingQm({self.name})"


def eval_raw(q: CountingQm, g: Word) -> Fraction:
    return q.raw(g.letters)


def homogenize_counting(q: CountingQm, g: Word) -> Fraction:
    return q.homogeneous(g.letters)


def homogenize_by_periods(q: CountingQm, g: Word, K: Optional[int] = None) -> Fraction:
    """The stabilized per-period difference raw(core^(K+1)) - raw(core^K)."""
    core, _ = _cyclic(g.letters)
    if not core:
        return Fraction(0)
    K = K if K is not None else q.maxlen + 1
    return q.raw(core * (K + 1)) - q.raw(core * K)


# ---- exact defect via junction windows ------------------------------------

def _scaled_patterns(q: CountingQm):
    den = 1
    for v in q.patterns.values():
        den = den * v.denominator // math.gcd(den, v.denominator)
    return {p: int(v * den) for p, v in q.patterns.items()}, den


def _int_count(pats: dict, lengths, g: tuple) -> int:
    total = 0
    n = len(g)
    for L in lengths:
        for i in range(n - L + 1):
            total += pats.get(g[i:i + L], 0)
    return total


def defect_counting(q: CountingQm, window: Optional[int] = None) -> tuple:
    """Exact sup |phi(g1 g2) - phi(g1) - phi(g2)| for the raw combination.

    Writing g1 = u c and g2 = c^-1 v with u v reduced, the defect equals
    J(u|v) - J(u|c) - J(c^-1|v) where J counts occurrences straddling a
    junction. J only sees L-1 letters on either side (L the longest
    pattern), so u, v range over words of length <= L-1 and c over words of
    length <= 2L-1. Returns (value, "exact").
    """
    if not q.patterns:
        return Fraction(0), "exact"
    L = q.maxlen
    r = (L - 1) if window is None else window
    pats, den = _scaled_patterns(q)
    lengths = q.lengths
    side = words_up_to(q.rank, r)
    mids = words_up_to(q.rank, max(2 * r + 1, r))
    cnt = {}

    def C(g):
        v = cnt.get(g)
        if v is None:
            v = cnt[g] = _int_count(pats, lengths, g)
        return v

    def J(x, y):
        return C(x + y) - C(x) - C(y)

    last = np.array([u[-1] if u else 0 for u in side])
    first = np.array([v[0] if v else 0 for v in side])
    juv = np.array([[J(u, v) for v in side] for u in side], dtype=np.int64)
    ok_uv = ~((last[:, None] != 0) & (last[:, None] == -first[None, :]))
    best = 0
    for c in mids:
        ci = _inv(c)
        a = np.array([J(u, c) for u in side], dtype=np.int64)
        b = np.array([J(ci, v) for v in side], dtype=np.int64)
        if c:
            ok_u = ~(last == -c[0])
            ok_v = ~(first == c[0])
            mask = ok_uv & ok_u[:, None] & ok_v[None, :]
        else:
            mask = ok_uv
        d = juv - a[:, None] - b[None, :]
        vals = np.abs(d[mask])
        if vals.size:
            best = max(best, int(vals.max()))
    return Fraction(best, den), "exact"


def defect_bruteforce(q: CountingQm, total_len: int) -> Fraction:
    """sup of |delta| over reduced g1, g2 with |g1| + |g2| <= total_len."""
    words = words_up_to(q.rank, total_len)
    val = {w: q.raw(w) for w in words}
    best = Fraction(0)
    for g1 in words:
        for g2 in words:
            if len(g1) + len(g2) > total_len:
                break
            d = abs(val[_mul(g1, g2)] - val[g1] - val[g2])
            if d > best:
                best = d
    return best


# ---- certificates ---------------------------------------------------------

@dataclass
class QmCertificate:
    """A homogeneous quasimorphism with a certified defect upper bound.

    ``evaluate`` takes a reduced letter tuple in G. ``domain`` is "G" or "N";
    N-certificates raise on words outside N.
    """

    evaluate: Callable[[tuple], Fraction]
    defect_upper: Fraction
    defect_kind: str
    invariance: str = "plain"
    domain: str = "G"
    name: str = ""
    notes: list = field(default_factory=list)
    pair: object = None
    base: object = None
    raw_defect: Optional[Fraction] = None

    def __call__(self, g) -> Fraction:
        letters = g.letters if isinstance(g, Word) else tuple(g)
        if self.domain == "N" and self.pair is not None and not self.pair.in_N_letters(letters):
            raise ValueError(f"{self.name}: word outside N")
        return self.evaluate(letters)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "defect_upper": str(self.defect_upper),
            "defect_kind": self.defect_kind,
            "invariance": self.invariance,
            "domain": self.domain,
            "notes": list(self.notes),
        }


def make_certificate(q: CountingQm, dprime: Optional[Fraction] = None) -> QmCertificate:
    d, kind = defect_counting(q)
    bound = 2 * d
    how = "2*D(raw) for an antisymmetric raw function"
    if dprime is not None and d + Fraction(dprime) / 2 < bound:
        bound = d + Fraction(dprime) / 2
        how = "D(raw) + D'/2"
    return QmCertificate(
        evaluate=q.homogeneous,
        defect_upper=bound,
        defect_kind="certified-bound",
        name=q.name,
        notes=[f"raw defect {d} ({kind})", how],
        base=q,
        raw_defect=d,
    )


def evaluate_on_chain(cert: QmCertificate, c) -> Fraction:
    return sum((q * cert(w) for w, q in c.items()), Fraction(0))


def restrict_to_N(pair, cert: QmCertificate) -> QmCertificate:
    """A homogeneous qm of G restricted to N; G-invariant automatically."""
    return QmCertificate(
        evaluate=cert.evaluate,
        defect_upper=cert.defect_upper,
        defect_kind=cert.defect_kind,
        invariance="G-invariant-on-N",
        domain="N",
        name=f"{cert.name}|N",
        notes=cert.notes + ["restriction of a homogeneous qm on G"],
        pair=pair,
        base=cert,
        raw_defect=cert.raw_defect,
    )


def counting_on_N(pair, terms) -> QmCertificate:
    """Homogenized counting combination in the free basis of N given by
    Reidemeister-Schreier generators (finite quotients). Not G-invariant in
    general; feed it to :func:`invariant_average`."""
    sch = pair.schreier
    q = CountingQm(terms, sch.rank)
    inner = make_certificate(q)

    def ev(letters):
        return q.homogeneous(sch.rewrite(letters))

    return QmCertificate(
        evaluate=ev,
        defect_upper=inner.defect_upper,
        defect_kind=inner.defect_kind,
        invariance="plain",
        domain="N",
        name=f"N:{q.name}",
        notes=inner.notes + ["counted in Schreier generators of N"],
        pair=pair,
        base=q,
        raw_defect=inner.raw_defect,
    )


def invariant_average(pair, cert: QmCertificate) -> QmCertificate:
    """mu'(x) = mean over coset reps b of mu(b x b^-1)."""
    if not pair.quotient.is_finite:
        raise ValueError("invariant_average needs a finite quotient")
    reps = [b.letters for b in pair.coset_reps()]
    reps_inv = [_inv(b) for b in reps]
    n = len(reps)
    ev = cert.evaluate

    def avg(letters):
        return sum((ev(_mul(_mul(b, letters), bi)) for b, bi in zip(reps, reps_inv)), Fraction(0)) / n

    return QmCertificate(
        evaluate=avg,
        defect_upper=cert.defect_upper,
        defect_kind=cert.defect_kind,
        invariance="G-invariant-on-N",
        domain="N",
        name=f"avg({cert.name})",
        notes=cert.notes + [f"averaged over {n} coset representatives"],
        pair=pair,
        base=cert,
        raw_defect=cert.raw_defect,
    )


def quasi_invariance_sample(pair, q: CountingQm, samples: int = 1000, maxlen: int = 6, seed: int = 0) -> Fraction:
    """Sampled lower bound for D'(phi): max |phi(g x g^-1) - phi(x)|, x in N."""
    rng = random.Random(seed)
    best = Fraction(0)
    for _ in range(samples):
        g = _random_word(rng, pair.alphabet.rank, maxlen)
        x = _random_N_word(rng, pair, maxlen)
        d = abs(q.raw(_mul(_mul(g, x), _inv(g))) - q.raw(x))
        best = max(best, d)
    return best


def _random_word(rng, rank: int, maxlen: int) -> tuple:
    n = rng.randint(0, maxlen)
    out: list = []
    while len(out) < n:
        x = rng.choice([i for i in range(-rank, rank + 1) if i])
        if out and out[-1] == -x:
            continue
        out.append(x)
    return tuple(out)


def _random_N_word(rng, pair, maxlen: int) -> tuple:
    while True:
        g = _random_word(rng, pair.alphabet.rank, maxlen)
        if pair.in_N_letters(g):
            return g
        s = pair.set_section(pair.image_letters(g)) if pair.quotient.is_finite else None
        if s is not None:
            x = _mul(_inv(s), g)
            if pair.in_N_letters(x):
                return x


# ---- extensions from N to G -----------------------------------------------

@dataclass
class NQmExtension:
    """psi(g) = phi(s) + mu(s^-1 g) with s the section value at p(g)."""

    pair: object
    mu: QmCertificate
    tail: dict
    defect2: Fraction

    def __call__(self, g) -> Fraction:
        letters = g.letters if isinstance(g, Word) else tuple(g)
        gamma = self.pair.image_letters(letters)
        s = self.pair.set_section(gamma)
        x = _mul(_inv(s), letters)
        return Fraction(self.tail.get(gamma, 0)) + self.mu.evaluate(x)


def extend_N_quasimorphism(pair, mu: QmCertificate, tail=None) -> NQmExtension:
    if mu.domain == "N" and mu.invariance != "G-invariant-on-N" and not pair.is_plain:
        raise ValueError("extension needs a G-invariant homogeneous qm on N")
    tail = dict(tail or {})
    ident = pair.quotient.identity()
    if tail.get(ident, 0) != 0:
        raise ValueError("tail value at the identity coset must be 0")
    if not pair.quotient.is_finite:
        pair.set_section(ident)  # raises when no section is available
    return NQmExtension(pair, mu, tail, mu.defect_upper)


class VirtualExtension:
    """Homogeneous extension of mu in Q(N)^G to G through a virtual section.

    phi_hat(g) = mean_b mu(g t(b p(g))^-1 t(b)), phi its homogenization.
    When p(g) has finite order m the value is exactly mu(g^m)/m; otherwise
    :meth:`interval` gives the certified enclosure of width 2D/n.
    """

    def __init__(self, pair, mu: QmCertificate):
        self.pair = pair
        self.mu = mu
        sec = pair.section
        if pair.quotient.is_finite:
            self.B = [b.letters for b in pair.coset_reps()]
            self.t = lambda gamma: pair.set_section(gamma)
        else:
            if sec is None:
                raise ValueError("no virtual section configured for this pair")
            self.B = [b.letters for b in sec.B]
            self.t = sec.t

    def raw(self, letters: tuple) -> Fraction:
        q = self.pair.quotient
        pg = self.pair.image_letters(letters)
        total = Fraction(0)
        for b in self.B:
            pb = self.pair.image_letters(b)
            tb = self.t(pb)
            tbg = self.t(q.mul(pb, pg))
            total += self.mu.evaluate(_mul(_mul(letters, _inv(tbg)), tb))
        return total / len(self.B)

    def _order(self, letters):
        q = self.pair.quotient
        if not q.is_finite:
            return 1 if self.pair.in_N_letters(letters) else None
        g = self.pair.image_letters(letters)
        e, m = g, 1
        while e != 0:
            e = q.mul(e, g)
            m += 1
        return m

    def evaluate(self, letters: tuple) -> Fraction:
        m = self._order(letters)
        if m is None:
            raise ValueError("no closed form: image has infinite order, use interval()")
        gm = letters
        if m > 1:
            core, conj = _cyclic(letters)
            gm = _mul(_mul(conj, core * m), _inv(conj))
        return self.mu.evaluate(gm) / m

    def interval(self, letters: tuple, n: int = 64) -> tuple:
        m = self._order(letters)
        if m is not None:
            v = self.evaluate(letters)
            return v, v
        core, conj = _cyclic(letters)
        gn = _mul(_mul(conj, core * n), _inv(conj))
        mid = self.raw(gn) / n
        rad = self.mu.defect_upper / n
        return mid - rad, mid + rad


def extend_virtual_section(pair, mu: QmCertificate) -> QmCertificate:
    if mu.domain == "N" and mu.invariance != "G-invariant-on-N" and not pair.is_plain:
        raise ValueError("virtual-section extension needs mu in Q(N)^G")
    ext = VirtualExtension(pair, mu)
    return QmCertificate(
        evaluate=ext.evaluate,
        defect_upper=2 * mu.defect_upper,
        defect_kind="certified-bound",
        invariance="plain",
        domain="G",
        name=f"ext({mu.name})",
        notes=mu.notes + ["extended through a virtual section; defect <= 2 D_N(mu)"],
        pair=pair,
        base=ext,
    )


# ---- certificate families -------------------------------------------------

def _canonical_words(rank: int, maxlen: int) -> list:
    """Counting words up to inversion (phi_{w^-1} = -phi_w)."""
    seen = set()
    out = []
    for w in words_up_to(rank, maxlen, 1):
        if _inv(w) in seen:
            continue
        seen.add(w)
        out.append(w)
    return out


@lru_cache(maxsize=64)
def _auto_counting(rank: int, maxlen: int) -> tuple:
    certs = []
    done = set()
    for w in _canonical_words(rank, maxlen):
        q = CountingQm.single(w, rank)
        c = make_certificate(q)
        if c.defect_upper > 0:
            certs.append(c)
        rv = tuple(reversed(w))
        key = frozenset([w, rv])
        if rv != w and rv != _inv(w) and key not in done and len(w) >= 2:
            done.add(key)
            combo = CountingQm({w: Fraction(1, 2), rv: Fraction(-1, 2)}, rank,
                               name=f"(phi_{Word(w, rank)} - phi_{Word(rv, rank)})/2")
            c = make_certificate(combo)
            if c.defect_upper > 0:
                certs.append(c)
    return tuple(certs)


def auto_certificates(pair, maxlen: int = 2, n_maxlen: int = 2) -> list:
    """Default certificate family: counting words of length <= maxlen and
    their reversal-antisymmetrized combinations; for proper pairs these are
    restricted to N, and for finite quotients averaged counting functions in
    the Schreier basis of N are added."""
    rank = pair.alphabet.rank
    base = list(_auto_counting(rank, maxlen))
    if pair.is_plain:
        return base
    out = [restrict_to_N(pair, c) for c in base]
    if pair.quotient.is_finite and n_maxlen > 0:
        nr = pair.schreier.rank
        for c in _auto_counting(nr, n_maxlen):
            q = c.base

            def make(q=q):
                sch = pair.schreier
                inner = QmCertificate(
                    evaluate=lambda letters, q=q: q.homogeneous(sch.rewrite(letters)),
                    defect_upper=c.defect_upper, defect_kind=c.defect_kind, domain="N",
                    name=f"N:{q.name}", notes=list(c.notes), pair=pair, base=q,
                    raw_defect=c.raw_defect)
                return invariant_average(pair, inner)

            out.append(make())
    return out
