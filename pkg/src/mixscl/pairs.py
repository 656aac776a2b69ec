"""Pairs (G, N) with G free and N the kernel of a map onto a quotient group.

Three kinds of quotient are supported: trivial (N = G), free abelian Z^k,
and finite groups given by permutations or a multiplication table.
"""
from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import flint

from .words import Alphabet, Word, _inv, _mul, _reduce

__all__ = [
    "FiniteGroup",
    "QuotientSpec",
    "GroupPair",
    "MixedClassGroup",
    "Membership",
    "image_in_quotient",
    "in_N",
    "mixed_class",
    "membership_status",
    "smith_normal_form",
]


class FiniteGroup:
    """A finite group on elements 0..order-1 with 0 the identity."""

    def __init__(self, table: Sequence[Sequence[int]], labels=None):
        n = len(table)
        if n == 0 or any(len(row) != n for row in table):
            raise ValueError("multiplication table must be square and nonempty")
        self.table = [list(map(int, row)) for row in table]
        for row in self.table:
            for v in row:
                if not 0 <= v < n:
                    raise ValueError(f"table entry {v} out of range")
        ident = [e for e in range(n) if all(self.table[e][x] == x == self.table[x][e] for x in range(n))]
        if not ident:
            raise ValueError("table has no identity element")
        if ident[0] != 0:
            raise ValueError("identity must be element 0")
        for a in range(n):
            for b in range(n):
                ab = self.table[a][b]
                for c in range(n):
                    if self.table[ab][c] != self.table[a][self.table[b][c]]:
                        raise ValueError(f"table not associative at ({a},{b},{c})")
        self.inverses = []
        for a in range(n):
            inv = [b for b in range(n) if self.table[a][b] == 0]
            if len(inv) != 1 or self.table[inv[0]][a] != 0:
                raise ValueError(f"element {a} has no two-sided inverse")
            self.inverses.append(inv[0])
        self.order = n
        self.labels = labels

    @classmethod
    def from_permutations(cls, perms: Sequence[Sequence[int]]):
        """Group generated by the given permutations (images of 0..n-1).

        Returns (group, indices of the generators)."""
        if not perms:
            return cls([[0]]), []
        deg = len(perms[0])
        gens = []
        for p in perms:
            p = tuple(int(v) for v in p)
            if len(p) != deg or sorted(p) != list(range(deg)):
                raise ValueError(f"not a permutation of 0..{deg - 1}: {list(p)}")
            gens.append(p)
        ident = tuple(range(deg))
        elems = [ident]
        index = {ident: 0}
        queue = deque([ident])
        while queue:
            s = queue.popleft()
            for p in gens:
                t = _compose(s, p)
                if t not in index:
                    index[t] = len(elems)
                    elems.append(t)
                    queue.append(t)
        table = [[index[_compose(s, t)] for t in elems] for s in elems]
        return cls(table, labels=elems), [index[p] for p in gens]

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverses[a]


def _compose(s, t):
    # (s*t)(i) = s(t(i)); images of words multiply left to right
    return tuple(s[i] for i in t)


@dataclass
class QuotientSpec:
    kind: str                       # "trivial" | "free-abelian" | "finite"
    images: list                    # per generator: int vectors (free-abelian) or element ids (finite)
    group: Optional[FiniteGroup] = None
    dim: int = 0

    @classmethod
    def trivial(cls, rank: int):
        return cls("trivial", [0] * rank, FiniteGroup([[0]]))

    @classmethod
    def free_abelian(cls, images: Sequence[Sequence[int]]):
        imgs = [tuple(int(v) for v in row) for row in images]
        dims = {len(r) for r in imgs}
        if len(dims) != 1:
            raise ValueError("free-abelian images must share one dimension")
        return cls("free-abelian", imgs, None, dims.pop())

    @classmethod
    def cyclic(cls, order: int, images: Sequence[int]):
        table = [[(i + j) % order for j in range(order)] for i in range(order)]
        return cls("finite", [int(v) % order for v in images], FiniteGroup(table))

    @classmethod
    def permutations(cls, perms: Sequence[Sequence[int]]):
        group, idx = FiniteGroup.from_permutations(perms)
        return cls("finite", idx, group)

    @classmethod
    def table(cls, table, images: Sequence[int]):
        return cls("finite", [int(v) for v in images], FiniteGroup(table))

    @property
    def is_finite(self) -> bool:
        return self.kind in ("trivial", "finite")

    def identity(self):
        return tuple([0] * self.dim) if self.kind == "free-abelian" else 0

    def mul(self, a, b):
        if self.kind == "free-abelian":
            return tuple(x + y for x, y in zip(a, b))
        return self.group.mul(a, b)

    def inv(self, a):
        if self.kind == "free-abelian":
            return tuple(-x for x in a)
        return self.group.inv(a)

    def letter_image(self, x: int):
        img = self.images[abs(x) - 1]
        return img if x > 0 else self.inv(img)


@dataclass(frozen=True)
class Membership:
    status: str                     # "yes" | "no" | "unknown"
    witness: object = None          # Chain2 for yes-with-witness, class for finite
    obstruction: object = None
    reason: str = ""


class _Schreier:
    """Reidemeister-Schreier data for N = ker p, finite image."""

    def __init__(self, pair: "GroupPair"):
        q = pair.quotient
        rank = pair.alphabet.rank
        letters = pair.alphabet.letters()
        trans = {q.identity(): ()}
        queue = deque([q.identity()])
        while queue:
            g = queue.popleft()
            for x in letters:
                h = q.mul(g, q.letter_image(x))
                if h not in trans:
                    trans[h] = trans[g] + (x,)
                    queue.append(h)
        if len(trans) != q.group.order:
            raise ValueError("generator images do not generate the finite quotient")
        self.transversal = trans
        self.edge_index = {}
        self.basis = []
        for g in sorted(trans, key=lambda e: (len(trans[e]), e)):
            for i in range(1, rank + 1):
                h = q.mul(g, q.letter_image(i))
                s = _reduce(trans[g] + (i,) + _inv(trans[h]))
                if s:
                    self.edge_index[(g, i)] = len(self.basis) + 1
                    self.basis.append(s)
        self.rank = len(self.basis)
        self.q = q
        assert self.rank == (rank - 1) * q.group.order + 1

    def rewrite(self, y: tuple) -> tuple:
        q = self.q
        g = q.identity()
        out = []
        for x in y:
            if x > 0:
                j = self.edge_index.get((g, x))
                if j:
                    out.append(j)
                g = q.mul(g, q.letter_image(x))
            else:
                g = q.mul(g, q.letter_image(x))
                j = self.edge_index.get((g, -x))
                if j:
                    out.append(-j)
        if g != q.identity():
            raise ValueError("word is not in N")
        return _reduce(out)

    def expand(self, u: tuple) -> tuple:
        out: tuple = ()
        for j in u:
            s = self.basis[abs(j) - 1]
            out = _mul(out, s if j > 0 else _inv(s))
        return out


def smith_normal_form(rows: Sequence[Sequence[int]], ncols: int):
    """Return (diagonal, Q) with P*R*Q diagonal for some unimodular P.

    Only the column transform is returned; it is what maps a vector to its
    coordinates in the quotient Z^n / rowspace(R).
    """
    A = [list(map(int, r)) for r in rows]
    m, n = len(A), ncols
    Q = [[int(i == j) for j in range(n)] for i in range(n)]

    def colswap(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in Q:
            row[i], row[j] = row[j], row[i]

    def coladd(src, dst, k):  # col dst += k * col src
        for row in A:
            row[dst] += k * row[src]
        for row in Q:
            row[dst] += k * row[src]

    diag = []
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        A[t], A[best[0]] = A[best[0]], A[t]
        colswap(t, best[1])
        while True:
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    k = A[i][t] // A[t][t]
                    A[i] = [a - k * b for a, b in zip(A[i], A[t])]
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    k = A[t][j] // A[t][t]
                    coladd(t, j, -k)
                    if A[t][j]:
                        colswap(t, j)
                        done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
        diag.append(A[t][t])
        t += 1
    return diag, Q


@dataclass
class MixedClassGroup:
    """N/[G,N] as Z^r / diag(d_1..d_t) with d_i = 0 meaning a free factor."""

    schreier: _Schreier
    diag: list
    Q: list

    @property
    def invariants(self) -> list:
        n = len(self.Q)
        factors = [d for d in self.diag if d != 1]
        return factors + [0] * (n - len(self.diag))

    def coordinates(self, vec: Sequence[int]) -> tuple:
        n = len(self.Q)
        w = [sum(vec[i] * self.Q[i][j] for i in range(n)) for j in range(n)]
        out = []
        for j in range(n):
            if j < len(self.diag):
                d = self.diag[j]
                if d != 1:
                    out.append(w[j] % d)
            else:
                out.append(w[j])
        return tuple(out)

    def class_of(self, y: tuple) -> tuple:
        u = self.schreier.rewrite(y)
        vec = [0] * self.schreier.rank
        for j in u:
            vec[abs(j) - 1] += 1 if j > 0 else -1
        return self.coordinates(vec)


class GroupPair:
    """G = F(rank) together with p: G -> Gamma; N = ker p."""

    def __init__(self, alphabet: Alphabet, quotient: QuotientSpec, section=None, reps=None):
        if len(quotient.images) != alphabet.rank:
            raise ValueError(f"need {alphabet.rank} generator images, got {len(quotient.images)}")
        self.alphabet = alphabet
        self.quotient = quotient
        self._lock = threading.Lock()
        self._schreier = None
        self._mixed = None
        self.reps = None
        if reps is not None:
            self.reps = [r if isinstance(r, Word) else alphabet.parse(r) for r in reps]
            if quotient.is_finite:
                imgs = [self.image_letters(r.letters) for r in self.reps]
                if sorted(imgs) != list(range(quotient.group.order)):
                    raise ValueError("coset representatives must map bijectively onto the quotient")
        self.section = None
        if section is not None:
            self.section = _VirtualSection(self, section)

    # construction helpers
    @classmethod
    def trivial(cls, rank: int):
        return cls(Alphabet(rank), QuotientSpec.trivial(rank))

    @classmethod
    def cyclic(cls, rank: int, order: int, images):
        return cls(Alphabet(rank), QuotientSpec.cyclic(order, images))

    @classmethod
    def integers(cls, images, section=None):
        imgs = [[v] if isinstance(v, int) else v for v in images]
        return cls(Alphabet(len(imgs)), QuotientSpec.free_abelian(imgs), section=section)

    @property
    def is_plain(self) -> bool:
        return self.quotient.kind == "trivial" or (
            self.quotient.kind == "finite" and self.quotient.group.order == 1)

    def image_letters(self, letters):
        q = self.quotient
        if q.kind == "trivial":
            return 0
        if q.kind == "free-abelian":
            out = [0] * q.dim
            for x in letters:
                img = q.images[abs(x) - 1]
                s = 1 if x > 0 else -1
                for i, v in enumerate(img):
                    out[i] += s * v
            return tuple(out)
        e = 0
        for x in letters:
            e = q.mul(e, q.letter_image(x))
        return e

    def in_N_letters(self, letters) -> bool:
        return self.image_letters(letters) == self.quotient.identity()

    # coset machinery (finite quotient)
    @property
    def schreier(self) -> _Schreier:
        if not self.quotient.is_finite:
            raise ValueError("Reidemeister-Schreier data needs a finite quotient")
        with self._lock:
            if self._schreier is None:
                self._schreier = _Schreier(self)
        return self._schreier

    def coset_reps(self) -> list:
        """Words b_gamma, one per quotient element, for finite quotients."""
        if not self.quotient.is_finite:
            raise ValueError("coset representatives need a finite quotient")
        if self.reps is not None:
            return sorted(self.reps, key=lambda r: self.image_letters(r.letters))
        tr = self.schreier.transversal
        return [Word(tr[g], self.alphabet.rank) for g in sorted(tr)]

    def set_section(self, gamma) -> tuple:
        """A word s with p(s) = gamma (set-theoretic section)."""
        q = self.quotient
        if q.is_finite:
            if self.reps is not None:
                for r in self.reps:
                    if self.image_letters(r.letters) == gamma:
                        return r.letters
            return self.schreier.transversal[gamma]
        if self.section is not None:
            return self.section.t(gamma)
        units = {}
        for i, img in enumerate(q.images, start=1):
            nz = [k for k, v in enumerate(img) if v]
            if len(nz) == 1 and abs(img[nz[0]]) == 1 and nz[0] not in units:
                units[nz[0]] = i if img[nz[0]] == 1 else -i
        if len(units) < q.dim:
            raise ValueError("no section available: supply section lifts in the pair config")
        out: tuple = ()
        for k in range(q.dim):
            out = _mul(out, (units[k],) * gamma[k] if gamma[k] >= 0 else (-units[k],) * -gamma[k])
        return out

    def mixed_class_group(self) -> MixedClassGroup:
        if not self.quotient.is_finite:
            raise ValueError("mixed_class is only available for finite quotients")
        with self._lock:
            if self._mixed is not None:
                return self._mixed
        sch = self.schreier
        rows = []
        for i in range(1, self.alphabet.rank + 1):
            for j, s in enumerate(sch.basis, start=1):
                conj = _reduce((i,) + s + (-i,))
                vec = [0] * sch.rank
                for k in sch.rewrite(conj):
                    vec[abs(k) - 1] += 1 if k > 0 else -1
                vec[j - 1] -= 1
                rows.append(vec)
        diag, Q = smith_normal_form(rows, sch.rank)
        with self._lock:
            self._mixed = MixedClassGroup(sch, diag, Q)
        return self._mixed

    def describe(self) -> dict:
        q = self.quotient
        out = {"rank": self.alphabet.rank, "kind": q.kind}
        if q.kind == "free-abelian":
            out["images"] = [list(v) for v in q.images]
        elif q.kind == "finite":
            out["order"] = q.group.order
            out["images"] = list(q.images)
        if q.is_finite:
            out["index"] = q.group.order
            out["N_rank"] = self.schreier.rank
            out["N_mod_GN"] = self.mixed_class_group().invariants
        return out


class _VirtualSection:
    """Homomorphic section s on a finite-index Lambda <= Gamma plus reps B.

    Config: {"subgroup_gens": [...], "lifts": [words], "reps": [words]?}.
    For finite quotients Lambda may be trivial; for Z^k the lifts must commute
    so that s is a homomorphism.
    """

    def __init__(self, pair: GroupPair, cfg: dict):
        q = pair.quotient
        self.pair = pair
        gens = cfg.get("subgroup_gens", [])
        lifts = [w if isinstance(w, Word) else pair.alphabet.parse(w) for w in cfg.get("lifts", [])]
        if len(gens) != len(lifts):
            raise ValueError("section: subgroup_gens and lifts differ in length")
        for gam, w in zip(gens, lifts):
            img = pair.image_letters(w.letters)
            want = tuple(gam) if q.kind == "free-abelian" else gam
            if img != want:
                raise ValueError(f"section lift {w} does not map to {gam}")
        for u in lifts:
            for v in lifts:
                if _mul(u.letters, v.letters) != _mul(v.letters, u.letters):
                    raise ValueError("section lifts must commute for s to be a homomorphism")
        self.gens = [tuple(g) if q.kind == "free-abelian" else g for g in gens]
        self.lifts = [w.letters for w in lifts]
        if q.kind == "free-abelian":
            if q.dim != len(self.gens):
                raise ValueError("section: need a lattice basis of full rank")
            d = len(self.gens)
            M = flint.fmpz_mat(d, d, [self.gens[j][i] for i in range(d) for j in range(d)])
            if M.det() == 0:
                raise ValueError("section: subgroup generators are not independent")
            self.minv = flint.fmpq_mat(M).inv()
            reps_cfg = cfg.get("reps")
            if reps_cfg is None:
                if abs(M.det()) != 1:
                    raise ValueError("section: give reps for a proper finite-index lattice")
                reps_cfg = ["e" if pair.alphabet.rank < 5 else "1"]
            self.B = [r if isinstance(r, Word) else pair.alphabet.parse(r) for r in reps_cfg]
            if len(self.B) != abs(M.det()):
                raise ValueError("section: number of reps must equal the index of Lambda")
        else:
            if self.gens:
                raise ValueError("section: only trivial Lambda supported for finite quotients")
            self.B = pair.coset_reps()

    def split(self, gamma):
        """gamma = lambda + p(b) with lambda in Lambda; returns (coords, b)."""
        q = self.pair.quotient
        if q.kind != "free-abelian":
            for b in self.B:
                if self.pair.image_letters(b.letters) == gamma:
                    return (), b.letters
            raise ValueError("no representative for quotient element")
        for b in self.B:
            pb = self.pair.image_letters(b.letters)
            diff = [x - y for x, y in zip(gamma, pb)]
            coords = (self.minv * flint.fmpq_mat(len(diff), 1, diff)).entries()
            if all(c.q == 1 for c in coords):
                return tuple(int(c.p) for c in coords), b.letters
        raise ValueError("representatives do not cover the quotient")

    def t(self, gamma) -> tuple:
        coords, b = self.split(gamma)
        out: tuple = ()
        for c, w in zip(coords, self.lifts):
            out = _mul(out, w * c if c >= 0 else _inv(w) * -c)
        return _mul(out, b)

    def reps_images(self) -> list:
        return [self.pair.image_letters(b.letters) for b in self.B]


def image_in_quotient(pair: GroupPair, g: Word):
    return pair.image_letters(g.letters)


def in_N(pair: GroupPair, g: Word) -> bool:
    return pair.in_N_letters(g.letters)


def mixed_class(pair: GroupPair, y: Word) -> tuple:
    """Class of y in N/[G,N] (finite quotients only); all-zero iff y in [G,N]."""
    if not pair.quotient.is_finite:
        raise ValueError("mixed_class is unavailable for infinite quotients")
    if not in_N(pair, y):
        raise ValueError(f"{y} is not in N")
    return pair.mixed_class_group().class_of(y.letters)


def ordered_product(pair: GroupPair, c) -> tuple:
    """x_1 ... x_k * xv_1^-1 ... xv_l^-1 for an integral chain (terms repeated by |coeff|)."""
    out: tuple = ()
    for w, q in c.items():
        if q.denominator != 1:
            raise ValueError("membership needs integer coefficients")
        n = int(q)
        piece = w.letters if n > 0 else _inv(w.letters)
        for _ in range(abs(n)):
            out = _mul(out, piece)
    return out


def membership_status(pair: GroupPair, c, search_budget=None) -> Membership:
    """Three-valued decision of c in the integral mixed chain space."""
    from .chains import Chain1
    if not isinstance(c, Chain1):
        raise TypeError("expected a Chain1")
    for w in c.support():
        if not in_N(pair, w):
            raise ValueError(f"support element {w} is not in N")
    y = ordered_product(pair, c)
    ab = Word(y, pair.alphabet.rank).exponent_sums()
    if any(ab):
        return Membership("no", obstruction={"abelianization": ab},
                          reason="product has nonzero exponent sums, so it is not in [G,G]")
    if pair.quotient.is_finite:
        cls = pair.mixed_class_group().class_of(y)
        if any(cls):
            return Membership("no", obstruction={"mixed_class": list(cls)},
                              reason="product has nonzero class in N/[G,N]")
        return Membership("yes", witness={"mixed_class": list(cls)},
                          reason="product vanishes in N/[G,N]")
    if search_budget is not None:
        from .commutators import cl_chain_upper
        from .chains import chain_witness
        found = cl_chain_upper(pair, c, search_budget)
        if found is not None:
            w = chain_witness(pair, c, found)
            return Membership("yes", witness=w, reason="explicit prime 2-chain witness")
    return Membership("unknown", reason="no witness found and no exact test for infinite quotients")
