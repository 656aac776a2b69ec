"""Upper and lower bounds for (mixed) stable commutator length of chains.

Upper bounds come from three exact sources, all computed on the sign
normalized chain x_1 + ... + x_m (negative terms inverted):

* the filling LP: (||x_1^n + ... + x_m^n||' + m) / 4n, since these numbers
  are subadditive in n and their infimum is 4 scl;
* commutator decompositions of h_1 x_1^n h_1^-1 ... h_m x_m^n h_m^-1 with k
  commutators, giving (k + m - 1) / n;
* the admissible surface built from such a decomposition, with
  -chi / 2n(S) = (2k + m - 2) / 2n.

Lower bounds are |mu(c)| / 2D over certified homogeneous quasimorphisms.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .chains import Chain1, chain_witness, normalize_signs
from .commutators import Budget, cl_chain_upper
from .lp import FillProblem, build_support, solve_min_l1
from .pairs import GroupPair, membership_status
from .qm import QmCertificate, auto_certificates, evaluate_on_chain
from .words import Word, _cyclic, _inv, _mul

__all__ = ["Params", "SclBounds", "fl_upper", "scl_upper", "scl_lower", "sandwich",
           "another_duality_check", "formula_harness", "compare_plain_mixed",
           "default_radius"]

log = logging.getLogger(__name__)


def default_radius(c: Chain1) -> int:
    # a full ball of radius max(4, longest + 2) is out of reach for exact
    # arithmetic on anything but tiny chains; the subword pool and the
    # decomposition witnesses carry the long words instead
    return 2


@dataclass
class Params:
    n_list: Sequence[int] = (1, 2, 3)
    radius: Optional[int] = None
    budget: Budget = field(default_factory=lambda: Budget(k=2, length=5, conj_length=2))
    pool: bool = True
    lp: bool = True
    search: bool = True
    surfaces: bool = True
    cert_maxlen: int = 2
    threads: int = 1


@dataclass
class SclBounds:
    lower: Optional[Fraction]
    upper: Optional[Fraction]           # None: no finite upper bound found
    chain: Chain1
    pair: object = None
    lower_cert: Optional[str] = None
    upper_provenance: dict = field(default_factory=dict)
    lp_runs: list = field(default_factory=list)
    infinite: bool = False
    notes: list = field(default_factory=list)

    @property
    def gap(self) -> Optional[Fraction]:
        if self.infinite or self.upper is None or self.lower is None:
            return None
        return self.upper - self.lower

    def to_json(self) -> dict:
        def q(v):
            return None if v is None else str(v)

        if self.infinite:
            return {"lower": "inf", "upper": "inf", "gap": "0", "infinite": True,
                    "notes": self.notes}
        return {
            "lower": q(self.lower),
            "upper": q(self.upper),
            "gap": q(self.gap),
            "lower_certificate": self.lower_cert,
            "upper_provenance": self.upper_provenance,
            "lp_provenance": self.lp_runs,
            "notes": self.notes,
        }


# ---- preparation -----------------------------------------------------------

def _clean(c: Chain1) -> Chain1:
    """Identity terms carry no scl (1 is a boundary), so they are dropped."""
    return Chain1([(w, q) for w, q in c.items() if w.letters], c.rank)


def _terms(c: Chain1) -> list:
    return normalize_signs(_clean(c))


def _powered(terms: list, n: int) -> Chain1:
    return Chain1([(t ** n, 1) for t in terms], terms[0].rank)


POOL_MAX_LEN = 24


def _pool_pairs(pair, words: list, rank: int) -> list:
    """Pairs (u, v) with u, v, uv all cyclic subwords of the targets or
    their inverses. Words longer than POOL_MAX_LEN are skipped since the pool
    grows quadratically with length."""
    pool = {()}
    for w in words:
        core = _cyclic(w.letters)[0]
        if not core or len(core) > POOL_MAX_LEN:
            continue
        L = len(core)
        for body in (core, _inv(core)):
            doubled = body + body
            for i in range(L):
                for j in range(1, L + 1):
                    pool.add(doubled[i:i + j])
    plain = pair is None or pair.is_plain
    inN = {u: plain or pair.in_N_letters(u) for u in pool}
    out = []
    ordered = sorted(pool, key=lambda u: (len(u), u))
    for u in ordered:
        for v in ordered:
            if not (inN[u] or inN[v]):
                continue
            if _mul(u, v) in pool:
                out.append((Word(u, rank), Word(v, rank)))
    return out


# ---- upper bounds ------------------------------------------------------------

def _decomposition(pair, terms: list, n: int, budget: Budget):
    rank = terms[0].rank
    c = Chain1([], rank)
    for t in terms:
        c = c + Chain1([(t ** n, 1)], rank)
    return cl_chain_upper(pair, c, budget)


def _lp_job(pair, terms: list, n: int, radius: int, use_pool: bool, dec) -> dict:
    rank = terms[0].rank
    target = _powered(terms, n)
    extra = []
    if use_pool:
        extra += _pool_pairs(pair, list(target.keys()), rank)
    if dec is not None:
        w = chain_witness(pair, target, dec)
        extra += list(w.keys())
    support = build_support(pair, radius, extra, rank)
    problem = FillProblem(target, support, pair)
    sol = solve_min_l1(problem)
    m = len(terms)
    rec = {"n": n, "radius": radius, "support": len(support), "rows": len(problem.rows),
           "status": sol.status}
    if sol.status == "optimal":
        rec["lp_value"] = str(sol.value)
        rec["k_plus_l"] = m
        rec["fl_bound"] = str((sol.value + m) / n)
        rec["_fl"] = (sol.value + m) / n
    return rec


def _upper_runs(pair, c: Chain1, params: Params) -> tuple:
    terms = _terms(c)
    if not terms:
        return [], [], terms
    radius = params.radius if params.radius is not None else default_radius(c)
    decs = {}
    if params.search:
        for n in params.n_list:
            decs[n] = _decomposition(pair, terms, n, params.budget)
    lp_runs = []
    if params.lp:
        jobs = [(pair, terms, n, radius, params.pool, decs.get(n)) for n in params.n_list]
        if params.threads > 1:
            with ThreadPoolExecutor(params.threads) as ex:
                lp_runs = list(ex.map(lambda a: _lp_job(*a), jobs))
        else:
            lp_runs = [_lp_job(*a) for a in jobs]
    dec_runs = []
    m = len(terms)
    for n in params.n_list:
        dec = decs.get(n)
        if dec is None:
            continue
        rec = {"n": n, "k": dec.k, "m": m, "decomposition": dec.to_json(),
               "_cl": Fraction(dec.k + m - 1, n)}
        if params.surfaces:
            from .surfaces import chi_ratio, surface_for_chain
            S = surface_for_chain(pair, dec, n)
            rec["_surface"] = chi_ratio(S)
        dec_runs.append(rec)
    return lp_runs, dec_runs, terms


def fl_upper(pair, c: Chain1, n_list=(1, 2, 3), radius: Optional[int] = None,
             pool: bool = True, budget: Optional[Budget] = None) -> Fraction:
    """Certified upper bound on the filling norm: min over n of
    (LP value on c_n + (k + l)) / n."""
    params = Params(n_list=tuple(n_list), radius=radius, pool=pool, surfaces=False,
                    search=budget is not None, budget=budget or Budget())
    terms = _terms(c)
    if not terms:
        return Fraction(0)
    lp_runs, _, _ = _upper_runs(pair, c, params)
    vals = [r["_fl"] for r in lp_runs if "_fl" in r]
    if not vals:
        raise ValueError("every filling LP was infeasible at this truncation")
    return min(vals)


def _best_upper(lp_runs: list, dec_runs: list) -> tuple:
    best = None
    prov = {}
    for r in lp_runs:
        if "_fl" in r:
            v = r["_fl"] / 4
            if best is None or v < best:
                best = v
                prov = {"method": "filling-lp", "n": r["n"], "radius": r["radius"],
                        "lp_value": r["lp_value"], "k_plus_l": r["k_plus_l"]}
    for r in dec_runs:
        for key, method in (("_cl", "commutator-length"), ("_surface", "admissible-surface")):
            if key in r and (best is None or r[key] < best):
                best = r[key]
                prov = {"method": method, "n": r["n"], "k": r["k"], "m": r["m"],
                        "decomposition": r["decomposition"]}
    return best, prov


def scl_upper(pair, c: Chain1, params: Optional[Params] = None) -> Optional[Fraction]:
    return _upper(pair, c, params or Params())[0]


def _upper(pair, c: Chain1, params: Params) -> tuple:
    terms = _terms(c)
    if not terms:
        return Fraction(0), {"method": "trivial"}, []
    lp_runs, dec_runs, _ = _upper_runs(pair, c, params)
    best, prov = _best_upper(lp_runs, dec_runs)
    public = [{k: v for k, v in r.items() if not k.startswith("_")} for r in lp_runs]
    for r in dec_runs:
        d = {k: v for k, v in r.items() if not k.startswith("_")}
        d["cl_bound"] = str(r["_cl"])
        if "_surface" in r:
            d["surface_bound"] = str(r["_surface"])
        public.append(d)
    return best, prov, public


# ---- lower bounds ------------------------------------------------------------

def scl_lower(pair, c: Chain1, certificates: Sequence[QmCertificate]) -> tuple:
    """(bound, certificate name) with bound = max |mu(c)| / 2D."""
    best = Fraction(0)
    name = None
    mixed = pair is not None and not pair.is_plain
    for cert in certificates:
        if cert.defect_upper <= 0:
            raise ValueError(f"certificate {cert.name} has no positive defect bound")
        if mixed and cert.invariance != "G-invariant-on-N" and cert.domain == "N":
            raise ValueError(f"certificate {cert.name} is not G-invariant on N")
        v = abs(evaluate_on_chain(cert, c)) / (2 * cert.defect_upper)
        if v > best:
            best, name = v, cert.name
    return best, name


# ---- sandwich ------------------------------------------------------------------

def sandwich(pair, c: Chain1, params: Optional[Params] = None, certificates=None) -> SclBounds:
    params = params or Params()
    c0 = _clean(c)
    if not c0:
        return SclBounds(Fraction(0), Fraction(0), c, pair, upper_provenance={"method": "trivial"})
    if not c0.is_integral():
        raise ValueError("scl bounds are computed for integral chains; scale first")
    mem = membership_status(pair, c0, search_budget=params.budget)
    if mem.status == "no":
        return SclBounds(None, None, c, pair, infinite=True,
                         notes=[f"chain is not a mixed boundary: {mem.reason}"])
    if certificates is None:
        certificates = auto_certificates(pair, params.cert_maxlen)
    lower, lname = scl_lower(pair, c0, certificates)
    upper, prov, runs = _upper(pair, c0, params)
    out = SclBounds(lower, upper, c, pair, lname, prov, runs)
    if mem.status == "unknown":
        out.notes.append("membership undecided; upper bound only valid if the LP or search certified it")
    if upper is not None and lower > upper:
        raise AssertionError(f"lower bound {lower} exceeds upper bound {upper}")
    return out


def another_duality_check(pair, cert: QmCertificate, chains: Sequence[Chain1],
                          params: Optional[Params] = None) -> dict:
    """For each chain with 0 < L <= scl <= U, the witnessed interval for
    |mu(c)| / scl(c) is [|mu(c)|/U, |mu(c)|/L]; it must stay below 2D."""
    if cert.defect_upper <= 0:
        raise ValueError("certificate must have a positive defect bound (homomorphisms are excluded)")
    params = params or Params()
    rows = []
    ok = True
    best_low = Fraction(0)
    for c in chains:
        b = sandwich(pair, c, params)
        if b.infinite:
            rows.append({"chain": str(c), "skipped": "infinite scl"})
            continue
        mu = abs(evaluate_on_chain(cert, c))
        row = {"chain": str(c), "mu": str(mu), "lower": str(b.lower),
               "upper": None if b.upper is None else str(b.upper)}
        if b.upper is not None:
            if mu > 2 * cert.defect_upper * b.upper:
                ok = False
                row["violation"] = True
            if b.upper > 0:
                lo = mu / b.upper
                row["ratio_low"] = str(lo)
                best_low = max(best_low, lo)
        if b.lower > 0:
            row["ratio_high"] = str(mu / b.lower)
        rows.append(row)
    return {"certificate": cert.name, "two_D": str(2 * cert.defect_upper),
            "best_ratio_lower_bound": str(best_low), "consistent": ok, "rows": rows}


# ---- formula harnesses -----------------------------------------------------------

def _interval(b: SclBounds) -> tuple:
    if b.infinite:
        return (None, None)
    return (b.lower, b.upper)


def _overlap(i1: tuple, i2: tuple) -> bool:
    if i1 == (None, None) or i2 == (None, None):
        return i1 == i2
    lo = max(i1[0], i2[0])
    up = [u for u in (i1[1], i2[1]) if u is not None]
    return not up or lo <= min(up)


def _fmt_interval(i: tuple) -> list:
    if i == (None, None):
        return ["inf", "inf"]
    return [str(i[0]), None if i[1] is None else str(i[1])]


def formula_harness(kind: str, inputs: dict, params: Optional[Params] = None) -> dict:
    """Check the finite-index chain formula or the free product formula
    against computed bound intervals. Never claims equality."""
    params = params or Params()
    if kind == "finite-index-chain":
        pair: GroupPair = inputs["pair"]
        x: Word = inputs["x"]
        if not pair.quotient.is_finite:
            raise ValueError("finite-index-chain needs a finite quotient")
        if not pair.in_N_letters(x.letters):
            raise ValueError(f"{x} is not in N")
        rank = pair.alphabet.rank
        plain = GroupPair.trivial(rank)
        left = sandwich(plain, Chain1([(x, 1)], rank), params)
        sch = pair.schreier
        reps = pair.coset_reps()
        nr = sch.rank
        terms = []
        for a in reps:
            y = _mul(_mul(a.letters, x.letters), _inv(a.letters))
            terms.append((Word(sch.rewrite(y), nr), 1))
        rc = Chain1([], nr)
        for w, q in terms:
            rc = rc + Chain1([(w, q)], nr)
        right_raw = sandwich(GroupPair.trivial(nr), rc, params)
        k = len(reps)
        li = _interval(left)
        ri = _interval(right_raw)
        if ri != (None, None):
            ri = (ri[0] / k, None if ri[1] is None else ri[1] / k)
        return {"kind": kind, "left": _fmt_interval(li), "right": _fmt_interval(ri),
                "index": k, "right_chain": str(rc), "consistent": _overlap(li, ri)}
    if kind == "hnn-like":
        g1: Word = inputs["g1"]
        g2: Word = inputs["g2"]
        r = g1.rank
        if g1.rank != g2.rank:
            raise ValueError("g1 and g2 must live in the same free group")
        if not g1.letters or not g2.letters:
            raise ValueError("g1 and g2 must have infinite order (nontrivial)")
        big = r + 1
        t = (big,)
        y = _mul(_mul(_mul(g1.letters, t), g2.letters), (-big,))
        left = sandwich(GroupPair.trivial(big), Chain1([(Word(y, big), 1)], big), params)
        inner = Chain1([(g1, 1)], r) + Chain1([(g2, 1)], r)
        right = sandwich(GroupPair.trivial(r), inner, params)
        li = _interval(left)
        ri = _interval(right)
        if ri != (None, None):
            half = Fraction(1, 2)
            ri = (ri[0] + half, None if ri[1] is None else ri[1] + half)
        return {"kind": kind, "left_word": str(Word(y, big)), "left": _fmt_interval(li),
                "right": _fmt_interval(ri), "consistent": _overlap(li, ri)}
    raise ValueError(f"unknown harness kind {kind!r}")


def compare_plain_mixed(pair: GroupPair, y: Word, params: Optional[Params] = None) -> dict:
    """Bounds for scl_G(y) and scl_{G,N}(y), checked against
    scl_G <= scl_{G,N} <= 2 scl_G (the right inequality needs an amenable
    quotient and vanishing of the obstruction space; it is only checked for
    non-violation)."""
    params = params or Params()
    rank = pair.alphabet.rank
    c = Chain1([(y, 1)], rank)
    g = sandwich(GroupPair.trivial(rank), c, params)
    gn = sandwich(pair, c, params)
    ok_left = g.infinite or gn.upper is None or g.lower <= gn.upper
    ok_right = g.infinite or g.upper is None or gn.lower <= 2 * g.upper
    return {"y": str(y), "plain": _fmt_interval(_interval(g)), "mixed": _fmt_interval(_interval(gn)),
            "lower_G_le_upper_GN": ok_left, "lower_GN_le_2_upper_G": ok_right}
