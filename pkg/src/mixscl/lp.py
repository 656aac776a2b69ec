"""Exact l1 filling LP: minimize the l1 norm of a prime 2-chain with given
boundary over a finite support of pairs.

The optimum is computed by an exact rational revised simplex. A floating
point solve (HiGHS) is used only to pick a starting basis; every reported
number comes from exact arithmetic on that basis and the pivots after it.
"""
from __future__ import annotations

import logging
from math import gcd
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import flint
import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csc_matrix, csr_matrix

from .chains import Chain1, Chain2, boundary, is_prime_support, pair_boundary
from .words import Word, _mul, words_up_to

__all__ = ["FillProblem", "LpSolution", "build_support", "solve_min_l1",
           "verify_solution", "dual_pairing", "solve_standard_form"]

log = logging.getLogger(__name__)


def build_support(pair, radius: int, extra: Iterable = (), rank: Optional[int] = None) -> list:
    """All pairs with |g1|, |g2|, |g1 g2| <= radius (prime ones for proper
    pairs), followed by the extra pairs. Order is deterministic."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    rank = rank if rank is not None else pair.alphabet.rank
    ws = words_up_to(rank, radius)
    plain = pair is None or pair.is_plain
    innN = {w: plain or pair.in_N_letters(w) for w in ws}
    out = []
    seen = set()
    for g1 in ws:
        for g2 in ws:
            if len(_mul(g1, g2)) > radius:
                continue
            if not (innN[g1] or innN[g2]):
                continue
            key = (Word(g1, rank), Word(g2, rank))
            seen.add(key)
            out.append(key)
    for g1, g2 in extra:
        key = (g1, g2)
        if key in seen:
            continue
        if not plain and not (pair.in_N_letters(g1.letters) or pair.in_N_letters(g2.letters)):
            raise ValueError(f"extra pair ({g1},{g2}) is not prime")
        seen.add(key)
        out.append(key)
    return out


@dataclass
class FillProblem:
    target: Chain1
    support: list
    pair: object = None

    def __post_init__(self):
        if self.pair is not None and not self.pair.is_plain:
            for g1, g2 in self.support:
                if not (self.pair.in_N_letters(g1.letters) or self.pair.in_N_letters(g2.letters)):
                    raise ValueError(f"support pair ({g1},{g2}) is not prime")
        rows = set(self.target.support())
        for g1, g2 in self.support:
            rows.update(w for w, _ in pair_boundary(g1, g2))
        self.rows = sorted(rows, key=Word.sort_key)

    def columns(self) -> list:
        cols = []
        for g1, g2 in self.support:
            col: dict = {}
            for w, s in pair_boundary(g1, g2):
                col[w] = col.get(w, 0) + s
            cols.append({w: v for w, v in col.items() if v})
        return cols


@dataclass
class LpSolution:
    status: str                        # "optimal" | "infeasible"
    value: Optional[Fraction] = None
    primal: Chain2 = None
    dual: dict = field(default_factory=dict)
    iterations: int = 0
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.status == "optimal":
            out["value"] = str(self.value)
            out["primal"] = [[str(g1), str(g2), str(q)] for (g1, g2), q in self.primal.items()]
            out["dual"] = {str(w): str(v) for w, v in sorted(self.dual.items(), key=lambda t: t[0].sort_key())}
            out["dual_kind"] = "truncated"
        return out


def dual_pairing(psi: dict, c: Chain1) -> Fraction:
    return sum((q * Fraction(psi.get(w, 0)) for w, q in c.items()), Fraction(0))


# ---- exact simplex on  min c.x  s.t.  A x = b, x >= 0 ----------------------

def _to_fraction(v) -> Fraction:
    return Fraction(int(v.p), int(v.q))


class _IterationLimit(Exception):
    pass


class _Simplex:
    """Revised simplex over Q. Columns are sparse dicts row -> int.

    Artificial columns (one per row, signed so the all-artificial basis is
    feasible) are appended after the structural ones. They never re-enter
    in phase 2 and are kept at zero by the ratio test.
    """

    def __init__(self, cols: list, b: list, cost: list, max_degenerate: int = 50,
                 max_iter: int = 20000):
        self.m = len(b)
        self.n = len(cols)
        self.b = [Fraction(v) for v in b]
        self.cols = list(cols)
        for i in range(self.m):
            self.cols.append({i: -1 if self.b[i] < 0 else 1})
        self.cost = [Fraction(c) for c in cost] + [Fraction(0)] * self.m
        self.max_degenerate = max_degenerate
        self.iterations = 0
        self.bland = False
        self.max_iter = max_iter

    def is_art(self, j: int) -> bool:
        return j >= self.n

    def _int_matrix(self):
        if getattr(self, "_AT", None) is None:
            rows, cidx, vals = [], [], []
            for j, col in enumerate(self.cols):
                for i, v in col.items():
                    rows.append(j)
                    cidx.append(i)
                    vals.append(int(v))
            self._AT = csr_matrix((np.array(vals, dtype=np.int64), (rows, cidx)),
                                  shape=(len(self.cols), self.m))
        return self._AT

    def _price(self, y, cost, inbasis, limit):
        """Entering column: most negative reduced cost (Dantzig), or the
        first negative one once Bland's rule is switched on."""
        den = 1
        for v in y:
            den = den * v.denominator // gcd(den, v.denominator)
        for v in cost:
            den = den * v.denominator // gcd(den, v.denominator)
        yi = [int(v * den) for v in y]
        big = max((abs(v) for v in yi), default=0)
        colmax = max((abs(v) for col in self.cols for v in col.values()), default=1)
        if big * colmax * max(self.m, 1) < 2 ** 62 and den < 2 ** 40:
            ci = np.array([int(c * den) for c in cost[:limit]], dtype=np.int64)
            d = ci - self._int_matrix()[:limit] @ np.array(yi, dtype=np.int64)
        else:
            d = [cost[j] * den - sum((yi[i] * v for i, v in self.cols[j].items()))
                 for j in range(limit)]
        enter = None
        best = 0
        for j in (np.flatnonzero(np.asarray(d) < 0) if not isinstance(d, list)
                  else [j for j, v in enumerate(d) if v < 0]):
            j = int(j)
            if j in inbasis:
                continue
            if self.bland:
                return j
            if d[j] < best:
                best, enter = d[j], j
        return enter

    def _matrix(self, basis):
        m = self.m
        B = flint.fmpq_mat(m, m)
        for k, j in enumerate(basis):
            for i, v in self.cols[j].items():
                B[i, k] = v
        return B

    def _solve(self, basis, cost):
        B = self._matrix(basis)
        rhs = flint.fmpq_mat(self.m, 1, [flint.fmpq(v.numerator, v.denominator) for v in self.b])
        xB = B.solve(rhs)
        cB = flint.fmpq_mat(self.m, 1, [flint.fmpq(cost[j].numerator, cost[j].denominator) for j in basis])
        y = B.transpose().solve(cB)
        return B, [_to_fraction(xB[i, 0]) for i in range(self.m)], [_to_fraction(y[i, 0]) for i in range(self.m)]

    def complete_basis(self, chosen: list) -> list:
        """Independent subset of ``chosen`` padded with artificial columns."""
        m = self.m
        if m == 0:
            return []
        M = flint.fmpq_mat(m, len(chosen) + m)
        for k, j in enumerate(chosen):
            for i, v in self.cols[j].items():
                M[i, k] = v
        for i in range(m):
            M[i, len(chosen) + i] = 1
        R, rank = M.rref()
        pivots = []
        col = 0
        for r in range(rank):
            while R[r, col] == 0:
                col += 1
            pivots.append(col)
            col += 1
        return [chosen[c] if c < len(chosen) else self.n + (c - len(chosen)) for c in pivots]

    def run(self, basis: list, cost: list, phase: int):
        """Pivot to optimality from a primal feasible basis."""
        m = self.m
        degenerate = 0
        while True:
            B, xB, y = self._solve(basis, cost)
            inbasis = set(basis)
            limit = self.n + (self.m if phase == 1 else 0)
            enter = self._price(y, cost, inbasis, limit)
            if enter is None:
                return basis, xB, y
            if self.iterations >= self.max_iter:
                raise _IterationLimit()
            a = flint.fmpq_mat(m, 1)
            for i, v in self.cols[enter].items():
                a[i, 0] = v
            dcol = [_to_fraction(v) for v in B.solve(a).entries()]
            leave = None
            ratio = None
            for k in range(m):
                dk = dcol[k]
                if phase == 2 and self.is_art(basis[k]) and dk != 0:
                    r = Fraction(0)
                elif dk > 0:
                    r = xB[k] / dk
                else:
                    continue
                if ratio is None or r < ratio or (r == ratio and basis[k] < basis[leave]):
                    ratio, leave = r, k
            if leave is None:
                raise RuntimeError("unbounded LP (objective is bounded below; this is a bug)")
            if ratio == 0:
                degenerate += 1
                if degenerate > self.max_degenerate:
                    self.bland = True
            else:
                degenerate = 0
            basis = basis[:leave] + [enter] + basis[leave + 1:]
            self.iterations += 1


def solve_standard_form(cols: list, b: list, cost: list, crash: Optional[tuple] = None):
    """Exact optimum of min cost.x, A x = b, x >= 0. Returns
    (status, x dict, y list, iterations). ``crash`` is (columns, float dual)
    from a floating point solve; it only chooses where to start."""
    sx = _Simplex(cols, b, cost)
    m, n = sx.m, sx.n
    if m == 0:
        return "optimal", {}, [], 0
    basis = None
    if crash:
        cand = sx.complete_basis(list(dict.fromkeys(crash[0])))
        _, xB, yB = sx._solve(cand, sx.cost)
        if all(v >= 0 for v in xB) and all(v == 0 for j, v in zip(cand, xB) if sx.is_art(j)):
            basis = cand
            if sx._price(yB, sx.cost, set(), n) is None:
                return "optimal", _primal(sx, cand, xB), yB, 0
            y = _rounded_dual(sx, crash[1], cand, xB)
            if y is not None:
                return "optimal", _primal(sx, cand, xB), y, 0
    try:
        if basis is None:
            c1 = [Fraction(0)] * n + [Fraction(1)] * m
            basis, xB, _ = sx.run([n + i for i in range(m)], c1, phase=1)
            if sum((v for j, v in zip(basis, xB) if sx.is_art(j)), Fraction(0)) > 0:
                return "infeasible", None, None, sx.iterations
        basis, xB, y = sx.run(basis, sx.cost, phase=2)
    except _IterationLimit:
        return "iteration-limit", None, None, sx.iterations
    return "optimal", _primal(sx, basis, xB), y, sx.iterations


def _primal(sx, basis, xB) -> dict:
    return {j: v for j, v in zip(basis, xB) if not sx.is_art(j) and v != 0}


def _rounded_dual(sx, y_float, basis, xB):
    """Round the floating point dual to nearby rationals and accept it only
    if it is exactly dual feasible and closes the gap with the primal."""
    if y_float is None:
        return None
    primal = sum((sx.cost[j] * v for j, v in zip(basis, xB)), Fraction(0))
    for bound in (12, 60, 720, 5040, 10 ** 5, 10 ** 7):
        y = [Fraction(float(v)).limit_denominator(bound) for v in y_float]
        if sum((bi * yi for bi, yi in zip(sx.b, y)), Fraction(0)) != primal:
            continue
        if sx._price(y, sx.cost, set(), sx.n) is None:
            return y
    return None


def _float_crash(cols, b, n_struct):
    m = len(b)
    if n_struct == 0:
        return None
    rows, cidx, vals = [], [], []
    for j, col in enumerate(cols):
        for i, v in col.items():
            rows.append(i)
            cidx.append(j)
            vals.append(float(v))
    A = csc_matrix((vals, (rows, cidx)), shape=(m, n_struct))
    try:
        res = linprog(np.ones(n_struct), A_eq=A, b_eq=np.array([float(v) for v in b]),
                      bounds=(0, None), method="highs-ds")
    except Exception as exc:  # pragma: no cover - solver failure falls back to exact phase 1
        log.debug("float crash failed: %s", exc)
        return None
    if res.status != 0:
        return None
    pos = [j for j in range(n_struct) if res.x[j] > 1e-9]
    return pos, np.asarray(res.eqlin.marginals)


def solve_min_l1(problem: FillProblem, use_crash: bool = True) -> LpSolution:
    rows = problem.rows
    ridx = {w: i for i, w in enumerate(rows)}
    base = problem.columns()
    cols = []
    for col in base:
        cols.append({ridx[w]: v for w, v in col.items()})
    for col in base:
        cols.append({ridx[w]: -v for w, v in col.items()})
    b = [problem.target[w] for w in rows]
    cost = [1] * len(cols)
    if not problem.target:
        sol = LpSolution("optimal", Fraction(0), Chain2([], problem.target.rank), {})
        return sol
    crash = _float_crash(cols, b, len(cols)) if use_crash else None
    status, x, y, its = solve_standard_form(cols, b, cost, crash)
    if status == "iteration-limit":
        return LpSolution(status, iterations=its, notes=["exact simplex stopped at its iteration limit"])
    if status != "optimal":
        return LpSolution("infeasible", iterations=its,
                          notes=["truncation insufficient: target not in the span of the support boundaries"])
    k = len(base)
    terms = []
    for j, v in x.items():
        pair = problem.support[j % k]
        terms.append((pair, v if j < k else -v))
    primal = Chain2(terms, problem.target.rank)
    dual = {w: y[i] for i, w in enumerate(rows) if y[i] != 0}
    sol = LpSolution("optimal", primal.l1(), primal, dual, its)
    if not verify_solution(problem, sol):
        raise RuntimeError("exact LP solution failed its own certificate check")
    return sol


def verify_solution(problem: FillProblem, solution: LpSolution) -> bool:
    """Replay every certificate condition with fresh exact arithmetic."""
    if solution.status != "optimal":
        return False
    primal = solution.primal
    support = set(problem.support)
    for key in primal.keys():
        if key not in support:
            return False
    if boundary(primal) != problem.target:
        return False
    if primal.l1() != Fraction(solution.value):
        return False
    if not is_prime_support(problem.pair, primal):
        return False
    psi = {w: Fraction(v) for w, v in solution.dual.items()}
    for g1, g2 in problem.support:
        s = Fraction(0)
        for w, sg in pair_boundary(g1, g2):
            s += sg * psi.get(w, 0)
        if abs(s) > 1:
            return False
    return dual_pairing(psi, problem.target) == Fraction(solution.value)
