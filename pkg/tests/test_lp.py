from fractions import Fraction

import pytest

from mixscl.chains import Chain1, pair_boundary, witness_chain2
from mixscl.lp import (FillProblem, LpSolution, build_support, dual_pairing, solve_min_l1,
                       solve_standard_form, verify_solution)
from mixscl.pairs import GroupPair
from mixscl.words import Alphabet

A2 = Alphabet(2)
P = GroupPair.trivial(2)
Z2 = GroupPair.cyclic(2, 2, [1, 0])


def w(t):
    return A2.parse(t)


def check(problem, sol):
    assert sol.status == "optimal"
    assert verify_solution(problem, sol)
    assert dual_pairing(sol.dual, problem.target) == sol.value
    for g1, g2 in problem.support:
        assert abs(sum(s * sol.dual.get(x, 0) for x, s in pair_boundary(g1, g2))) <= 1


def test_standard_form_small():
    # min x0 + x1 st x0 - x1 = 2, x >= 0
    status, x, y, _ = solve_standard_form([{0: 1}, {0: -1}], [2], [1, 1])
    assert status == "optimal" and x == {0: 2} and y == [1]
    status, *_ = solve_standard_form([{0: 1}], [-1], [1])
    assert status == "infeasible"


def test_standard_form_with_and_without_crash():
    cols = [{0: 1, 1: 1}, {0: 1}, {1: 1}, {0: 2, 1: 1}]
    b = [Fraction(3), Fraction(2)]
    cost = [2, 1, 1, 2]
    a = solve_standard_form(cols, b, cost)
    v = sum(cost[j] * q for j, q in a[1].items())
    assert a[0] == "optimal" and v == Fraction(7, 2)


def test_support_ball():
    sup = build_support(P, 1)
    # |g1|,|g2|,|g1g2| <= 1 : (e,e), (e,x), (x,e), (x,x^-1)
    assert len(sup) == 1 + 4 + 4 + 4
    mixed = build_support(Z2, 2)
    assert all(Z2.in_N_letters(a.letters) or Z2.in_N_letters(b.letters) for a, b in mixed)
    with pytest.raises(ValueError):
        build_support(Z2, 1, extra=[(w("a"), w("a"))])


def test_commutator_with_witness_support_at_most_3():
    c = Chain1([(w("[a,b]"), 1)], 2)
    wit, _ = witness_chain2(P, [(w("a"), w("b"))])
    prob = FillProblem(c, build_support(P, 2, list(wit.keys())), P)
    sol = solve_min_l1(prob)
    check(prob, sol)
    assert sol.value <= 3
    # without crash the pure exact simplex reaches the same optimum
    sol2 = solve_min_l1(prob, use_crash=False)
    assert sol2.value == sol.value


def test_truncation_insufficient_is_infeasible():
    c = Chain1([(w("[a,b]^2"), 1)], 2)
    prob = FillProblem(c, build_support(P, 1), P)
    assert solve_min_l1(prob).status == "infeasible"


def test_mixed_lp():
    c = Chain1([(w("[a,b]"), 1)], 2)
    wit, _ = witness_chain2(Z2, [(w("a"), w("b"))])
    prob = FillProblem(c, build_support(Z2, 2, list(wit.keys())), Z2)
    sol = solve_min_l1(prob)
    check(prob, sol)


def test_verify_rejects_tampering():
    c = Chain1([(w("[a,b]"), 1)], 2)
    wit, _ = witness_chain2(P, [(w("a"), w("b"))])
    prob = FillProblem(c, build_support(P, 2, list(wit.keys())), P)
    sol = solve_min_l1(prob)
    bad = LpSolution("optimal", sol.value - 1, sol.primal, sol.dual)
    assert not verify_solution(prob, bad)
    bad = LpSolution("optimal", sol.value, sol.primal, {k: 2 * v for k, v in sol.dual.items()})
    assert not verify_solution(prob, bad)
    assert not verify_solution(prob, LpSolution("infeasible"))


def test_empty_target():
    prob = FillProblem(Chain1([], 2), build_support(P, 1), P)
    assert solve_min_l1(prob).value == 0


def test_json():
    c = Chain1([(w("[a,b]"), 1)], 2)
    wit, _ = witness_chain2(P, [(w("a"), w("b"))])
    prob = FillProblem(c, build_support(P, 2, list(wit.keys())), P)
    out = solve_min_l1(prob).to_json()
    assert out["status"] == "optimal" and Fraction(out["value"]) <= 3
