"""Acceptance criteria 1-11. Each test records one pass/fail line that is
printed in the terminal summary."""
import random
from fractions import Fraction

import pytest

from mixscl.chains import Chain1, boundary, witness_chain2, pair_boundary
from mixscl.circle import CircleLift, translation_number
from mixscl.commutators import Budget, cl_upper_search, lemma26_decompose
from mixscl.lp import FillProblem, build_support, dual_pairing, solve_min_l1, verify_solution
from mixscl.pairs import GroupPair, QuotientSpec, mixed_class
from mixscl.qm import (CountingQm, auto_certificates, counting_on_N, defect_counting,
                       extend_N_quasimorphism, extend_virtual_section, invariant_average,
                       make_certificate, restrict_to_N)
from mixscl.scl import Params, _pool_pairs, compare_plain_mixed, sandwich
from mixscl.surfaces import (SURGERY_DELTAS, _fill_disc, _loop_at_new_vertex,
                             build_from_decomposition, chi_ratio, invariants, split_boundary,
                             surface_for_chain, validate)
from mixscl.commutators import cl_chain_upper
from mixscl.words import Alphabet, Word, _comm, _cyclic, _inv, _mul, words_up_to
from oracles import all_reduced, comm, free_reduce, frozen_defect, lemma26_target

A1 = Alphabet(1)
A2 = Alphabet(2)
PLAIN = GroupPair.trivial(2)
Z2 = GroupPair.cyclic(2, 2, [1, 0])
ZZ = GroupPair.integers([[1], [0]])
S3 = GroupPair(A2, QuotientSpec.permutations([[1, 0, 2], [0, 2, 1]]))


def w(t):
    return A2.parse(t)


def ch(*terms):
    return Chain1([(w(t), q) for q, t in terms], 2)


def rand_word(rng, maxlen, minlen=0):
    return A2.word([rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(minlen, maxlen))]).letters


def rand_N(rng, pair, maxlen):
    while True:
        g = rand_word(rng, maxlen)
        if pair.in_N_letters(g):
            return g


# The fixed sandwich suite: seven plain chains and three mixed ones.
SUITE = [
    ("[a,b]", PLAIN, ch((1, "[a,b]"))),
    ("[a,b]^2", PLAIN, ch((1, "[a,b]^2"))),
    ("[a,b][a,b^2]", PLAIN, ch((1, "[a,b][a,bb]"))),
    ("a + b - ab", PLAIN, ch((1, "a"), (1, "b"), (-1, "ab"))),
    ("a + a^-1", PLAIN, ch((1, "a"), (1, "A"))),
    ("ab - ba", PLAIN, ch((1, "ab"), (-1, "ba"))),
    ("2 [a,b]", PLAIN, ch((2, "[a,b]"))),
    ("Z/2: [a,b]", Z2, ch((1, "[a,b]"))),
    ("Z/2: [a,b^2]", Z2, ch((1, "[a,bb]"))),
    ("Z: [a,b]", ZZ, ch((1, "[a,b]"))),
]


@pytest.fixture(scope="module")
def suite_results():
    return {name: sandwich(pair, c, Params()) for name, pair, c in SUITE}


def test_criterion_01_commutator_identity(criterion):
    with criterion(1, "n-commutator identity exact for 20 random pairs, n = 1..4"):
        rng = random.Random(2024)
        for _ in range(20):
            g1 = A2.word(rand_word(rng, 4))
            g2 = A2.word(rand_word(rng, 4))
            for n in (1, 2, 3, 4):
                dec = lemma26_decompose(g1, g2, n)
                assert dec.k == n
                prod = ()
                for g, x in dec.pairs:
                    prod = free_reduce(prod + comm(g.letters, x.letters))
                assert prod == lemma26_target(g1.letters, g2.letters, n)


def test_criterion_02_witness_norm(criterion):
    with criterion(2, "witness 2-chains: boundary exact, l1 <= 4k - 1, single <= 3"):
        rng = random.Random(11)
        for pair in (PLAIN, Z2, S3):
            for k in range(1, 6):
                for _ in range(20):
                    dec = [(A2.word(rand_word(rng, 4)), A2.word(rand_N(rng, pair, 4))) for _ in range(k)]
                    wc, y = witness_chain2(pair, dec)
                    assert boundary(wc) == Chain1([(y, 1)], 2)
                    assert wc.l1() <= 4 * k - 1
                    if k == 1:
                        assert wc.l1() <= 3
                    assert all(pair.in_N_letters(a.letters) or pair.in_N_letters(b.letters)
                               for a, b in wc.keys())


def _lp_instances():
    out = []
    for name, pair, c in SUITE:
        extra = _pool_pairs(pair, [t if q > 0 else ~t for t, q in c.items()], 2)
        out.append((name, FillProblem(c, build_support(pair, 2, extra), pair)))
    wit, _ = witness_chain2(PLAIN, [(w("a"), w("b"))])
    out.append(("[a,b] witness support", FillProblem(ch((1, "[a,b]")),
                                                     build_support(PLAIN, 2, list(wit.keys())), PLAIN)))
    return out


def test_criterion_03_lp_duality(criterion):
    with criterion(3, "exact LP: primal = dual pairing, |psi(d pair)| <= 1, verified; [a,b] optimum <= 3"):
        solved = 0
        for name, prob in _lp_instances():
            sol = solve_min_l1(prob)
            if sol.status != "optimal":
                continue
            solved += 1
            assert dual_pairing(sol.dual, prob.target) == sol.value, name
            for g1, g2 in prob.support:
                assert abs(sum(s * sol.dual.get(x, 0) for x, s in pair_boundary(g1, g2))) <= 1
            assert verify_solution(prob, sol), name
            if name == "[a,b] witness support":
                assert sol.value <= 3
        assert solved >= 8


def test_criterion_04_sandwich(criterion, suite_results):
    with criterion(4, "sandwich lower <= upper on 10 chains; [a,b] within [1/(2D(phi_ab)), 2/3]"):
        for name, _, _ in SUITE:
            b = suite_results[name]
            assert not b.infinite, name
            assert b.upper is not None, name
            assert b.lower <= b.upper, name
        d, _ = defect_counting(CountingQm.single((1, 2), 2))
        b = suite_results["[a,b]"]
        assert b.lower >= 1 / (2 * d) > 0
        found = cl_upper_search(PLAIN, w("[a,b]^3"), Budget(2, 5, 0))
        if found is not None and found.k <= 2:
            assert b.upper <= Fraction(2, 3)
        else:
            assert b.upper <= 1


def test_criterion_05_defects(criterion):
    with criterion(5, "junction defect = brute force for |w| <= 3; certified bounds hold on 10^4 pairs"):
        words = [u for u in all_reduced(2, 3) if u]
        qs = {}
        for u in words:
            q = CountingQm.single(u, 2)
            d, kind = defect_counting(q)
            assert kind == "exact" and d == frozen_defect(u), u
            qs[u] = (q, make_certificate(q))
        rng = random.Random(5)
        pairs = [(rand_word(rng, 8), rand_word(rng, 8)) for _ in range(10_000)]
        for u, (q, cert) in qs.items():
            hom = {}

            def h(g):
                v = hom.get(g)
                if v is None:
                    v = hom[g] = q.homogeneous(g)
                return v

            worst = max(abs(h(_mul(g1, g2)) - h(g1) - h(g2)) for g1, g2 in pairs)
            assert worst <= cert.defect_upper
            assert worst <= 2 * frozen_defect(u)


def test_criterion_06_homogeneous_calculus(criterion):
    with criterion(6, "eval(g^n) = n eval(g), conjugation invariance, |eval([g1,g2])| <= defect"):
        rng = random.Random(6)
        certs = auto_certificates(PLAIN)
        short = words_up_to(2, 3)
        for cert in certs:
            for _ in range(200):
                g = rand_word(rng, 6)
                h = rand_word(rng, 4)
                n = rng.randint(1, 5)
                core, conj = _cyclic(g)
                gn = _mul(_mul(conj, core * n), _inv(conj))
                assert cert(gn) == n * cert(g)
                assert cert(_mul(_mul(h, g), _inv(h))) == cert(g)
            for g1 in short:
                for g2 in short:
                    assert abs(cert(_comm(g1, g2))) <= cert.defect_upper


def _mus():
    return [
        restrict_to_N(Z2, make_certificate(CountingQm.single((1, 2), 2))),
        invariant_average(Z2, counting_on_N(Z2, {(1, 2): 1})),
    ]


def test_criterion_07_extensions(criterion):
    with criterion(7, "N-extension meets both D'' bounds; virtual extension restricts to mu, defect <= 2 D_N"):
        gs = words_up_to(2, 4)
        xs = [x for x in gs if Z2.in_N_letters(x)]
        for mu in _mus():
            psi = extend_N_quasimorphism(Z2, mu, tail={1: Fraction(1, 3)})
            D = mu.defect_upper
            pv = {g: psi(g) for g in gs}
            for g in gs:
                for x in xs:
                    assert abs(psi(_mul(g, x)) - pv[g] - pv[x]) <= D
                    assert abs(psi(_mul(x, g)) - pv[x] - pv[g]) <= D
            ext = extend_virtual_section(Z2, mu)
            rng = random.Random(7)
            for _ in range(100):
                x = rand_N(rng, Z2, 8)
                assert ext(x) == mu(x)
            for _ in range(10_000):
                g1, g2 = rand_word(rng, 6), rand_word(rng, 6)
                assert abs(ext(_mul(g1, g2)) - ext(g1) - ext(g2)) <= 2 * D


def test_criterion_08_surfaces(criterion):
    with criterion(8, "genus-k surfaces valid with chi = 1 - 2k; surgery deltas; chi_ratio 1/2"):
        for k in (1, 2, 3):
            dec = lemma26_decompose(w("ab"), w("B"), k)
            S = build_from_decomposition(PLAIN, dec)
            assert validate(PLAIN, S) == []
            inv = invariants(S)
            assert inv["genus"] == [k] and inv["boundary_count"] == 1
            assert inv["boundary_words"] == [dec.target]
            assert S.n_vertices - len(S.edges) + len(S.triangles) == 1 - 2 * k

        def summ(S):
            inv = invariants(S)
            return inv["euler"], inv["boundary_count"], sum(inv["genus"])

        def delta(S, T):
            assert validate(PLAIN, T) == []
            return tuple(b - a for a, b in zip(summ(S), summ(T)))

        base = build_from_decomposition(PLAIN, [(w("a"), w("b"))])
        t = split_boundary(base, {"op": "split", "label": w("[a,b]"), "pieces": [w("a"), w("A")],
                                  "conjugators": [w("e"), w("b")]})
        assert delta(base, t) == SURGERY_DELTAS["split"](2)
        three = split_boundary(base, {"op": "split", "label": w("[a,b]"),
                                      "pieces": [w("a"), w("b"), w("AB")]})
        assert delta(base, three) == SURGERY_DELTAS["split"](3)
        assert delta(t, split_boundary(t, {"op": "conjugate", "label": w("A"), "h": w("a"),
                                           "x": w("A")})) == SURGERY_DELTAS["conjugate"](None)
        assert delta(t, split_boundary(t, {"op": "cap", "label": w("a")})) == SURGERY_DELTAS["cap"](None)
        dec2 = cl_upper_search(PLAIN, w("[a,b]^2"), Budget(2, 3, 0))
        two = split_boundary(build_from_decomposition(PLAIN, dec2),
                             {"op": "split", "label": w("[a,b]^2"), "pieces": [w("[a,b]"), w("[a,b]")]})
        assert delta(two, split_boundary(two, {"op": "merge", "label": w("[a,b]"), "copies": 2})) \
            == SURGERY_DELTAS["merge"](2)
        cone = build_from_decomposition(PLAIN, [])
        filled = cone.copy()
        _fill_disc(filled, _loop_at_new_vertex(filled, filled.boundary_edges()[0][0]))
        assert delta(cone, filled) == SURGERY_DELTAS["fill"](None)
        dec1 = cl_chain_upper(PLAIN, ch((1, "[a,b]")), Budget(1, 1, 0))
        assert chi_ratio(surface_for_chain(PLAIN, dec1, 1)) == Fraction(1, 2)


def test_criterion_09_mixed_class(criterion):
    with criterion(9, "random mixed commutator products have zero class; class(a^2) != 0"):
        rng = random.Random(9)
        for pair in (Z2, S3):
            for _ in range(1000):
                y = ()
                for _ in range(rng.randint(1, 3)):
                    y = _mul(y, _comm(rand_word(rng, 4), rand_N(rng, pair, 5)))
                assert not any(mixed_class(pair, Word(y, 2)))
        p1 = GroupPair.cyclic(1, 2, [1])
        assert any(mixed_class(p1, A1.parse("aa")))


def _random_lift(rng):
    k = rng.randint(0, 3)
    xs = sorted({Fraction(rng.randint(1, 19), 20) for _ in range(k)})
    y0 = Fraction(rng.randint(-30, 30), 20)
    ys = sorted({Fraction(rng.randint(1, 39), 40) for _ in range(len(xs))})
    while len(ys) < len(xs):
        xs.pop()
    pts = [(Fraction(0), y0)] + [(x, y0 + y) for x, y in zip(xs, ys)] + [(Fraction(1), y0 + 1)]
    return CircleLift.from_points(pts)


def test_criterion_10_translation_number(criterion):
    with criterion(10, "rational rotations exact for q <= 50; |rot(h1h2) - rot(h1) - rot(h2)| <= 1 + slack"):
        f = CircleLift.from_points([(0, 0), (Fraction(1, 3), Fraction(1, 7)), (1, 1)])
        f_inv = CircleLift.from_points([(0, 0), (Fraction(1, 7), Fraction(1, 3)), (1, 1)])
        for q in range(1, 51):
            for p in range(-q, 2 * q + 1):
                if Fraction(p, q).denominator != q:
                    continue
                R = CircleLift.translation(Fraction(p, q))
                for h in (R, f * R * f_inv) if q <= 12 else (R,):
                    lo, hi, exact = translation_number(h)
                    assert exact and lo == hi == Fraction(p, q)
        rng = random.Random(10)
        for _ in range(100):
            h1, h2 = _random_lift(rng), _random_lift(rng)
            l1, u1, _ = translation_number(h1, 400)
            l2, u2, _ = translation_number(h2, 400)
            l3, u3, _ = translation_number(h1 * h2, 400)
            slack = (u1 - l1) + (u2 - l2) + (u3 - l3)
            assert max(abs(l3 - u1 - u2), abs(u3 - l1 - l2)) <= 1 + slack


def test_criterion_11_comparison(criterion):
    with criterion(11, "plain/mixed comparison never falsified on the mixed suite items"):
        for name, pair, c in SUITE:
            if pair.is_plain:
                continue
            (y, _), = c.items()
            rep = compare_plain_mixed(pair, y, Params())
            assert rep["lower_G_le_upper_GN"] and rep["lower_GN_le_2_upper_G"], name
