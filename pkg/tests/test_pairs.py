import random

import pytest

from mixscl.chains import Chain1
from mixscl.pairs import (GroupPair, QuotientSpec, membership_status, mixed_class,
                          smith_normal_form)
from mixscl.words import Alphabet, Word, _comm, _mul, _reduce

A2 = Alphabet(2)


def z2():
    return GroupPair.cyclic(2, 2, [1, 0])


def s3():
    return GroupPair(A2, QuotientSpec.permutations([[1, 0, 2], [0, 2, 1]]))


def test_schreier_rank_formula():
    for pair, index in [(z2(), 2), (s3(), 6), (GroupPair.cyclic(2, 3, [1, 1]), 3)]:
        assert pair.schreier.rank == (2 - 1) * index + 1


@pytest.mark.parametrize("pair", [z2(), s3()])
def test_rewrite_expand_roundtrip(pair):
    rng = random.Random(1)
    sch = pair.schreier
    for _ in range(200):
        raw = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 10))]
        g = _reduce(raw)
        if not pair.in_N_letters(g):
            continue
        assert sch.expand(sch.rewrite(g)) == g


def test_rewrite_rejects_outside_N():
    with pytest.raises(ValueError):
        z2().schreier.rewrite((1,))


def test_smith_normal_form():
    diag, Q = smith_normal_form([[2, 4], [6, 8]], 2)
    assert sorted(abs(d) for d in diag if d) == [2, 4]
    diag, _ = smith_normal_form([[1, -1], [0, 0]], 2)
    assert [abs(d) for d in diag] == [1]


def test_mixed_class_group_invariants():
    # N/[G,N] for F2 -> Z/2 (a -> 1) is free abelian of rank 2
    assert z2().mixed_class_group().invariants == [0, 0]
    # <a> -> Z/2: N = <a^2>, [G,N] = 1
    p1 = GroupPair.cyclic(1, 2, [1])
    assert mixed_class(p1, Alphabet(1).parse("aa")) != (0,) * len(mixed_class(p1, Alphabet(1).parse("aa")))
    assert not any(mixed_class(p1, Alphabet(1).parse("")))


@pytest.mark.parametrize("pair", [z2(), s3()])
def test_mixed_commutators_have_zero_class(pair):
    rng = random.Random(7)
    for _ in range(100):
        y = ()
        for _ in range(rng.randint(1, 3)):
            g = _reduce([rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 4))])
            x = _reduce([rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 4))])
            if not pair.in_N_letters(x):
                s = pair.set_section(pair.image_letters(x))
                x = _mul(x, tuple(-v for v in reversed(s)))
            y = _mul(y, _comm(g, x))
        assert not any(mixed_class(pair, Word(y, 2)))


def test_membership():
    c = Chain1([(A2.parse("[a,b]"), 1)], 2)
    assert membership_status(GroupPair.trivial(2), c).status == "yes"
    bad = Chain1([(A2.parse("bb"), 1)], 2)
    m = membership_status(z2(), bad)
    assert m.status == "no" and "abelianization" in m.obstruction
    with pytest.raises(ValueError):
        membership_status(z2(), Chain1([(A2.parse("a"), 1)], 2))
    # b + (a b^-1 a^-1) is in B1 of G but aba^-1 ~ b only modulo [G,N]
    c2 = Chain1([(A2.parse("b"), 1), (A2.parse("aBA"), 1)], 2)
    assert membership_status(z2(), c2).status == "yes"


def test_membership_infinite_quotient_search():
    pz = GroupPair.integers([[1], [0]])
    c = Chain1([(A2.parse("[a,b]"), 1)], 2)
    from mixscl.commutators import Budget
    assert membership_status(pz, c, search_budget=Budget(1, 2, 0)).status == "yes"
    assert membership_status(pz, c).status == "unknown"


def test_section_and_reps():
    pz = GroupPair.integers([[1], [0]])
    assert pz.set_section((3,)) == (1, 1, 1)
    assert pz.set_section((-1,)) == (-1,)
    reps = z2().coset_reps()
    assert sorted(z2().image_letters(r.letters) for r in reps) == [0, 1]
    with pytest.raises(ValueError):
        GroupPair.integers([[2], [0]]).set_section((1,))


def test_virtual_section_config():
    pz = GroupPair(A2, QuotientSpec.free_abelian([[1], [0]]),
                   section={"subgroup_gens": [[2]], "lifts": ["aa"], "reps": ["e", "a"]})
    assert pz.set_section((3,)) == (1, 1, 1)
    assert pz.set_section((-2,)) == (-1, -1)
    with pytest.raises(ValueError):
        GroupPair(A2, QuotientSpec.free_abelian([[1], [0]]),
                  section={"subgroup_gens": [[1]], "lifts": ["b"], "reps": ["e"]})
    with pytest.raises(ValueError):
        GroupPair(A2, QuotientSpec.free_abelian([[1], [0]]),
                  section={"subgroup_gens": [[2]], "lifts": ["aa"], "reps": ["e"]})


def test_finite_group_validation():
    from mixscl.pairs import FiniteGroup
    with pytest.raises(ValueError):
        FiniteGroup([[0, 1], [0, 1]])
    g, idx = FiniteGroup.from_permutations([[1, 0, 2], [0, 2, 1]])
    assert g.order == 6 and len(idx) == 2


def test_describe():
    d = z2().describe()
    assert d["index"] == 2 and d["N_rank"] == 3
