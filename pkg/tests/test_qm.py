import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mixscl.pairs import GroupPair
from mixscl.qm import (CountingQm, auto_certificates, count_subword, counting_on_N,
                       defect_bruteforce, defect_counting, extend_N_quasimorphism,
                       extend_virtual_section, homogenize_by_periods, invariant_average,
                       make_certificate, quasi_invariance_sample, restrict_to_N)
from mixscl.words import Alphabet, _comm, _cyclic, _inv, _mul
from oracles import all_reduced, brute_defects, frozen_defect, naive_homogenized, naive_phi

A2 = Alphabet(2)
Z2 = GroupPair.cyclic(2, 2, [1, 0])
raw = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8).map(lambda r: A2.word(r).letters)


def test_count_subword():
    assert count_subword((1, 1), (1, 1, 1)) == 2
    assert count_subword((1, 2), ()) == 0
    with pytest.raises(ValueError):
        count_subword((), (1,))


@pytest.mark.parametrize("w", [w for w in all_reduced(2, 3) if w])
def test_junction_defect_matches_frozen_bruteforce(w):
    d, kind = defect_counting(CountingQm.single(w, 2))
    assert kind == "exact"
    assert d == frozen_defect(w)


def test_frozen_table_spot_check():
    # cheap re-derivation at total length 6 for a few words
    words = [(1, 2), (1, 1, 1), (1, 2, -1)]
    got = brute_defects(words, total=6)
    assert got == [frozen_defect(w) for w in words]


def test_combination_defect_against_package_bruteforce():
    q = CountingQm({(1, 2): Fraction(1, 2), (2, 1): Fraction(-1, 2)}, 2)
    d, _ = defect_counting(q)
    assert d == defect_bruteforce(q, 7)


@given(raw)
def test_raw_matches_naive(g):
    for w in [(1,), (1, 2), (1, -2, -1)]:
        assert CountingQm.single(w, 2).raw(g) == naive_phi(w, g)


@given(raw)
def test_homogeneous_matches_limit(g):
    core, _ = _cyclic(g)
    for w in [(1, 2), (1, 1, 2)]:
        q = CountingQm.single(w, 2)
        assert abs(q.homogeneous(g) - naive_homogenized(w, core)) <= Fraction(frozen_defect(w), 64)
        assert q.homogeneous(g) == homogenize_by_periods(q, A2.word(g))


@given(raw, st.integers(1, 5))
def test_homogeneity(g, n):
    q = CountingQm.single((1, 2, -1), 2)
    core, conj = _cyclic(g)
    gn = _mul(_mul(conj, core * n), _inv(conj))
    assert q.homogeneous(gn) == n * q.homogeneous(g)
    assert q.homogeneous(_inv(g)) == -q.homogeneous(g)


def test_certificate_bounds_homogeneous_defect():
    rng = random.Random(3)
    for w in [(1, 2), (1, 1, 2), (1, 2, -1)]:
        cert = make_certificate(CountingQm.single(w, 2))
        assert cert.defect_upper == 2 * frozen_defect(w)
        for _ in range(500):
            g = A2.word([rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 8))]).letters
            h = A2.word([rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 8))]).letters
            assert abs(cert(_mul(g, h)) - cert(g) - cert(h)) <= cert.defect_upper


def test_certificate_dprime_variant():
    cert = make_certificate(CountingQm.single((1, 2), 2), dprime=0)
    assert cert.defect_upper == 1


def test_auto_certificates_plain_and_mixed():
    plain = auto_certificates(GroupPair.trivial(2))
    assert plain and all(c.domain == "G" for c in plain)
    mixed = auto_certificates(Z2, n_maxlen=1)
    assert all(c.domain == "N" and c.invariance == "G-invariant-on-N" for c in mixed)
    with pytest.raises(ValueError):
        mixed[0]((1,))


def test_invariant_average_is_invariant():
    mu = invariant_average(Z2, counting_on_N(Z2, {(1, 2): 1}))
    rng = random.Random(5)
    for _ in range(100):
        x = A2.word([rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 6))]).letters
        if not Z2.in_N_letters(x):
            continue
        for g in [(1,), (2,), (1, 2)]:
            assert mu(_mul(_mul(g, x), _inv(g))) == mu(x)


def test_quasi_invariance_sample_is_zero_for_restrictions():
    # raw counting is not conjugation invariant, so the sample is positive
    assert quasi_invariance_sample(Z2, CountingQm.single((1, 2), 2), samples=200) > 0


def test_extension_requires_invariance():
    bare = counting_on_N(Z2, {(1, 2): 1})
    with pytest.raises(ValueError):
        extend_N_quasimorphism(Z2, bare)
    with pytest.raises(ValueError):
        extend_N_quasimorphism(Z2, invariant_average(Z2, bare), tail={0: 1})


def test_extension_values():
    mu = restrict_to_N(Z2, make_certificate(CountingQm.single((1, 2), 2)))
    psi = extend_N_quasimorphism(Z2, mu, tail={1: Fraction(1, 3)})
    assert psi((2,)) == 0
    assert psi((1,)) == Fraction(1, 3) + mu(_mul(_inv(Z2.set_section(1)), (1,)))
    ext = extend_virtual_section(Z2, mu)
    assert ext.defect_upper == 2 * mu.defect_upper
    for x in [(2,), (1, 1), (1, 2, -1), _comm((1,), (2,))]:
        assert ext(x) == mu(x)


def test_virtual_extension_infinite_quotient_interval():
    pz = GroupPair.integers([[1], [0]], section={"subgroup_gens": [[1]], "lifts": ["a"]})
    mu = restrict_to_N(pz, make_certificate(CountingQm.single((1, 2), 2)))
    ext = extend_virtual_section(pz, mu)
    assert ext((2,)) == mu((2,))
    lo, hi = ext.base.interval((1, 2), n=32)
    assert lo <= hi and hi - lo == 2 * mu.defect_upper / 32
    with pytest.raises(ValueError):
        ext((1, 2))
