import pytest
from hypothesis import given, strategies as st

from mixscl.words import (Alphabet, Word, commutator, cyclic_reduce, format_word, inverse,
                          multiply, parse_word, power, reduce, words_up_to)
from oracles import all_reduced, free_reduce

A2 = Alphabet(2)
raw_words = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12)


def w(text, alpha=A2):
    return alpha.parse(text)


@pytest.mark.parametrize("text,letters", [
    ("a", (1,)), ("B", (-2,)), ("[a,b]", (1, 2, -1, -2)), ("a^3", (1, 1, 1)),
    ("(ab)^-1", (-2, -1)), ("e", ()), ("1", ()), ("aA", ()), ("x1 x2", (1, 2)),
    ("[a,b]^2", (1, 2, -1, -2) * 2), ("a^-2", (-1, -1)), ("(ab)^0", ()),
])
def test_parse(text, letters):
    assert w(text).letters == letters


@pytest.mark.parametrize("text,col", [("a(b", 4), ("ac", 2), ("a^", 2), ("[a,b", 5)])
def test_parse_errors_carry_column(text, col):
    with pytest.raises(ValueError, match=f"column {col}"):
        w(text)


def test_rank_five_uses_letter_e():
    A5 = Alphabet(5)
    assert A5.parse("e").letters == (5,)
    assert A5.parse("1").letters == ()
    assert format_word(A5.identity) == "1"
    assert format_word(A2.identity) == "e"


def test_format_roundtrip():
    for u in words_up_to(2, 4):
        g = Word(u, 2)
        assert w(str(g)) == g


def test_words_up_to_counts():
    # 1 + sum 4 * 3^(k-1)
    assert len(words_up_to(2, 3)) == 1 + 4 + 12 + 36
    assert words_up_to(2, 3) == sorted(words_up_to(2, 3), key=lambda u: Word(u, 2).sort_key())
    assert set(words_up_to(2, 4)) == set(all_reduced(2, 4))
    assert all(len(u) >= 2 for u in words_up_to(2, 3, minlen=2))


@given(raw_words)
def test_reduce_matches_oracle(raw):
    assert reduce(A2, raw).letters == free_reduce(raw)


@given(raw_words, raw_words, raw_words)
def test_group_axioms(x, y, z):
    g, h, k = reduce(A2, x), reduce(A2, y), reduce(A2, z)
    assert (g * h) * k == g * (h * k)
    assert g * ~g == A2.identity
    assert inverse(g * h) == inverse(h) * inverse(g)
    prod, cancel = multiply(g, h)
    assert prod == g * h
    assert len(prod) == len(g) + len(h) - 2 * cancel


@given(raw_words, st.integers(-4, 4))
def test_power(x, n):
    g = reduce(A2, x)
    expect = A2.identity
    for _ in range(abs(n)):
        expect = expect * (g if n > 0 else ~g)
    assert power(g, n) == expect == g ** n


@given(raw_words)
def test_cyclic_reduce(x):
    g = reduce(A2, x)
    core, conj = cyclic_reduce(g)
    assert conj * core * ~conj == g
    if len(core) > 1:
        assert core.letters[0] != -core.letters[-1]


def test_commutator():
    assert commutator(w("a"), w("b")) == w("abAB")
    assert commutator(w("a"), w("a")) == A2.identity


def test_rank_mismatch():
    with pytest.raises(ValueError):
        multiply(w("a"), Alphabet(3).parse("c"))
    with pytest.raises(ValueError):
        A2.parse("c")


def test_exponent_sums():
    assert w("[a,b]").exponent_sums() == [0, 0]
    assert w("aab").exponent_sums() == [2, 1]


def test_parse_word_function():
    assert parse_word(A2, " a b ") == w("ab")
