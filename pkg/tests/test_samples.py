import itertools
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpai.automata import Alphabet, Dfa, equivalent, is_conforming, minimize
from qpai.samples import (Sample, SampleError, count_words, gen_characteristic, gen_random,
                          label_with, load_sample, prefix_closure, read_sample, save_sample,
                          tomita, write_sample)

AB = Alphabet(("a", "b"))
BIN = Alphabet.binary()


def _tomita3(s):
    # reject iff an odd run of 1s is later followed by an odd run of 0s
    odd_one = False
    for run in re.finditer(r"0+|1+", s):
        n = len(run.group())
        if run.group()[0] == "1":
            odd_one = odd_one or n % 2 == 1
        elif odd_one and n % 2 == 1:
            return False
    return True


ORACLES = {
    1: lambda s: re.fullmatch(r"1*", s) is not None,
    2: lambda s: re.fullmatch(r"(10)*", s) is not None,
    3: _tomita3,
    4: lambda s: "000" not in s,
    5: lambda s: s.count("0") % 2 == 0 and s.count("1") % 2 == 0,
    6: lambda s: (s.count("0") - s.count("1")) % 3 == 0,
    7: lambda s: re.fullmatch(r"0*1*0*1*", s) is not None,
}


def all_strings(n):
    for length in range(n + 1):
        for t in itertools.product("01", repeat=length):
            yield "".join(t)


# -- Sample / prefix closure -------------------------------------------------

def test_prefix_closure_single_word():
    s = Sample.from_strings([("ab", True)], AB)
    assert prefix_closure(s) == {(): None, (0,): None, (0, 1): True}


def test_prefix_closure_labeled_prefix():
    s = Sample.from_strings([("a", True), ("ab", False)], AB)
    assert prefix_closure(s) == {(): None, (0,): True, (0, 1): False}


def test_prefix_closure_empty_sample():
    assert prefix_closure(Sample((), AB)) == {}


def test_conflicting_labels_rejected():
    with pytest.raises(SampleError):
        Sample.from_strings([("a", True), ("a", False)], AB)


def test_same_label_duplicates_collapse():
    s = Sample.from_strings([("a", True), ("a", True), ("b", False)], AB)
    assert len(s) == 2
    assert s.positives == [(0,)] and s.negatives == [(1,)]


# -- file format ---------------------------------------------------------------

def test_load_basic():
    s = load_sample("2 2\n1 1 0\n0 1 1\n")
    assert list(s) == [((0,), True), ((1,), False)]
    assert s.alphabet == BIN


def test_load_conflicting_duplicate():
    with pytest.raises(SampleError):
        load_sample("2 2\n1 1 0\n0 1 0\n")


def test_load_empty_body():
    s = load_sample("0 2\n")
    assert len(s) == 0 and len(s.alphabet) == 2


@pytest.mark.parametrize("text", [
    "",
    "2\n1 1 0\n",
    "x 2\n",
    "2 2\n1 1 0\n",               # count mismatch
    "1 2\n1 2 0\n",               # length mismatch
    "1 2\n2 1 0\n",               # bad label
    "1 2\n1 1 7\n",               # unknown symbol
    "1 2\n#alphabet a\n1 1 a\n",  # alphabet line too short
])
def test_load_malformed(text):
    with pytest.raises(SampleError):
        load_sample(text)


def test_load_alphabet_line_and_empty_word():
    s = load_sample("2 2\n#alphabet a b\n1 0\n0 2 b a\n")
    assert s.alphabet == AB
    assert list(s) == [((), True), ((1, 0), False)]


@given(st.lists(st.tuples(st.lists(st.integers(0, 2), max_size=6).map(tuple), st.booleans()),
                max_size=15, unique_by=lambda e: e[0]))
def test_save_load_round_trip(entries):
    s = Sample(tuple(entries), Alphabet.of_size(3))
    assert load_sample(save_sample(s)) == s


def test_custom_alphabet_round_trip(tmp_path):
    s = Sample.from_strings([("ab", True), ("", False)], AB)
    path = tmp_path / "x.sample"
    write_sample(s, path)
    assert read_sample(path) == s


# -- Tomita --------------------------------------------------------------------

def test_tomita_spot_values():
    t1, t4, t5 = tomita(1), tomita(4), tomita(5)
    assert t1(BIN.encode("111")) and not t1(BIN.encode("110"))
    assert not t4(BIN.encode("000")) and t4(BIN.encode("00100"))
    assert t5(()) and not t5(BIN.encode("01"))


@pytest.mark.parametrize("k", range(1, 8))
def test_tomita_matches_oracle(k):
    dfa = tomita(k)
    for s in all_strings(11):
        assert dfa(BIN.encode(s)) == ORACLES[k](s), (k, s)


def test_tomita3_examples():
    t3 = tomita(3)
    for s, y in [("", True), ("1", True), ("10", False), ("110", True), ("1100", True),
                 ("10100", False), ("0110", True), ("11100", True), ("111000", False)]:
        assert t3(BIN.encode(s)) == y, s


@pytest.mark.parametrize("k", [0, 8, -1])
def test_tomita_bad_index(k):
    with pytest.raises(SampleError):
        tomita(k)


# -- label_with / characteristic -----------------------------------------------

def test_label_with_universal():
    s = label_with(Dfa.universal(2), [(), (0,)], AB)
    assert list(s) == [((), True), ((0,), True)]


def test_label_with_empty_list():
    assert len(label_with(Dfa.universal(2), [])) == 0


def test_label_with_tomita1():
    s = label_with(tomita(1), [(1,), (0,)])
    assert list(s) == [((1,), True), ((0,), False)]


def test_characteristic_universal():
    s = gen_characteristic(Dfa.universal(2), AB)
    assert list(s) == [((), True), ((0,), True), ((1,), True)]


def test_characteristic_parity():
    parity = Dfa(((1,), (0,)), {0})
    s = gen_characteristic(parity, Alphabet(("a",)))
    assert ((), True) in s.entries and ((0,), False) in s.entries
    assert is_conforming(parity, s)


@pytest.mark.parametrize("k", range(1, 8))
def test_characteristic_contains_access_and_distinguishing(k):
    dfa = minimize(tomita(k))
    sample = gen_characteristic(dfa, BIN)
    assert is_conforming(dfa, sample)
    words = sample.words
    assert words == sorted(words, key=lambda w: (len(w), w))
    # every state is reached by some word's prefix
    reached = {dfa.step(0, w[:i]) for w in words for i in range(len(w) + 1)}
    assert reached == set(range(dfa.n_states))


# -- random --------------------------------------------------------------------

def test_random_count_zero():
    assert len(gen_random(tomita(1), 0, 5, seed=1)) == 0


def test_random_deterministic():
    a = gen_random(tomita(4), 40, 9, seed=3)
    b = gen_random(tomita(4), 40, 9, seed=3)
    assert a == b
    assert a != gen_random(tomita(4), 40, 9, seed=4)


def test_random_tomita2_labels():
    s = gen_random(tomita(2), 50, 10, seed=7)
    assert len(set(s.words)) == 50
    assert all(len(w) <= 10 for w in s.words)
    for w, y in s:
        assert ORACLES[2](BIN.decode(w)) == y


def test_random_exhausts_space():
    s = gen_random(tomita(1), count_words(2, 3), 3, seed=0)
    assert sorted(s.words) == sorted(tuple(map(int, w)) for w in all_strings(3))


def test_random_too_many():
    with pytest.raises(SampleError):
        gen_random(tomita(1), count_words(2, 3) + 1, 3, seed=0)


def test_random_exclude_is_disjoint():
    train = gen_random(tomita(7), 100, 8, seed=1)
    test = gen_random(tomita(7), 200, 8, seed=2, exclude=train.words)
    assert not set(train.words) & set(test.words)


def test_equivalent_after_relabel():
    # a sample labeled by a target always conforms to that target
    s = gen_random(tomita(6), 80, 10, seed=11)
    assert is_conforming(tomita(6), s)
    assert equivalent(tomita(6), minimize(tomita(6)))[0]
