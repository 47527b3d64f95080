import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpai.automata import Alphabet, equivalent, is_conforming
from qpai.rpni import build_pta, rpni
from qpai.samples import Sample, gen_characteristic, gen_random, tomita

AB = Alphabet(("a", "b"))


def test_pta_single_word():
    pta = build_pta(Sample.from_strings([("a", True)], AB))
    assert len(pta) == 2
    assert pta.labels == (None, True)


def test_pta_empty_word():
    pta = build_pta(Sample.from_strings([("", True)], AB))
    assert len(pta) == 1 and pta.labels == (True,)


def test_pta_prefix_labels():
    pta = build_pta(Sample.from_strings([("ab", True), ("a", False)], AB))
    assert pta.prefixes == ((), (0,), (0, 1))
    assert pta.labels == (None, False, True)
    assert pta.children[0] == {0: 1} and pta.children[1] == {1: 2}


def test_rpni_single_positive():
    s = Sample.from_strings([("aa", True)], AB)
    dfa = rpni(s)
    assert dfa.accepts((0, 0))
    assert is_conforming(dfa, s)


def test_rpni_all_negative():
    s = Sample.from_strings([("a", False), ("ab", False), ("", False)], AB)
    assert rpni(s).accepting == frozenset()


@pytest.mark.parametrize("k", range(1, 8))
def test_rpni_identifies_tomita(k):
    target = tomita(k)
    dfa = rpni(gen_characteristic(target, Alphabet.binary()))
    assert equivalent(dfa, target)[0]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(0, 60), st.integers(0, 10_000))
def test_rpni_always_conforms(k, count, seed):
    sample = gen_random(tomita(k), count, 7, seed)
    assert is_conforming(rpni(sample), sample)
