import pytest
from hypothesis import given, strategies as st

from conftest import ABAC, BATMAN
from collections import Counter
from closeocc.oracle import (
    ConsecutivePair,
    oracle_consecutive,
    oracle_gap,
    oracle_nonoverlap,
    oracle_occurrences,
    oracle_topk,
    oracle_topk_far,
)


def test_occurrence_examples():
    assert oracle_occurrences(BATMAN, b"AN") == [4, 7, 11, 22, 24, 26, 30, 39, 41]
    assert oracle_occurrences(ABAC, b"A") == [0, 2, 4, 6, 9, 12, 15, 18]
    assert oracle_occurrences(b"AB", b"ABC") == []
    with pytest.raises(ValueError):
        oracle_occurrences(b"AB", b"")


def test_consecutive_examples():
    assert oracle_consecutive(ABAC, b"AC") == [(2, 6), (6, 12), (12, 18)]
    assert Counter(p.distance for p in oracle_consecutive(BATMAN, b"A")) == Counter({2: 6, 3: 3, 4: 2, 5: 1, 8: 1})
    assert oracle_consecutive(BATMAN, b"BATMAN") == []


def test_query_examples():
    assert [p.distance for p in oracle_topk(BATMAN, b"AN", 5)] == [2, 2, 2, 3, 4]
    assert oracle_gap(ABAC, b"A", 3, 3) == [(6, 9), (9, 12), (12, 15), (15, 18)]
    assert oracle_nonoverlap(b"NANANANA", b"NANA") == []
    assert oracle_topk_far(ABAC, b"A", 1) == [(6, 9)]
    with pytest.raises(ValueError):
        oracle_gap(ABAC, b"A", 4, 3)


def test_pair_distance():
    assert ConsecutivePair(3, 10).distance == 7


@given(st.binary(min_size=1, max_size=60).map(lambda b: bytes(65 + x % 3 for x in b)),
       st.binary(min_size=1, max_size=3).map(lambda b: bytes(65 + x % 3 for x in b)))
def test_views_agree(text, pattern):
    full = oracle_consecutive(text, pattern)
    assert oracle_topk(text, pattern, None) == full
    assert oracle_gap(text, pattern, 1, len(text)) == full
    assert sorted(oracle_topk_far(text, pattern, None)) == sorted(full)
    occ = oracle_occurrences(text, pattern)
    assert sorted(tuple(p) for p in full) == list(zip(occ, occ[1:]))
