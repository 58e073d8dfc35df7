import random

import pytest
from hypothesis import given, strategies as st

from conftest import BATMAN, random_text
from closeocc.oracle import oracle_occurrences
from closeocc.text import SENTINEL, TextError, TextIndex, build_text_index, lcp_array, suffix_array

texts = st.binary(min_size=1, max_size=80).map(lambda b: bytes(65 + x % 3 for x in b))


def naive_sa(text: bytes):
    s = text + b"\0"
    return sorted(range(len(s)), key=lambda i: s[i:])


def test_two_characters():
    assert build_text_index(b"AB").sa == [2, 0, 1]


def test_mississippi_i_block():
    ti = build_text_index(b"mississippi")
    assert ti.sa[1:5] == [10, 7, 4, 1]
    assert ti.sa == naive_sa(b"mississippi")


def test_batman_leaf_count():
    ti = build_text_index(BATMAN)
    assert len(BATMAN) == 45
    assert ti.leaf_count(0) == 46
    assert ti.node_count <= 2 * 46


@pytest.mark.parametrize("bad", [b"", b"AB\0C"])
def test_rejects_bad_input(bad):
    with pytest.raises(TextError):
        build_text_index(bad)


@given(texts)
def test_suffix_and_lcp_arrays(text):
    ti = TextIndex(text)
    assert ti.sa == naive_sa(text)
    assert all(ti.isa[p] == r for r, p in enumerate(ti.sa))
    s = ti.s
    for r in range(1, len(s)):
        a, b = s[ti.sa[r - 1]:], s[ti.sa[r]:]
        h = 0
        while h < min(len(a), len(b)) and a[h] == b[h]:
            h += 1
        assert ti.lcp[r] == h


def _root_path(ti, v):
    out = []
    while v > 0:
        out.append(v)
        v = ti.parent[v]
    return out[::-1]


@given(texts)
def test_tree_invariants(text):
    ti = TextIndex(text)
    assert ti.node_count <= 2 * (ti.n + 1)
    for v in range(ti.node_count):
        ch = ti.children[v]
        if ti.is_leaf(v):
            # leaf labels run through the sentinel
            assert ti.path_label(v) == ti.s[ti.leaf_pos[v]:]
            assert b"".join(ti.edge_label(u) for u in _root_path(ti, v)) == ti.path_label(v)
            continue
        assert len(ch) >= 2
        assert len(set(ti.child_chars[v])) == len(ch)
        assert ti.child_chars[v] == sorted(ti.child_chars[v])
        assert ti.lo[ch[0]] == ti.lo[v] and ti.hi[ch[-1]] == ti.hi[v]
        assert all(ti.hi[a] + 1 == ti.lo[b] for a, b in zip(ch, ch[1:]))
        assert sum(ti.leaf_count(c) for c in ch) == ti.leaf_count(v)


def test_locus_examples():
    ti = build_text_index(BATMAN)
    loc = ti.locus(b"AN")
    assert loc.count == 9
    a, b = loc.sa_range
    assert sorted(ti.sa[a:b + 1]) == [4, 7, 11, 22, 24, 26, 30, 39, 41]
    assert ti.occurrences_in_text_order(loc.sa_range) == [4, 7, 11, 22, 24, 26, 30, 39, 41]
    assert ti.locus(BATMAN).count == 1
    assert build_text_index(b"mississippi").locus(b"zz") is None
    with pytest.raises(ValueError):
        ti.locus(b"")


def test_occurrences_limit():
    ti = build_text_index(b"mississippi")
    assert ti.occurrences_in_text_order(ti.locus(b"i").sa_range, limit=2) == [1, 4]
    r = ti.locus(b"mississippi").sa_range
    assert ti.occurrences_in_text_order(r) == [0]


def test_occurrences_match_naive_scan():
    rng = random.Random(1)
    for _ in range(1000):
        text = random_text(rng, rng.randint(1, 120), rng.choice([2, 4, 26]))
        i = rng.randrange(len(text))
        p = text[i:i + rng.randint(1, 6)]
        ti = TextIndex(text)
        loc = ti.locus(p)
        assert ti.occurrences_in_text_order(loc.sa_range) == oracle_occurrences(text, p)
        # minimality: the parent is too shallow to spell p
        assert ti.depth[ti.parent[loc.node]] < len(p) <= ti.depth[loc.node]
        limit = rng.randint(0, 5)
        assert ti.occurrences_in_text_order(loc.sa_range, limit) == oracle_occurrences(text, p)[:limit]


def test_numpy_suffix_array_matches_naive():
    rng = random.Random(2)
    for _ in range(50):
        t = random_text(rng, rng.randint(1, 300), rng.choice([1, 2, 26]))
        assert list(suffix_array(t)) == naive_sa(t)
        assert lcp_array(t + bytes([SENTINEL]), naive_sa(t))[0] == 0
