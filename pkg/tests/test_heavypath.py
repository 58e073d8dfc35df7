import math
import random
from collections import Counter

import pytest

from conftest import ABAC, BATMAN, random_text
from closeocc.heavypath import (
    FullIndex,
    ModeError,
    build_full_index,
    decompose_heavy_paths,
    generate_life_segments,
    query_topk,
)
from closeocc.oracle import oracle_consecutive, oracle_topk, oracle_topk_far
from closeocc.persistent import QueryStats
from closeocc.text import TextIndex


def alive_pairs(segs, d):
    return sorted((s.payload for s in segs if s.y_start <= d <= s.y_end), key=lambda p: (p.distance, p.i))


def node_pairs(ti, v):
    """D(v) from scratch: consecutive leaf positions below v, sentinel excluded."""
    pos = sorted(p for p in ti.sa[ti.lo[v]:ti.hi[v] + 1] if p != ti.n)
    return sorted(zip(pos, pos[1:]), key=lambda p: (p[1] - p[0], p[0]))


def check_decomposition(ti):
    hpd = decompose_heavy_paths(ti)
    seen = Counter(v for path in hpd.paths for v in path)
    assert sum(len(p) for p in hpd.paths) == ti.node_count
    assert set(seen.values()) == {1}
    for path in hpd.paths:
        for a, b in zip(path, path[1:]):
            assert ti.parent[b] == a
            sizes = [hpd.subtree_size[c] for c in ti.children[a]]
            assert hpd.subtree_size[b] == max(sizes)
            # ties go to the first child with the maximum size
            assert ti.children[a].index(b) == sizes.index(max(sizes))
        assert not ti.children[path[-1]]
    return hpd


def test_unary_string_single_spine():
    ti = TextIndex(b"AAAA")
    hpd = check_decomposition(ti)
    internal = [v for v in range(ti.node_count) if ti.children[v]]
    main = hpd.paths[0]
    assert set(internal) <= set(main)
    assert all(len(p) == 1 for p in hpd.paths[1:])


def test_tie_goes_to_first_child():
    ti = TextIndex(b"AB")
    hpd = check_decomposition(ti)
    assert hpd.paths[0] == [0, ti.children[0][0]]


def test_light_edges_on_sample():
    ti = TextIndex(BATMAN)
    hpd = check_decomposition(ti)
    limit = math.floor(math.log2(46)) + 1
    for v in range(ti.node_count):
        if ti.children[v]:
            continue
        paths = set()
        while v >= 0:
            paths.add(hpd.path_of[v])
            v = ti.parent[v]
        assert len(paths) <= limit


def test_alive_multiset_of_a():
    ti = TextIndex(BATMAN)
    hpd = decompose_heavy_paths(ti)
    v = ti.locus(b"A").node
    path = hpd.paths[hpd.path_of[v]]
    segs = generate_life_segments(path, ti)
    alive = alive_pairs(segs, hpd.depth_on_path[v])
    assert Counter(p.distance for p in alive) == Counter({2: 6, 3: 3, 4: 2, 5: 1, 8: 1})


def test_two_leaf_apex_gives_one_segment():
    ti = TextIndex(b"ABXAB")
    v = ti.locus(b"AB").node
    assert ti.leaf_count(v) == 2
    hpd = decompose_heavy_paths(ti)
    path = hpd.paths[hpd.path_of[v]]
    sub = path[path.index(v):]
    segs = generate_life_segments(sub, ti)
    assert len(segs) == 1
    assert segs[0].y_start == 1 and segs[0].payload == (0, 3)


def test_segments_match_per_depth_oracle():
    rng = random.Random(11)
    for _ in range(150):
        text = random_text(rng, rng.randint(1, 90), rng.choice([2, 4, 26]))
        ti = TextIndex(text)
        for path in decompose_heavy_paths(ti).paths:
            segs = generate_life_segments(path, ti)
            for d, v in enumerate(path, 1):
                assert [tuple(p) for p in alive_pairs(segs, d)] == node_pairs(ti, v)
            # one maximal interval per pair
            assert len({s.payload for s in segs}) == len(segs)


def test_single_character_text():
    assert build_full_index(b"A").total_segments == 0


def test_unary_segment_bound():
    idx = build_full_index(b"A" * 32)
    assert idx.total_segments <= 3 * 32 * 6


def test_batman_queries():
    idx = build_full_index(BATMAN, ("topk", "far"))
    res = idx.query_topk(b"AN", 5)
    assert [p.distance for p in res] == [2, 2, 2, 3, 4]
    assert res[:4] == [(22, 24), (24, 26), (39, 41), (4, 7)]
    assert idx.query_topk_far(b"AN", 2) == [(11, 22), (30, 39)]


def test_abac_example():
    idx = build_full_index(ABAC)
    assert query_topk(idx, b"AB", 3) == [(0, 4), (4, 9), (9, 15)]
    assert query_topk(idx, b"AC", 3) == [(2, 6), (6, 12), (12, 18)]
    assert query_topk(idx, b"A", 3) == [(0, 2), (2, 4), (4, 6)]


def test_edge_cases():
    idx = build_full_index(BATMAN)
    assert idx.query_topk(b"AN", 0) == []
    assert idx.query_topk(b"QQ", 3) == []
    assert idx.query_topk(b"BATMAN", 3) == []
    with pytest.raises(ModeError) as e:
        idx.query_topk_far(b"AN", 1)
    assert e.value.mode == "far"
    with pytest.raises(ValueError):
        FullIndex(TextIndex(b"AB"), ("gap-alpha",))


def test_random_queries_against_oracle():
    rng = random.Random(12)
    for _ in range(1000 // 10):
        text = random_text(rng, rng.randint(1, 512), rng.choice([2, 4, 26]))
        idx = FullIndex(TextIndex(text), ("topk", "far"))
        for _ in range(10):
            i = rng.randrange(len(text))
            p = text[i:i + rng.randint(1, 5)]
            k = rng.randint(0, 12)
            stats = QueryStats()
            assert idx.query_topk(p, k, stats) == oracle_topk(text, p, k)
            assert stats.cells_visited <= k + 1
            assert idx.query_topk_far(p, k) == oracle_topk_far(text, p, k)
            assert idx.query_at_least(p, 1) == oracle_topk_far(text, p, None)


def test_root_pairs_are_adjacent_positions():
    ti = TextIndex(b"ABCA")
    segs = generate_life_segments(decompose_heavy_paths(ti).paths[0], ti)
    assert [tuple(p) for p in alive_pairs(segs, 1)] == [(0, 1), (1, 2), (2, 3)]
    assert oracle_consecutive(b"ABCA", b"A") == [(0, 3)]
