import random
from collections import Counter
from fractions import Fraction

import pytest

from conftest import ABAC, BATMAN, random_text, substring_pattern
from closeocc.cluster import MODES_RECURSIVE, RecursiveIndex
from closeocc.extensions import (
    GapConfig,
    query_gap_fixed_alpha,
    query_gap_fixed_beta,
    query_nonoverlapping,
    query_topk_far,
)
from closeocc.heavypath import MODES_FULL, FullIndex, ModeError
from closeocc.oracle import oracle_gap, oracle_nonoverlap, oracle_topk_far
from closeocc.persistent import QueryStats
from closeocc.text import TextIndex


def recursive(text, **kw):
    kw.setdefault("terminal_tau", 2)
    return RecursiveIndex(TextIndex(text), kw.pop("epsilon", 1), kw.pop("modes", MODES_RECURSIVE), **kw)


def test_gap_config():
    cfg = GapConfig("alpha", 3)
    assert cfg.mode == "gap-alpha" and cfg.build_kwargs() == {"alpha": 3}
    with pytest.raises(ValueError):
        GapConfig("alpha", 0)
    with pytest.raises(ValueError):
        GapConfig("gamma", 2)


@pytest.mark.parametrize("make", [lambda t: FullIndex(TextIndex(t), MODES_FULL),
                                  lambda t: recursive(t, alpha=3, beta=4)])
def test_far_examples(make):
    idx = make(BATMAN)
    assert query_topk_far(idx, b"AN", 2) == [(11, 22), (30, 39)]
    assert query_topk_far(make(ABAC), b"A", 1) == [(6, 9)]
    assert query_topk_far(idx, b"BATMAN", 3) == []


def test_fixed_alpha_examples():
    idx = recursive(BATMAN, alpha=3, beta=4)
    assert set(query_gap_fixed_alpha(idx, b"AN", 4)) == {(4, 7), (7, 11), (26, 30)}
    assert query_gap_fixed_alpha(idx, b"AN", 4) == [(4, 7), (7, 11), (26, 30)]
    assert query_gap_fixed_alpha(idx, b"AN", 3) == [(4, 7)]
    with pytest.raises(ValueError):
        query_gap_fixed_alpha(idx, b"AN", 2)


def test_fixed_beta_examples():
    idx = recursive(BATMAN, alpha=3, beta=4)
    assert set(query_gap_fixed_beta(idx, b"AN", 3)) == {(26, 30), (7, 11), (4, 7)}
    assert [p.distance for p in query_gap_fixed_beta(idx, b"AN", 3)] == [4, 4, 3]
    assert query_gap_fixed_beta(idx, b"AN", 1) == oracle_gap(BATMAN, b"AN", 1, 4, descending=True)
    with pytest.raises(ValueError):
        query_gap_fixed_beta(idx, b"AN", 5)


def test_nonoverlap_examples():
    for idx in (recursive(b"NANANANA", modes=("nonoverlap",)), FullIndex(TextIndex(b"NANANANA"), ("nonoverlap",))):
        assert query_nonoverlapping(idx, b"NANA") == []
    idx = recursive(BATMAN, modes=("far",))
    assert len(query_nonoverlapping(idx, b"AN")) == 8
    assert query_nonoverlapping(idx, b"BATMAN") == []


def test_nonoverlap_is_gap_beta_call():
    rng = random.Random(31)
    for _ in range(30):
        text = random_text(rng, rng.randint(1, 300), rng.choice([2, 4]))
        idx = recursive(text, modes=("nonoverlap",), epsilon=Fraction(1, 2))
        for _ in range(10):
            p = substring_pattern(rng, text)
            n = len(text)
            assert query_nonoverlapping(idx, p) == query_gap_fixed_beta(idx, p, len(p), beta=max(n, len(p)))


def test_missing_modes():
    idx = recursive(BATMAN, modes=("topk",))
    for fn, arg, mode in ((query_gap_fixed_alpha, 5, "gap-alpha"), (query_gap_fixed_beta, 1, "gap-beta"),
                          (query_topk_far, 2, "far")):
        with pytest.raises(ModeError) as e:
            fn(idx, b"AN", arg)
        assert e.value.mode == mode
    with pytest.raises(ModeError) as e:
        query_nonoverlapping(idx, b"AN")
    assert e.value.mode == "nonoverlap"
    with pytest.raises(ModeError):
        query_gap_fixed_alpha(FullIndex(TextIndex(BATMAN)), b"AN", 5)
    with pytest.raises(ModeError) as e:
        query_nonoverlapping(FullIndex(TextIndex(BATMAN)), b"AN")
    assert e.value.mode == "nonoverlap"


@pytest.mark.parametrize("family", ["gap-alpha", "gap-beta", "nonoverlap", "far"])
def test_fuzz_against_oracle(family):
    rng = random.Random(["gap-alpha", "gap-beta", "nonoverlap", "far"].index(family))
    cases = 0
    routes = Counter()
    while cases < 1000:
        text = random_text(rng, rng.randint(1, 400), rng.choice([2, 4, 26]))
        alpha, beta = rng.randint(1, 5), rng.randint(1, 12)
        idx = recursive(text, alpha=alpha, beta=beta, epsilon=rng.choice([1, Fraction(1, 2)]),
                        terminal_tau=rng.choice([2, 3, 8]))
        for _ in range(20):
            p = substring_pattern(rng, text)
            stats = QueryStats()
            if family == "gap-alpha":
                b = alpha + rng.randint(0, 10)
                got, want = query_gap_fixed_alpha(idx, p, b, stats), oracle_gap(text, p, alpha, b)
            elif family == "gap-beta":
                a = rng.randint(1, beta)
                got, want = query_gap_fixed_beta(idx, p, a, stats), oracle_gap(text, p, a, beta, descending=True)
            elif family == "nonoverlap":
                got, want = query_nonoverlapping(idx, p, stats), oracle_nonoverlap(text, p)
            else:
                k = rng.randint(0, 15)
                got, want = query_topk_far(idx, p, k, stats), oracle_topk_far(text, p, k)
            assert got == want, (text, p)
            routes[stats.route] += 1
            cases += 1
    assert routes["spine"] and routes["terminal"] and routes["fallback"]
