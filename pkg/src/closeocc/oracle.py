"""Brute-force reference answers.  Naive scans and full sorts only."""
from __future__ import annotations

from typing import List, NamedTuple, Optional


class ConsecutivePair(NamedTuple):
    i: int
    j: int

    @property
    def distance(self) -> int:
        return self.j - self.i


def close_key(p):
    return (p[1] - p[0], p[0])


def far_key(p):
    return (p[0] - p[1], p[0])


def oracle_occurrences(text: bytes, pattern: bytes) -> List[int]:
    m = len(pattern)
    if m == 0:
        raise ValueError("pattern must be nonempty")
    return [i for i in range(len(text) - m + 1) if text[i:i + m] == pattern]


def pairs_from_occurrences(occ: List[int]) -> List[ConsecutivePair]:
    return [ConsecutivePair(a, b) for a, b in zip(occ, occ[1:])]


def oracle_consecutive(text: bytes, pattern: bytes) -> List[ConsecutivePair]:
    """All consecutive occurrences sorted by (distance, left position)."""
    return sorted(pairs_from_occurrences(oracle_occurrences(text, pattern)), key=close_key)


def oracle_topk(text: bytes, pattern: bytes, k: Optional[int]) -> List[ConsecutivePair]:
    pairs = oracle_consecutive(text, pattern)
    return pairs if k is None else pairs[:max(k, 0)]


def oracle_topk_far(text: bytes, pattern: bytes, k: Optional[int]) -> List[ConsecutivePair]:
    pairs = sorted(oracle_consecutive(text, pattern), key=far_key)
    return pairs if k is None else pairs[:max(k, 0)]


def oracle_gap(text: bytes, pattern: bytes, alpha: int, beta: int, descending: bool = False) -> List[ConsecutivePair]:
    if beta < alpha:
        raise ValueError(f"empty gap range [{alpha}, {beta}]")
    pairs = [p for p in oracle_consecutive(text, pattern) if alpha <= p.distance <= beta]
    return sorted(pairs, key=far_key) if descending else pairs


def oracle_nonoverlap(text: bytes, pattern: bytes) -> List[ConsecutivePair]:
    return oracle_gap(text, pattern, len(pattern), max(len(text), len(pattern)), descending=True)
