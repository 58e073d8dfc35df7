"""Far, gap and non-overlapping consecutive-occurrence queries.

Gap queries need a :class:`RecursiveIndex` built with the matching mode:
``gap-alpha`` stores, per spine depth, the closest pairs with distance
``>= alpha``; ``gap-beta`` the farthest with distance ``<= beta``.  A query
walks that list until the free endpoint is crossed and only scans all
occurrences when every stored pair was inside the range.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Union

from .cluster import RecursiveIndex, mode_spec
from .heavypath import FullIndex, ModeError
from .oracle import ConsecutivePair, close_key, far_key
from .persistent import QueryStats

Index = Union[FullIndex, RecursiveIndex]


@dataclass(frozen=True)
class GapConfig:
    fixed_kind: str
    fixed_value: int

    def __post_init__(self):
        if self.fixed_kind not in ("alpha", "beta"):
            raise ValueError(f"fixed_kind must be 'alpha' or 'beta', got {self.fixed_kind!r}")
        if self.fixed_value < 1:
            raise ValueError(f"fixed gap value must be >= 1, got {self.fixed_value}")

    @property
    def mode(self) -> str:
        return "gap-" + self.fixed_kind

    def build_kwargs(self) -> dict:
        return {self.fixed_kind: self.fixed_value}


def query_topk_far(index: Index, pattern: bytes, k: int, stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
    return index.query_topk_far(pattern, k, stats)


def _gap_walk(index: RecursiveIndex, pattern: bytes, spec, lo: int, hi: int, descending: bool,
              stats: Optional[QueryStats]) -> List[ConsecutivePair]:
    loc = index.locate(pattern)
    if loc is None:
        return []
    v = loc.node
    sid = index.route_spine[v]
    if sid >= 0:
        sp = index.spines[sid]
        if stats is not None:
            stats.level, stats.tau, stats.route = sp.level, sp.tau, "spine"
        out = []
        seen = 0
        for p in index.spine_pairs(sid, spec, index.route_depth[v], None, stats):
            d = p.distance
            if (d < lo) if descending else (d > hi):
                return out
            seen += 1
            if lo <= d <= hi:
                out.append(p)
        if seen < sp.tau:
            return out
        # every stored pair was in range; more may exist beyond the top-tau
        if stats is not None:
            stats.route = "fallback"
    elif stats is not None:
        stats.route = "terminal"
    pairs = [p for p in index.enumerate_pairs(loc, stats) if lo <= p.distance <= hi]
    pairs.sort(key=far_key if descending else close_key)
    return pairs


def _recursive(index: Index, mode: str) -> RecursiveIndex:
    if not isinstance(index, RecursiveIndex) or mode not in index.specs:
        raise ModeError(mode)
    return index


def query_gap_fixed_alpha(index: Index, pattern: bytes, beta: int,
                          stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
    """Pairs with ``alpha <= distance <= beta`` ascending; ``alpha`` was fixed at build time."""
    index = _recursive(index, "gap-alpha")
    alpha = index.alpha
    if beta < alpha:
        raise ValueError(f"beta={beta} is below the index's alpha={alpha}")
    return _gap_walk(index, pattern, index.specs["gap-alpha"], alpha, beta, False, stats)


def query_gap_fixed_beta(index: Index, pattern: bytes, alpha: int, stats: Optional[QueryStats] = None,
                         beta: Optional[int] = None) -> List[ConsecutivePair]:
    """Pairs with ``alpha <= distance <= beta`` descending; ``beta`` defaults to the build-time value.

    An explicit ``beta`` selects the structure that value normalizes to, so
    ``beta >= n`` reads the plain farthest lists.
    """
    if beta is None:
        index = _recursive(index, "gap-beta")
        spec, beta = index.specs["gap-beta"], index.beta
    else:
        if not isinstance(index, RecursiveIndex):
            raise ModeError("gap-beta")
        spec = index.structure(mode_spec("gap-beta", index.text_index.n, beta=beta), "gap-beta")
    if not 0 < alpha <= beta:
        raise ValueError(f"need 0 < alpha <= beta, got alpha={alpha}, beta={beta}")
    return _gap_walk(index, pattern, spec, alpha, beta, True, stats)


def query_nonoverlapping(index: Index, pattern: bytes, stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
    """Consecutive pairs at distance ``>= len(pattern)``, descending."""
    m = len(pattern)
    if m == 0:
        raise ValueError("pattern must be nonempty")
    if isinstance(index, FullIndex):
        return index.query_at_least(pattern, m, stats)
    n = index.text_index.n
    if mode_spec("nonoverlap", n) not in index.unique_specs:
        raise ModeError("nonoverlap")
    return query_gap_fixed_beta(index, pattern, m, stats, beta=max(n, m))
