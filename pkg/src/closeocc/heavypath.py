"""Heavy-path decomposition of the suffix tree and the per-path segment index.

For a heavy path ``v_1..v_l`` every pair that is ever a consecutive
occurrence of some ``str(v_d)`` is alive on one contiguous depth interval.
Each pair becomes a vertical segment (x = distance, y = that interval) and
each path stores its segments in a :class:`VersionedOrderedList`, so a
top-k query is a locus lookup plus a walk over ``k`` cells.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .oracle import ConsecutivePair
from .persistent import (
    LifeSegment,
    QueryStats,
    VersionedOrderedList,
    build_versioned_list,
)
from .text import TextIndex

MODES_FULL = ("topk", "far", "nonoverlap")


@dataclass
class HeavyPathDecomposition:
    paths: List[List[int]]
    path_of: List[int]
    depth_on_path: List[int]
    subtree_size: List[int]

    def heavy_child(self, v: int) -> int:
        p = self.path_of[v]
        d = self.depth_on_path[v]
        path = self.paths[p]
        return path[d] if d < len(path) else -1


def subtree_sizes(ti: TextIndex) -> List[int]:
    size = [1] * ti.node_count
    for v in reversed(ti.preorder()):
        p = ti.parent[v]
        if p >= 0:
            size[p] += size[v]
    return size


def decompose_heavy_paths(ti: TextIndex) -> HeavyPathDecomposition:
    """Heavy child = largest subtree by node count; ties go to the first child."""
    size = subtree_sizes(ti)
    path_of = [-1] * ti.node_count
    depth_on = [0] * ti.node_count
    paths: List[List[int]] = []
    apexes = [0]
    while apexes:
        v = apexes.pop()
        path = []
        pid = len(paths)
        while True:
            path.append(v)
            path_of[v] = pid
            depth_on[v] = len(path)
            ch = ti.children[v]
            if not ch:
                break
            heavy = ch[0]
            for c in ch[1:]:
                if size[c] > size[heavy]:
                    heavy = c
            for c in reversed(ch):
                if c != heavy:
                    apexes.append(c)
            v = heavy
        paths.append(path)
    return HeavyPathDecomposition(paths, path_of, depth_on, size)


def branch_batches(ti: TextIndex, nodes: Sequence[int]) -> Iterator[List[int]]:
    """For d = 1..l-1, the leaf positions under ``v_d`` but not under ``v_{d+1}``."""
    sa, lo, hi = ti.sa, ti.lo, ti.hi
    for v, w in zip(nodes, nodes[1:]):
        yield sa[lo[v]:lo[w]] + sa[hi[w] + 1:hi[v] + 1]


def generate_life_segments(nodes: Sequence[int], ti: TextIndex) -> List[LifeSegment]:
    """Maximal alive intervals of every pair that is consecutive somewhere on ``nodes``.

    Walks down the path deleting branching leaves from a text-ordered linked
    list; deleting ``x`` between ``p`` and ``s`` ends ``(p, x)`` and
    ``(x, s)`` at depth ``d`` and opens ``(p, s)`` at ``d + 1``.
    """
    # the sentinel suffix never matches a nonempty pattern
    leaves = sorted(p for p in ti.sa[ti.lo[nodes[0]]:ti.hi[nodes[0]] + 1] if p != ti.n)
    nxt: Dict[int, int] = dict(zip(leaves, leaves[1:]))
    prv: Dict[int, int] = dict(zip(leaves[1:], leaves))
    opened: Dict[int, int] = {a: 1 for a in leaves[:-1]}
    segs: List[LifeSegment] = []

    def close(a: int, b: int, d: int) -> None:
        start = opened.pop(a)
        if start <= d:
            segs.append(LifeSegment(b - a, start, d, ConsecutivePair(a, b), a))

    for d, batch in enumerate(branch_batches(ti, nodes), 1):
        for x in batch:
            p = prv.pop(x, None)
            s = nxt.pop(x, None)
            if p is not None:
                close(p, x, d)
            if s is not None:
                close(x, s, d)
            if p is not None and s is not None:
                nxt[p] = s
                prv[s] = p
                opened[p] = d + 1
            elif p is not None:
                del nxt[p]
            elif s is not None:
                del prv[s]
    last = len(nodes)
    for a in sorted(opened):
        close(a, nxt[a], last)
    return segs


class FullIndex:
    """Heavy-path index: one ascending (and optionally descending) list per heavy path."""

    kind = "full"

    def __init__(self, ti: TextIndex, modes: Sequence[str] = ("topk",), hpd: Optional[HeavyPathDecomposition] = None,
                 lists: Optional[Dict[str, List[VersionedOrderedList]]] = None):
        unknown = set(modes) - set(MODES_FULL)
        if unknown:
            raise ValueError(f"full index does not support modes {sorted(unknown)}")
        self.text_index = ti
        self.modes = tuple(m for m in MODES_FULL if m in modes)
        self.hpd = hpd or decompose_heavy_paths(ti)
        if lists is None:
            # nonoverlap walks the descending lists
            lists = {m: [] for m in ("topk", "far") if m in self.modes or (m == "far" and "nonoverlap" in self.modes)}
            for path in self.hpd.paths:
                segs = generate_life_segments(path, ti)
                if "topk" in lists:
                    lists["topk"].append(build_versioned_list(segs, len(path), "asc"))
                if "far" in lists:
                    lists["far"].append(build_versioned_list(segs, len(path), "desc"))
        self.lists = lists

    @property
    def total_segments(self) -> int:
        some = next(iter(self.lists.values()))
        return sum(l.segment_count for l in some)

    def _route(self, pattern: bytes):
        loc = self.text_index.locus(pattern)
        if loc is None:
            return None, 0
        v = loc.node
        return self.hpd.path_of[v], self.hpd.depth_on_path[v]

    def _need(self, mode: str, name: Optional[str] = None) -> List[VersionedOrderedList]:
        if mode not in self.lists:
            raise ModeError(name or mode)
        return self.lists[mode]

    def query_topk(self, pattern: bytes, k: int, stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
        lists = self._need("topk")
        if stats is not None:
            stats.route = "none"
        if k <= 0:
            return []
        path, depth = self._route(pattern)
        if path is None:
            return []
        if stats is not None:
            stats.route = "path"
        return [p for _, p in lists[path].first(depth, k, stats)]

    def query_topk_far(self, pattern: bytes, k: int, stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
        lists = self._need("far")
        if stats is not None:
            stats.route = "none"
        if k <= 0:
            return []
        path, depth = self._route(pattern)
        if path is None:
            return []
        if stats is not None:
            stats.route = "path"
        return [p for _, p in lists[path].first(depth, k, stats)]

    def query_at_least(self, pattern: bytes, alpha: int, stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
        """All consecutive pairs with distance >= alpha, descending; O(m + occ) on the far lists."""
        lists = self._need("far", "nonoverlap")
        path, depth = self._route(pattern)
        if path is None:
            return []
        if stats is not None:
            stats.route = "path"
        out = []
        for x, p in lists[path].iter_version(depth, stats):
            if x < alpha:
                break
            out.append(p)
        return out


class ModeError(LookupError):
    """The index was not built with the structure a query needs."""

    def __init__(self, mode: str):
        super().__init__(f"index was built without mode {mode!r}")
        self.mode = mode


def build_full_index(text: bytes, modes: Sequence[str] = ("topk",)) -> FullIndex:
    return FullIndex(TextIndex(text), modes)


def query_topk(index: FullIndex, pattern: bytes, k: int, stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
    return index.query_topk(pattern, k, stats)
