"""Suffix array, LCP array and compact suffix tree over ``S$``.

The sentinel is byte 0 and is appended internally; input containing it is
rejected.  Every node of the tree knows its inclusive leaf range ``[a, b]``
in the suffix array, so a locus lookup directly yields the occurrence range.
"""
from __future__ import annotations

import heapq
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

SENTINEL = 0


class TextError(ValueError):
    """Raised for input that cannot be indexed."""


def _validate(text: bytes) -> bytes:
    text = bytes(text)
    if not text:
        raise TextError("text must be nonempty")
    if SENTINEL in text:
        raise TextError(f"text contains the reserved sentinel byte at position {text.index(SENTINEL)}")
    return text


def suffix_array(text: bytes) -> np.ndarray:
    """Suffix array of ``text + b'\\0'`` by prefix doubling (O(n log^2 n))."""
    s = np.frombuffer(text + bytes([SENTINEL]), dtype=np.uint8).astype(np.int64)
    n = len(s)
    rank = s.copy()
    k = 1
    sa = np.argsort(rank, kind="stable")
    while True:
        second = np.full(n, -1, dtype=np.int64)
        second[: n - k] = rank[k:] if k < n else second[:0]
        sa = np.lexsort((second, rank))
        r1, r2 = rank[sa], second[sa]
        diff = np.empty(n, dtype=np.int64)
        diff[0] = 0
        diff[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[sa] = np.cumsum(diff)
        rank = new_rank
        if rank[sa[-1]] == n - 1:
            return sa
        k <<= 1


def lcp_array(s: bytes, sa: List[int]) -> List[int]:
    """Kasai et al.; ``lcp[r]`` is the LCP of suffixes ``sa[r-1]`` and ``sa[r]``, ``lcp[0] = 0``."""
    n = len(s)
    rank = [0] * n
    for r, p in enumerate(sa):
        rank[p] = r
    lcp = [0] * n
    h = 0
    for i in range(n):
        r = rank[i]
        if r == 0:
            h = 0
            continue
        j = sa[r - 1]
        while i + h < n and j + h < n and s[i + h] == s[j + h]:
            h += 1
        lcp[r] = h
        if h:
            h -= 1
    return lcp


@dataclass(frozen=True)
class LocusResult:
    node: int
    sa_range: Tuple[int, int]
    matched_length: int

    @property
    def count(self) -> int:
        return self.sa_range[1] - self.sa_range[0] + 1


class TextIndex:
    """Suffix array + LCP + compact suffix tree of ``text$``.

    Node ids are ints; node 0 is the root.  Per-node arrays:

    ``parent``, ``depth`` (string depth, the sentinel counts as a character),
    ``lo``/``hi`` (inclusive suffix-array leaf range), ``leaf_pos`` (suffix
    start for leaves, -1 for internal nodes), ``children`` (ids ordered by
    first edge character) and ``child_chars`` (those first characters).
    """

    def __init__(self, text: bytes, sa: Optional[Iterable[int]] = None, lcp: Optional[Iterable[int]] = None):
        self.text = _validate(text)
        self.n = len(self.text)
        self.s = self.text + bytes([SENTINEL])
        if sa is None:
            sa = suffix_array(self.text)
        self.sa: List[int] = [int(p) for p in sa]
        if len(self.sa) != self.n + 1:
            raise TextError("suffix array length mismatch")
        self.isa = [0] * (self.n + 1)
        for r, p in enumerate(self.sa):
            self.isa[p] = r
        self.lcp: List[int] = list(lcp) if lcp is not None else lcp_array(self.s, self.sa)
        self._build_tree()
        self._rmq = None

    # -- construction -------------------------------------------------
    def _new_node(self, depth: int, lo: int, pos: int = -1) -> int:
        self.parent.append(-1)
        self.depth.append(depth)
        self.lo.append(lo)
        self.hi.append(lo)
        self.leaf_pos.append(pos)
        self.children.append([])
        return len(self.depth) - 1

    def _attach(self, parent: int, child: int) -> None:
        self.parent[child] = parent
        self.children[parent].append(child)

    def _build_tree(self) -> None:
        self.parent: List[int] = []
        self.depth: List[int] = []
        self.lo: List[int] = []
        self.hi: List[int] = []
        self.leaf_pos: List[int] = []
        self.children: List[List[int]] = []
        total = self.n + 1
        root = self._new_node(0, 0)
        stack = [root]
        depth = self.depth
        for r in range(total):
            l = self.lcp[r] if r else 0
            last = -1
            while depth[stack[-1]] > l:
                last = stack.pop()
                self.hi[last] = r - 1
                if depth[stack[-1]] >= l:
                    self._attach(stack[-1], last)
            if depth[stack[-1]] < l:
                v = self._new_node(l, self.lo[last])
                self._attach(v, last)
                stack.append(v)
            stack.append(self._new_node(total - self.sa[r], r, self.sa[r]))
        while len(stack) > 1:
            last = stack.pop()
            self.hi[last] = total - 1
            self._attach(stack[-1], last)
        self.hi[root] = total - 1
        s = self.s
        self.child_chars = [
            [s[self.sa[self.lo[c]] + depth[v]] for c in ch] for v, ch in enumerate(self.children)
        ]

    # -- basic accessors ----------------------------------------------
    @property
    def node_count(self) -> int:
        return len(self.depth)

    @property
    def leaf_count_total(self) -> int:
        return self.n + 1

    def is_leaf(self, v: int) -> bool:
        return self.leaf_pos[v] >= 0

    def leaf_count(self, v: int) -> int:
        return self.hi[v] - self.lo[v] + 1

    def edge_label(self, v: int) -> bytes:
        if v == 0:
            return b""
        start = self.sa[self.lo[v]]
        return self.s[start + self.depth[self.parent[v]]: start + self.depth[v]]

    def path_label(self, v: int) -> bytes:
        start = self.sa[self.lo[v]]
        return self.s[start: start + self.depth[v]]

    def child(self, v: int, ch: int) -> int:
        chars = self.child_chars[v]
        i = bisect_left(chars, ch)
        if i < len(chars) and chars[i] == ch:
            return self.children[v][i]
        return -1

    def preorder(self, root: int = 0) -> List[int]:
        out = []
        stack = [root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return out

    # -- queries ------------------------------------------------------
    def locus(self, pattern: bytes) -> Optional[LocusResult]:
        """Minimum-depth node whose string has ``pattern`` as a prefix, or None."""
        pattern = bytes(pattern)
        m = len(pattern)
        if m == 0:
            raise ValueError("pattern must be nonempty")
        s, sa, depth = self.s, self.sa, self.depth
        v, matched = 0, 0
        while matched < m:
            c = self.child(v, pattern[matched])
            if c < 0:
                return None
            start = sa[self.lo[c]]
            end = min(depth[c], m)
            if s[start + matched: start + end] != pattern[matched:end]:
                return None
            v, matched = c, end
        return LocusResult(v, (self.lo[v], self.hi[v]), m)

    def _sparse_table(self):
        if self._rmq is None:
            vals = np.asarray(self.sa, dtype=np.int64)
            table = [np.arange(len(vals), dtype=np.int64)]
            span = 1
            while 2 * span <= len(vals):
                prev = table[-1]
                left, right = prev[:-span], prev[span:]
                table.append(np.where(vals[left] <= vals[right], left, right))
                span *= 2
            self._rmq = [t.tolist() for t in table]
        return self._rmq

    def _range_min(self, a: int, b: int) -> int:
        table = self._sparse_table()
        k = (b - a + 1).bit_length() - 1
        i, j = table[k][a], table[k][b - (1 << k) + 1]
        return i if self.sa[i] <= self.sa[j] else j

    def occurrences_in_text_order(self, sa_range: Tuple[int, int], limit: Optional[int] = None) -> List[int]:
        """The ``limit`` smallest suffix positions in ``sa[a..b]``, ascending.

        Range-minimum extraction with a heap, O(out log out).
        """
        a, b = sa_range
        size = b - a + 1
        want = size if limit is None else min(limit, size)
        if want <= 0:
            return []
        if want == size and size <= 32:
            return sorted(self.sa[a: b + 1])
        sa = self.sa
        heap = [(sa[r], r, a, b) for r in (self._range_min(a, b),)]
        out = []
        while heap and len(out) < want:
            pos, r, lo, hi = heapq.heappop(heap)
            out.append(pos)
            if lo < r:
                r2 = self._range_min(lo, r - 1)
                heapq.heappush(heap, (sa[r2], r2, lo, r - 1))
            if r < hi:
                r2 = self._range_min(r + 1, hi)
                heapq.heappush(heap, (sa[r2], r2, r + 1, hi))
        return out


def build_text_index(text: bytes) -> TextIndex:
    return TextIndex(text)
