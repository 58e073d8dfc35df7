"""Recursive cluster index: linear-space top-k with ``O(m + k^(1+eps))`` queries.

The suffix tree is cut into clusters of at most ``tau_1`` nodes; every
path cluster keeps, for each depth on its spine, only the top-``tau_1``
pairs of ``D(v_d)`` as persistent segments.  Subtrees hanging off spines
and leaf clusters are clustered again with ``tau_2``, and so on until the
cluster size drops to ``TERMINAL_TAU``.  Segment keys are reduced to ranks
and leaves to suffix-array offsets below the spine's top node.
"""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from sortedcontainers import SortedList

from .heavypath import ModeError, branch_batches
from .oracle import ConsecutivePair, close_key, far_key, pairs_from_occurrences
from .packed import PackedIntArray, ceil_log2
from .persistent import (
    LifeSegment,
    QueryStats,
    VersionedOrderedList,
    build_versioned_list,
    layout_bits,
    packed_layout,
)
from .text import TextIndex

TERMINAL_TAU = 8
MODES_RECURSIVE = ("topk", "far", "gap-alpha", "gap-beta", "nonoverlap")
CLUSTER_COUNT_FACTOR = 8
SPINE_SEGMENT_FACTOR = 8


# -- level schedule ---------------------------------------------------------

def as_fraction(epsilon) -> Fraction:
    eps = Fraction(epsilon).limit_denominator(1000)
    if not 0 < eps <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    return eps


def next_tau(tau: int, epsilon) -> int:
    """Smallest integer t with t >= tau^(1/(1+eps)), computed exactly; always < tau for tau > 1."""
    eps = as_fraction(epsilon)
    p, q = eps.numerator, eps.denominator
    # t^(p+q) >= tau^q
    target = tau ** q
    t = max(1, math.ceil(tau ** (q / (p + q))) - 1)
    while t ** (p + q) < target:
        t += 1
    while t > 1 and (t - 1) ** (p + q) >= target:
        t -= 1
    if t >= tau and tau > 1:
        t = tau - 1
    return t


def tau_schedule(n: int, epsilon, terminal: int = TERMINAL_TAU) -> List[int]:
    """``[tau_0 = n, tau_1, ...]`` ending with the first value ``<= terminal``."""
    if terminal < 1:
        raise ValueError("terminal threshold must be >= 1")
    taus = [n]
    while taus[-1] > terminal:
        taus.append(next_tau(taus[-1], epsilon))
    return taus


# -- cluster partition ----------------------------------------------------

@dataclass
class Cluster:
    top: int
    bottom: Optional[int]
    nodes: List[int]
    root_children: List[int]
    spine: List[int] = field(default_factory=list)

    @property
    def is_path(self) -> bool:
        return self.bottom is not None


@dataclass
class ClusterPartition:
    root: int
    root_children: List[int]
    tau: int
    clusters: List[Cluster]
    size: int

    @property
    def node_to_clusters(self) -> Dict[int, List[int]]:
        out: Dict[int, List[int]] = {}
        for cid, c in enumerate(self.clusters):
            for v in c.nodes:
                out.setdefault(v, []).append(cid)
        return out


def _piece_children(children, root, root_children):
    if root_children is None:
        return children
    return lambda v: root_children if v == root else children(v)


def _postorder(children, root):
    out, stack = [], [root]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(children(v))
    out.reverse()
    return out


def _pack_branches(branches, cap):
    """Group branches at a closing node: one flagged branch per group at most, sizes <= cap."""
    groups = [[b] for b in branches if b[2] is not None]
    room = [cap - b[1] for b in (g[0] for g in groups)]
    for b in sorted((b for b in branches if b[2] is None), key=lambda b: -b[1]):
        for gi, r in enumerate(room):
            if b[1] <= r:
                groups[gi].append(b)
                room[gi] -= b[1]
                break
        else:
            groups.append([b])
            room.append(cap - b[1])
    return groups


def cluster_partition(tree_children, root: int, tau: int, root_children: Optional[List[int]] = None) -> ClusterPartition:
    """Bottom-up greedy partition into clusters of <= tau nodes with <= 2 boundary nodes.

    ``tree_children(v)`` lists children; ``root_children`` restricts the root
    to a subset of its children (a piece of a larger tree).  An open region
    keeps growing upward while it has <= tau - 1 nodes and at most one
    bottom boundary; otherwise its top node becomes a boundary and the child
    branches are packed into clusters hanging from it.
    """
    if tau < 2:
        raise ValueError("tau must be at least 2")
    children = _piece_children(tree_children, root, root_children)
    clusters: List[Cluster] = []
    region: Dict[int, tuple] = {}
    size = 0

    def merge(parts, v):
        parts = sorted(parts, key=len, reverse=True)
        out = parts[0] if parts else []
        for p in parts[1:]:
            out.extend(p)
        out.append(v)
        return out

    for v in _postorder(children, root):
        size += 1
        chs = list(children(v))
        branches = []
        for c in chs:
            members, s, flag = region.pop(c)
            branches.append((members, s, flag, c))
        total = 1 + sum(b[1] for b in branches)
        flags = [b[2] for b in branches if b[2] is not None]
        cap = tau if v == root else tau - 1
        if len(flags) <= 1 and total <= cap:
            members = merge([b[0] for b in branches], v)
            flag = flags[0] if flags else None
            if v == root:
                clusters.append(Cluster(v, flag, members, chs))
            else:
                region[v] = (members, total, flag)
            continue
        for group in _pack_branches(branches, tau - 1):
            flag = next((b[2] for b in group if b[2] is not None), None)
            members = merge([b[0] for b in group], v)
            clusters.append(Cluster(v, flag, members, [b[3] for b in group]))
        if v != root:
            region[v] = ([v], 1, v)
    part = ClusterPartition(root, list(children(root)), tau, clusters, size)
    return part


def attach_spines(part: ClusterPartition, parent: Sequence[int]) -> None:
    for c in part.clusters:
        if c.bottom is None:
            c.spine = []
            continue
        spine = [c.bottom]
        while spine[-1] != c.top:
            spine.append(parent[spine[-1]])
        spine.reverse()
        c.spine = spine


def check_partition(part: ClusterPartition, tree_children, parent: Sequence[int]) -> None:
    """Assert the cluster-partition invariants for the piece ``part`` covers."""
    children = _piece_children(tree_children, part.root, part.root_children)
    piece_nodes = _postorder(children, part.root)
    assert len(piece_nodes) == part.size
    in_piece = set(piece_nodes)
    edge_owner: Dict[int, int] = {}
    covered = set()
    for cid, c in enumerate(part.clusters):
        nodes = set(c.nodes)
        assert len(nodes) == len(c.nodes), "duplicate node in cluster"
        assert len(nodes) <= part.tau, f"cluster {cid} has {len(nodes)} > tau={part.tau} nodes"
        assert c.top in nodes and nodes <= in_piece
        covered |= nodes
        for v in nodes:
            if v == c.top:
                continue
            # every non-top node brings its parent edge; this also proves connectivity
            assert parent[v] in nodes, f"cluster {cid} disconnected at {v}"
            assert v not in edge_owner, f"edge into {v} in two clusters"
            edge_owner[v] = cid
        # the top is the piece root or has its parent edge outside; others need an outside child edge
        boundary = {c.top} | {v for v in nodes if v != c.top and any(ch not in nodes for ch in children(v))}
        assert len(boundary) <= 2, f"cluster {cid} has {len(boundary)} boundary nodes"
        expected = {c.top} | ({c.bottom} if c.bottom is not None else set())
        assert boundary <= expected, f"cluster {cid} boundary {boundary} != {expected}"
        if c.bottom is not None:
            assert c.spine[0] == c.top and c.spine[-1] == c.bottom
            assert all(parent[b] == a for a, b in zip(c.spine, c.spine[1:]))
    assert covered == in_piece, "nodes not covered"
    assert len(edge_owner) == part.size - 1, "edges not covered"
    limit = CLUSTER_COUNT_FACTOR * math.ceil(part.size / part.tau)
    assert len(part.clusters) <= limit, f"{len(part.clusters)} clusters > {limit}"


def hanging_pieces(c: Cluster, tree_children) -> List[Tuple[int, List[int]]]:
    """Next-level pieces from one cluster: a leaf cluster, or per spine node its off-spine children."""
    if c.bottom is None:
        return [(c.top, list(c.root_children))] if c.root_children else []
    out = []
    on_spine = set(c.spine)
    for u in c.spine[:-1]:
        chs = c.root_children if u == c.top else tree_children(u)
        hang = [w for w in chs if w not in on_spine]
        if hang:
            out.append((u, hang))
    return out


# -- spine structures -------------------------------------------------------

@dataclass(frozen=True)
class ModeSpec:
    """``order`` asc keeps the closest pairs, desc the farthest; ``bound`` is the gap predicate."""

    order: str
    bound: Optional[int] = None

    def admits(self, dist: int) -> bool:
        if self.bound is None:
            return True
        return dist >= self.bound if self.order == "asc" else dist <= self.bound

    def key(self, a: int, b: int):
        return (b - a, a) if self.order == "asc" else (a - b, a)

    @property
    def code(self) -> str:
        name = "close" if self.order == "asc" else "far"
        return name if self.bound is None else f"{name}:{self.bound}"


CLOSEST = ModeSpec("asc")
FARTHEST = ModeSpec("desc")


def mode_spec(name: str, n: int, alpha: Optional[int] = None, beta: Optional[int] = None) -> ModeSpec:
    """Map a user mode to its normalized spine structure."""
    if name == "topk":
        return CLOSEST
    if name in ("far", "nonoverlap"):
        return FARTHEST
    if name == "gap-alpha":
        if alpha is None or alpha < 1:
            raise ValueError("gap-alpha needs alpha >= 1")
        return CLOSEST if alpha <= 1 else ModeSpec("asc", alpha)
    if name == "gap-beta":
        if beta is None or beta < 1:
            raise ValueError("gap-beta needs beta >= 1")
        return FARTHEST if beta >= n else ModeSpec("desc", beta)
    raise ValueError(f"unknown mode {name!r}")


def top_tau_segments(ti: TextIndex, nodes: Sequence[int], tau: int, mode: ModeSpec) -> List[Tuple[int, int, int, int, int]]:
    """Maximal depth intervals during which a pair is in the top-tau of ``D(v_d)`` under ``mode``.

    Returns ``(distance, y_start, y_end, i, j)``.  Depths 1 and 2 are computed
    from scratch: only the top-tau of ``D(v_1)`` matters, and below ``v_2`` at
    most ``2B`` pairs are ever removed, ``B`` being the leaves that branch off
    inside the cluster, so only the first ``tau + 2B + 1`` pairs of ``D(v_2)``
    are kept.  From there the top-tau membership is updated per leaf deletion
    and compared once per depth.
    """
    keyf = mode.key
    admits = mode.admits
    out = []

    def emit(key, start, end):
        d, a = key
        dist = d if mode.order == "asc" else -d
        out.append((dist, start, end, a, a + dist))

    def pair_keys(v):
        leaves = sorted(p for p in ti.sa[ti.lo[v]:ti.hi[v] + 1] if p != ti.n)
        return leaves, [keyf(a, b) for a, b in zip(leaves, leaves[1:]) if admits(b - a)]

    _, keys1 = pair_keys(nodes[0])
    top1 = heapq.nsmallest(tau, keys1)
    if len(nodes) == 1:
        for key in top1:
            emit(key, 1, 1)
        return out
    leaves, keys2 = pair_keys(nodes[1])
    budget = ti.leaf_count(nodes[1]) - ti.leaf_count(nodes[-1])
    ordered = SortedList(heapq.nsmallest(tau + 2 * budget + 1, keys2))
    top = set(ordered[:tau])
    opened = {}
    for key in top1:
        if key in top:
            opened[key] = 1
        else:
            emit(key, 1, 1)
    for key in top:
        opened.setdefault(key, 2)
    nxt = dict(zip(leaves, leaves[1:]))
    prv = dict(zip(leaves[1:], leaves))
    touched: Dict[tuple, bool] = {}

    def remove(key):
        r = ordered.bisect_left(key)
        if r >= len(ordered) or ordered[r] != key:
            return
        del ordered[r]
        if r < tau:
            touched.setdefault(key, True)
            top.discard(key)
            if len(ordered) >= tau:
                k2 = ordered[tau - 1]
                touched.setdefault(k2, False)
                top.add(k2)

    def add(key):
        ordered.add(key)
        r = ordered.bisect_left(key)
        if r < tau:
            touched.setdefault(key, False)
            top.add(key)
            if len(ordered) > tau:
                k2 = ordered[tau]
                touched.setdefault(k2, True)
                top.discard(k2)

    for d, batch in enumerate(branch_batches(ti, nodes[1:]), 2):
        touched.clear()
        for x in batch:
            p = prv.pop(x, None)
            s = nxt.pop(x, None)
            if p is not None:
                remove(keyf(p, x))
            if s is not None:
                remove(keyf(x, s))
            if p is not None and s is not None:
                nxt[p] = s
                prv[s] = p
                if admits(s - p):
                    add(keyf(p, s))
            elif p is not None:
                del nxt[p]
            elif s is not None:
                del prv[s]
        for key, was_in in touched.items():
            now_in = key in top
            if was_in and not now_in:
                emit(key, opened.pop(key), d)
            elif now_in and not was_in:
                opened[key] = d + 1
    last = len(nodes)
    for key in sorted(opened):
        emit(key, opened[key], last)
    return out


@dataclass
class RankReduction:
    segments: List[LifeSegment]
    offsets: PackedIntArray
    rank_count: int
    offset_width: int
    base: int


def rank_reduce(raw: Sequence[Tuple[int, int, int, int, int]], ti: TextIndex, top: int) -> RankReduction:
    """Distances to order-preserving ranks ``1..r``; leaves to offsets below ``top``."""
    distinct = sorted({s[0] for s in raw})
    rank = {d: r for r, d in enumerate(distinct, 1)}
    base = ti.lo[top]
    width = ceil_log2(ti.leaf_count(top))
    offs = []
    segs = []
    isa = ti.isa
    for idx, (dist, y1, y2, a, b) in enumerate(raw):
        offs.append(isa[a] - base)
        offs.append(isa[b] - base)
        segs.append(LifeSegment(rank[dist], y1, y2, idx, a))
    return RankReduction(segs, PackedIntArray(width, offs), len(distinct), width, base)


@dataclass
class SpineStructure:
    mode: ModeSpec
    list: VersionedOrderedList
    offsets: PackedIntArray
    rank_count: int
    offset_width: int

    @property
    def segment_count(self) -> int:
        return self.list.segment_count

    def decode(self, seg: int, ti: TextIndex, base: int) -> ConsecutivePair:
        sa = ti.sa
        return ConsecutivePair(sa[base + self.offsets[2 * seg]], sa[base + self.offsets[2 * seg + 1]])

    def stored_bits(self) -> int:
        return layout_bits(packed_layout(self.list)) + self.offsets.nbits


def build_spine_structure(ti: TextIndex, nodes: Sequence[int], tau: int, mode: ModeSpec) -> SpineStructure:
    raw = top_tau_segments(ti, nodes, tau, mode)
    red = rank_reduce(raw, ti, nodes[0])
    lst = build_versioned_list(red.segments, len(nodes), mode.order)
    return SpineStructure(mode, lst, red.offsets, red.rank_count, red.offset_width)


@dataclass
class Spine:
    level: int
    tau: int
    nodes: List[int]
    structures: Dict[ModeSpec, SpineStructure]

    @property
    def top(self) -> int:
        return self.nodes[0]


@dataclass
class LevelInfo:
    level: int
    tau: int
    pieces: int = 0
    clusters: int = 0
    spines: List[int] = field(default_factory=list)


# -- selection --------------------------------------------------------------

_pivot_rng = random.Random(0x5E1EC7)


def _quickselect(keys: List, k: int):
    """k-th smallest (0-based) of distinct keys, expected linear time."""
    lo_keys = keys
    while True:
        if len(lo_keys) <= 8:
            return sorted(lo_keys)[k]
        pivot = lo_keys[_pivot_rng.randrange(len(lo_keys))]
        smaller = [x for x in lo_keys if x < pivot]
        if k < len(smaller):
            lo_keys = smaller
            continue
        if k == len(smaller):
            return pivot
        k -= len(smaller) + 1
        lo_keys = [x for x in lo_keys if x > pivot]


def select_topk(pairs: Sequence[ConsecutivePair], k: int, key=close_key) -> List[ConsecutivePair]:
    """The ``k`` first pairs under ``key`` (default: distance, then left position), sorted."""
    if k <= 0:
        return []
    if k >= len(pairs):
        return sorted(pairs, key=key)
    keyed = [(key(p), p) for p in pairs]
    kth = _quickselect([kk for kk, _ in keyed], k - 1)
    out = [p for kk, p in keyed if kk <= kth]
    out.sort(key=key)
    return out


# -- the index --------------------------------------------------------------

class RecursiveIndex:
    """Recursive clustering index holding one spine structure per requested mode."""

    kind = "recursive"

    def __init__(self, ti: TextIndex, epsilon=1, modes: Sequence[str] = ("topk",),
                 alpha: Optional[int] = None, beta: Optional[int] = None, check: bool = False,
                 terminal_tau: int = TERMINAL_TAU, _empty: bool = False):
        self.text_index = ti
        self.epsilon = as_fraction(epsilon)
        self.terminal_tau = terminal_tau
        unknown = set(modes) - set(MODES_RECURSIVE)
        if unknown:
            raise ValueError(f"unknown modes {sorted(unknown)}")
        self.mode_names = tuple(m for m in MODES_RECURSIVE if m in modes)
        self.alpha = alpha
        self.beta = beta
        self.specs: Dict[str, ModeSpec] = {m: mode_spec(m, ti.n, alpha, beta) for m in self.mode_names}
        self.taus = tau_schedule(ti.n, self.epsilon, terminal_tau)
        self.levels: List[LevelInfo] = []
        self.spines: List[Spine] = []
        self.route_spine = [-1] * ti.node_count
        self.route_depth = [0] * ti.node_count
        self.partitions: List[List[ClusterPartition]] = []
        if not _empty:
            self._build(check)

    @property
    def unique_specs(self) -> List[ModeSpec]:
        return list(dict.fromkeys(self.specs.values()))

    def _build(self, check: bool) -> None:
        ti = self.text_index
        kids = ti.children.__getitem__
        pieces: List[Tuple[int, Optional[List[int]]]] = [(0, None)]
        for level, tau in enumerate(self.taus[1:-1], 1):
            info = LevelInfo(level, tau, pieces=len(pieces))
            parts = []
            next_pieces = []
            for root, rc in pieces:
                part = cluster_partition(kids, root, tau, rc)
                attach_spines(part, ti.parent)
                if check:
                    check_partition(part, kids, ti.parent)
                parts.append(part)
                info.clusters += len(part.clusters)
                for c in part.clusters:
                    if c.is_path:
                        self._add_spine(level, tau, c.spine)
                        info.spines.append(len(self.spines) - 1)
                    next_pieces.extend(hanging_pieces(c, kids))
            self.levels.append(info)
            self.partitions.append(parts)
            pieces = next_pieces

    def _add_spine(self, level: int, tau: int, nodes: List[int]) -> None:
        sid = len(self.spines)
        structures = {spec: build_spine_structure(self.text_index, nodes, tau, spec) for spec in self.unique_specs}
        self.spines.append(Spine(level, tau, nodes, structures))
        for d, v in enumerate(nodes, 1):
            if self.route_spine[v] < 0:
                self.route_spine[v] = sid
                self.route_depth[v] = d

    # -- accounting ---------------------------------------------------
    def level_stats(self) -> List[dict]:
        out = []
        for info in self.levels:
            segs = {spec.code: 0 for spec in self.unique_specs}
            bits = 0
            for sid in info.spines:
                for spec, st in self.spines[sid].structures.items():
                    segs[spec.code] += st.segment_count
                    bits += st.stored_bits()
            out.append({
                "level": info.level,
                "tau": info.tau,
                "pieces": info.pieces,
                "clusters": info.clusters,
                "spines": len(info.spines),
                "segments": sum(segs.values()),
                "segments_by_mode": segs,
                "stored_bits": bits,
            })
        return out

    @property
    def total_segments(self) -> int:
        return sum(st.segment_count for sp in self.spines for st in sp.structures.values())

    def enumeration_bound(self, v: int) -> int:
        """Upper bound on occurrences below ``v`` implied by its routing."""
        sid = self.route_spine[v]
        if sid >= 0:
            return self.taus[self.spines[sid].level - 1]
        return self.taus[len(self.levels)]

    # -- query plumbing -------------------------------------------------
    def structure(self, spec: ModeSpec, mode_name: str) -> ModeSpec:
        if spec not in self.unique_specs:
            raise ModeError(mode_name)
        return spec

    def locate(self, pattern: bytes):
        return self.text_index.locus(pattern)

    def spine_pairs(self, sid: int, spec: ModeSpec, depth: int, k: Optional[int], stats: Optional[QueryStats]):
        """Iterate decoded pairs of the alive list at ``depth``; ``k`` caps the walk."""
        sp = self.spines[sid]
        st = sp.structures[spec]
        base = self.text_index.lo[sp.top]
        ti = self.text_index
        if k is not None:
            for _, seg in st.list.first(depth, k, stats):
                yield st.decode(seg, ti, base)
        else:
            for _, seg in st.list.iter_version(depth, stats):
                yield st.decode(seg, ti, base)

    def enumerate_pairs(self, loc, stats: Optional[QueryStats]) -> List[ConsecutivePair]:
        occ = self.text_index.occurrences_in_text_order(loc.sa_range)
        if stats is not None:
            stats.occurrences_enumerated += len(occ)
        return pairs_from_occurrences(occ)

    def _topk(self, pattern: bytes, k: int, spec: ModeSpec, key, stats: Optional[QueryStats]) -> List[ConsecutivePair]:
        if stats is not None:
            stats.route = "none"
        if k <= 0:
            return []
        loc = self.locate(pattern)
        if loc is None:
            return []
        v = loc.node
        sid = self.route_spine[v]
        if sid >= 0:
            sp = self.spines[sid]
            if stats is not None:
                stats.level, stats.tau = sp.level, sp.tau
            if k <= sp.tau:
                if stats is not None:
                    stats.route = "spine"
                return list(self.spine_pairs(sid, spec, self.route_depth[v], k, stats))
            if stats is not None:
                stats.route = "fallback"
        elif stats is not None:
            stats.route = "terminal"
        return select_topk(self.enumerate_pairs(loc, stats), k, key)

    def query_topk(self, pattern: bytes, k: int, stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
        return self._topk(pattern, k, self.structure(CLOSEST, "topk"), close_key, stats)

    def query_topk_far(self, pattern: bytes, k: int, stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
        return self._topk(pattern, k, self.structure(FARTHEST, "far"), far_key, stats)


def build_recursive_index(text: bytes, epsilon=1, modes: Sequence[str] = ("topk",), alpha: Optional[int] = None,
                          beta: Optional[int] = None, check: bool = False, terminal_tau: int = TERMINAL_TAU) -> RecursiveIndex:
    return RecursiveIndex(TextIndex(text), epsilon, modes, alpha, beta, check, terminal_tau)


def query_topk_linear(index: RecursiveIndex, pattern: bytes, k: int, stats: Optional[QueryStats] = None) -> List[ConsecutivePair]:
    return index.query_topk(pattern, k, stats)
