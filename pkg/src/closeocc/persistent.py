"""Partially persistent sorted doubly linked list over vertical segments.

Versions are integer depths ``1..N``; version ``y`` holds exactly the
segments with ``y_start <= y <= y_end``.  Persistence uses node copying:
every cell has its creation-time links plus at most ``SLOTS`` timestamped
modifications per direction.  A write to a full direction copies the cell
and rewrites the (at most two) cells pointing at it, which may cascade.

Potential argument for the cell bound: each list update issues two link
writes, a copy frees at least ``SLOTS`` used slots and issues two writes,
so copies <= 2 * updates <= 4 * segments and cells <= 5 * segments.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, List, Optional, Sequence, Tuple

from sortedcontainers import SortedList

SLOTS = 2
CELL_BOUND = 5
NIL = -1
NEXT, PREV = 0, 1


class SegmentError(ValueError):
    pass


class QueryError(IndexError):
    pass


@dataclass(frozen=True)
class LifeSegment:
    """Vertical segment at ``x`` alive on depths ``[y_start, y_end]``.

    ``tie`` breaks equal ``x`` (defaults to ``payload``); it only shapes the
    build order and is not stored.
    """

    x: int
    y_start: int
    y_end: int
    payload: Any
    tie: Any = None

    @property
    def order_tie(self):
        return self.payload if self.tie is None else self.tie


@dataclass
class QueryStats:
    """Caller-owned instrumentation for one or more queries."""

    cells_visited: int = 0
    occurrences_enumerated: int = 0
    route: str = ""
    level: int = 0
    tau: int = 0


class VersionedOrderedList:
    """Read side of the structure; built by :func:`build_versioned_list`.

    Cell arrays: ``x``, ``payload``, ``base`` (two links each), ``born``
    (version that created the cell) and ``mods`` (per direction, a list of
    ``(version, cell)`` in increasing version, or None).
    """

    def __init__(self, n_versions: int, order: str = "asc"):
        if order not in ("asc", "desc"):
            raise ValueError(f"unknown order {order!r}")
        self.n_versions = n_versions
        self.order = order
        self.x: List[int] = []
        self.payload: List[Any] = []
        self.next0: List[int] = []
        self.prev0: List[int] = []
        self.born: List[int] = []
        self.next_mods: List[Optional[List[Tuple[int, int]]]] = []
        self.prev_mods: List[Optional[List[Tuple[int, int]]]] = []
        self.heads: List[int] = [NIL] * (n_versions + 1)
        self.segment_count = 0

    @property
    def cell_count(self) -> int:
        return len(self.x)

    @property
    def slot_count(self) -> int:
        return sum(len(m) for m in self.next_mods if m) + sum(len(m) for m in self.prev_mods if m)

    def next_at(self, c: int, y: int) -> int:
        v = self.next0[c]
        mods = self.next_mods[c]
        if mods:
            for t, w in mods:
                if t > y:
                    break
                v = w
        return v

    def prev_at(self, c: int, y: int) -> int:
        v = self.prev0[c]
        mods = self.prev_mods[c]
        if mods:
            for t, w in mods:
                if t > y:
                    break
                v = w
        return v

    def _check_version(self, y: int) -> None:
        if not 1 <= y <= self.n_versions:
            raise QueryError(f"depth {y} outside 1..{self.n_versions}")

    def iter_version(self, y: int, stats: Optional[QueryStats] = None):
        """Yield ``(x, payload)`` of the alive segments at ``y`` in list order."""
        self._check_version(y)
        c = self.heads[y]
        x, payload = self.x, self.payload
        while c != NIL:
            if stats is not None:
                stats.cells_visited += 1
            yield x[c], payload[c]
            c = self.next_at(c, y)

    def first(self, y: int, k: int, stats: Optional[QueryStats] = None) -> List[Tuple[int, Any]]:
        self._check_version(y)
        out = []
        if k <= 0:
            return out
        c = self.heads[y]
        x, payload = self.x, self.payload
        while c != NIL:
            out.append((x[c], payload[c]))
            if stats is not None:
                stats.cells_visited += 1
            if len(out) == k:
                break
            c = self.next_at(c, y)
        return out

    def version(self, y: int) -> List[Tuple[int, Any]]:
        return list(self.iter_version(y))


class _Builder:
    """Ephemeral construction state; discarded once all events are applied."""

    def __init__(self, out: VersionedOrderedList):
        self.out = out
        self.head = NIL
        self.cur: dict = {}          # element -> its latest cell
        self.elem: List[Hashable] = []  # cell -> element
        self.keys = SortedList()

    def _new_cell(self, x, payload, nxt, prv, t, e) -> int:
        o = self.out
        o.x.append(x)
        o.payload.append(payload)
        o.next0.append(nxt)
        o.prev0.append(prv)
        o.born.append(t)
        o.next_mods.append(None)
        o.prev_mods.append(None)
        self.elem.append(e)
        return len(o.x) - 1

    def _latest(self, c: int, d: int) -> int:
        o = self.out
        mods = (o.next_mods if d == NEXT else o.prev_mods)[c]
        if mods:
            return mods[-1][1]
        return (o.next0 if d == NEXT else o.prev0)[c]

    def _write(self, c: int, d: int, value: int, t: int) -> None:
        o = self.out
        if o.born[c] == t:
            (o.next0 if d == NEXT else o.prev0)[c] = value
            return
        table = o.next_mods if d == NEXT else o.prev_mods
        mods = table[c]
        if mods is None:
            table[c] = [(t, value)]
        elif mods[-1][0] == t:
            mods[-1] = (t, value)
        elif len(mods) < SLOTS:
            mods.append((t, value))
        else:
            self._copy(c, d, value, t)

    def _copy(self, c: int, d: int, value: int, t: int) -> None:
        o = self.out
        nxt, prv = self._latest(c, NEXT), self._latest(c, PREV)
        if d == NEXT:
            nxt = value
        else:
            prv = value
        e = self.elem[c]
        c2 = self._new_cell(o.x[c], o.payload[c], nxt, prv, t, e)
        self.cur[e] = c2
        if prv == NIL:
            self.head = c2
        else:
            self._write(prv, NEXT, c2, t)
        # the write above may have copied our successor and already relinked us
        nxt = self._latest(c2, NEXT)
        if nxt != NIL:
            self._write(nxt, PREV, c2, t)

    def insert(self, key, e, x, payload, t: int) -> None:
        keys = self.keys
        keys.add((key, e))
        i = keys.index((key, e))
        pe = keys[i - 1][1] if i > 0 else None
        se = keys[i + 1][1] if i + 1 < len(keys) else None
        p = self.cur[pe] if pe is not None else NIL
        s = self.cur[se] if se is not None else NIL
        c = self._new_cell(x, payload, s, p, t, e)
        self.cur[e] = c
        if p == NIL:
            self.head = c
        else:
            self._write(p, NEXT, c, t)
        if se is not None:
            self._write(self.cur[se], PREV, self.cur[e], t)

    def delete(self, key, e, t: int) -> None:
        keys = self.keys
        i = keys.index((key, e))
        pe = keys[i - 1][1] if i > 0 else None
        se = keys[i + 1][1] if i + 1 < len(keys) else None
        del keys[i]
        del self.cur[e]
        if pe is None:
            self.head = self.cur[se] if se is not None else NIL
        else:
            self._write(self.cur[pe], NEXT, self.cur[se] if se is not None else NIL, t)
        if se is not None:
            self._write(self.cur[se], PREV, self.cur[pe] if pe is not None else NIL, t)


def build_versioned_list(segments: Sequence[LifeSegment], n_versions: int, order: str = "asc") -> VersionedOrderedList:
    """Sweep depths ``1..n_versions``: deletions at ``y_end + 1``, then insertions at ``y_start``."""
    out = VersionedOrderedList(n_versions, order)
    out.segment_count = len(segments)
    starts: List[List[int]] = [[] for _ in range(n_versions + 2)]
    ends: List[List[int]] = [[] for _ in range(n_versions + 2)]
    for idx, seg in enumerate(segments):
        if not 1 <= seg.y_start <= seg.y_end <= n_versions:
            raise SegmentError(f"segment {seg} outside depths 1..{n_versions}")
        starts[seg.y_start].append(idx)
        ends[seg.y_end + 1].append(idx)
    sign = 1 if order == "asc" else -1
    b = _Builder(out)

    def key(idx):
        seg = segments[idx]
        return (sign * seg.x, seg.order_tie)

    for y in range(1, n_versions + 1):
        for idx in ends[y]:
            b.delete(key(idx), idx, y)
        for idx in starts[y]:
            seg = segments[idx]
            b.insert(key(idx), idx, seg.x, seg.payload, y)
        out.heads[y] = b.head
    return out


def smallest_segments(lst: VersionedOrderedList, y0: int, k: int, stats: Optional[QueryStats] = None):
    """First ``k`` alive segments at ``y0`` in ascending ``x``."""
    if lst.order != "asc":
        raise QueryError("smallest_segments needs an ascending list")
    return lst.first(y0, k, stats)


def largest_segments(lst: VersionedOrderedList, y0: int, k: int, stats: Optional[QueryStats] = None):
    """First ``k`` alive segments at ``y0`` in descending ``x``."""
    if lst.order != "desc":
        raise QueryError("largest_segments needs a descending list")
    return lst.first(y0, k, stats)


def packed_layout(lst: VersionedOrderedList, payload_ids: Optional[Sequence[int]] = None) -> dict:
    """Bit-packed arrays holding ``lst``; payloads become ints (``payload_ids`` or the payloads themselves)."""
    from .packed import PackedIntArray, width_for

    cells = lst.cell_count
    ids = list(lst.payload) if payload_ids is None else list(payload_ids)
    nil = cells  # NIL is encoded as one past the last cell
    w_cell = width_for(nil)
    w_time = width_for(lst.n_versions)

    def enc(c):
        return nil if c == NIL else c

    arrays = {
        "x": PackedIntArray(width_for(max(lst.x, default=0)), lst.x),
        "payload": PackedIntArray(width_for(max(ids, default=0)), ids),
        "next0": PackedIntArray(w_cell, map(enc, lst.next0)),
        "prev0": PackedIntArray(w_cell, map(enc, lst.prev0)),
        "born": PackedIntArray(w_time, lst.born),
        "heads": PackedIntArray(w_cell, map(enc, lst.heads)),
    }
    for name, table in (("next", lst.next_mods), ("prev", lst.prev_mods)):
        counts = [len(m) if m else 0 for m in table]
        flat = [e for m in table if m for e in m]
        arrays[name + "_count"] = PackedIntArray(width_for(SLOTS), counts)
        arrays[name + "_time"] = PackedIntArray(w_time, [t for t, _ in flat])
        arrays[name + "_cell"] = PackedIntArray(w_cell, [enc(c) for _, c in flat])
    return arrays


def unpack_layout(arrays: dict, n_versions: int, order: str, segment_count: int,
                  payloads: Optional[Sequence[Any]] = None) -> VersionedOrderedList:
    lst = VersionedOrderedList(n_versions, order)
    lst.segment_count = segment_count
    cells = len(arrays["x"])

    def dec(c):
        return NIL if c == cells else c

    lst.x = arrays["x"].tolist()
    ids = arrays["payload"].tolist()
    lst.payload = ids if payloads is None else [payloads[i] for i in ids]
    lst.next0 = [dec(c) for c in arrays["next0"].tolist()]
    lst.prev0 = [dec(c) for c in arrays["prev0"].tolist()]
    lst.born = arrays["born"].tolist()
    lst.heads = [dec(c) for c in arrays["heads"].tolist()]
    for name, table in (("next", lst.next_mods), ("prev", lst.prev_mods)):
        times = iter(arrays[name + "_time"].tolist())
        targets = iter(arrays[name + "_cell"].tolist())
        for cnt in arrays[name + "_count"].tolist():
            table.append([(next(times), dec(next(targets))) for _ in range(cnt)] or None)
    return lst


def layout_bits(arrays: dict) -> int:
    return sum(a.nbits for a in arrays.values())
