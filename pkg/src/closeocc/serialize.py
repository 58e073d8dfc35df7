"""Binary index files.

Layout (all integers little-endian)::

    "SITC"  u32 version
    u8 kind  u32 modes  u32 eps_num  u32 eps_den  i64 alpha  i64 beta  u32 terminal_tau
    u32 section count, then per section: 4-byte tag, u64 length, body
    8-byte blake2b digest of everything before it

Packed integer arrays are stored as ``u8 width, u64 length, u64 nbytes,
bytes``.  The suffix tree and heavy paths are rebuilt from the stored suffix
and LCP arrays on load; the persistent lists are stored cell for cell.
"""
from __future__ import annotations

import hashlib
import struct
from fractions import Fraction
from typing import Dict, List, Tuple, Union

from .cluster import (
    MODES_RECURSIVE,
    LevelInfo,
    ModeSpec,
    RecursiveIndex,
    Spine,
    SpineStructure,
)
from .heavypath import MODES_FULL, FullIndex
from .oracle import ConsecutivePair
from .packed import PackedIntArray, width_for
from .persistent import VersionedOrderedList, packed_layout, unpack_layout
from .text import TextIndex

MAGIC = b"SITC"
FORMAT_VERSION = 1
KIND_FULL, KIND_RECURSIVE = 0, 1
MODE_BITS = {"topk": 1, "far": 2, "gap-alpha": 4, "gap-beta": 8, "nonoverlap": 16}
DIGEST_SIZE = 8
_HEADER = struct.Struct("<BIIIqqI")

Index = Union[FullIndex, RecursiveIndex]


class IndexFormatError(ValueError):
    """The file is not a readable index (bad magic, version, checksum or layout)."""


def _digest(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=DIGEST_SIZE).digest()


def modes_to_mask(modes) -> int:
    return sum(MODE_BITS[m] for m in set(modes))


def mask_to_modes(mask: int) -> Tuple[str, ...]:
    if mask & ~sum(MODE_BITS.values()):
        raise IndexFormatError(f"unknown mode bits in {mask:#x}")
    return tuple(m for m, bit in MODE_BITS.items() if mask & bit)


class _Writer:
    def __init__(self):
        self.parts: List[bytes] = []

    def u8(self, v): self.parts.append(struct.pack("<B", v))
    def u32(self, v): self.parts.append(struct.pack("<I", v))
    def u64(self, v): self.parts.append(struct.pack("<Q", v))
    def i64(self, v): self.parts.append(struct.pack("<q", v))

    def blob(self, b: bytes) -> None:
        self.u64(len(b))
        self.parts.append(bytes(b))

    def packed(self, arr: PackedIntArray) -> None:
        self.u8(arr.width)
        self.u64(len(arr))
        self.blob(arr.payload_bytes())

    def ints(self, values) -> None:
        values = list(values)
        self.packed(PackedIntArray(width_for(max(values, default=0)), values))

    def layout(self, arrays: Dict[str, PackedIntArray]) -> None:
        self.u8(len(arrays))
        for name in sorted(arrays):
            self.blob(name.encode())
            self.packed(arrays[name])

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise IndexFormatError("truncated index data")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def _unpack(self, fmt: str):
        st = struct.Struct(fmt)
        return st.unpack(self._take(st.size))[0]

    def u8(self): return self._unpack("<B")
    def u32(self): return self._unpack("<I")
    def u64(self): return self._unpack("<Q")
    def i64(self): return self._unpack("<q")

    def blob(self) -> bytes:
        return self._take(self.u64())

    def packed(self) -> PackedIntArray:
        width, length = self.u8(), self.u64()
        body = self.blob()
        if len(body) != (length * width + 7) // 8:
            raise IndexFormatError("packed array size mismatch")
        return PackedIntArray(width, length=length, buf=body + b"\0")

    def ints(self) -> List[int]:
        return self.packed().tolist()

    def layout(self) -> Dict[str, PackedIntArray]:
        return {self.blob().decode(): self.packed() for _ in range(self.u8())}

    def done(self) -> None:
        if self.pos != len(self.data):
            raise IndexFormatError("trailing bytes in section")


def _opt(v) -> int:
    return -1 if v is None else int(v)


def _unopt(v: int):
    return None if v < 0 else v


# -- writing ------------------------------------------------------------------

def _text_sections(ti: TextIndex):
    w = _Writer()
    w.blob(ti.text)
    yield b"TEXT", w.getvalue()
    w = _Writer()
    w.ints(ti.sa)
    w.ints(ti.lcp)
    yield b"SUFA", w.getvalue()


def _full_sections(index: FullIndex):
    for mode in ("topk", "far"):
        if mode not in index.lists:
            continue
        w = _Writer()
        w.blob(mode.encode())
        lists = index.lists[mode]
        w.u32(len(lists))
        for lst in lists:
            w.u64(lst.segment_count)
            # a payload (i, j) is recovered from i and the stored distance
            w.layout(packed_layout(lst, [p.i for p in lst.payload]))
        yield b"LIST", w.getvalue()


def _recursive_sections(index: RecursiveIndex):
    specs = index.unique_specs
    w = _Writer()
    w.ints(index.taus)
    w.u32(len(specs))
    for spec in specs:
        w.u8(0 if spec.order == "asc" else 1)
        w.i64(_opt(spec.bound))
    yield b"SCHD", w.getvalue()
    w = _Writer()
    w.u32(len(index.levels))
    for info in index.levels:
        w.u32(info.level)
        w.u64(info.tau)
        w.u64(info.pieces)
        w.u64(info.clusters)
        w.ints(info.spines)
    yield b"LEVL", w.getvalue()
    w = _Writer()
    w.u64(len(index.spines))
    for sp in index.spines:
        w.u32(sp.level)
        w.u64(sp.tau)
        w.ints(sp.nodes)
        for spec in specs:
            st = sp.structures[spec]
            w.u64(st.list.segment_count)
            w.u64(st.rank_count)
            w.u8(st.offset_width)
            w.packed(st.offsets)
            w.layout(packed_layout(st.list))
    yield b"SPIN", w.getvalue()
    w = _Writer()
    w.ints(s + 1 for s in index.route_spine)
    w.ints(index.route_depth)
    yield b"ROUT", w.getvalue()


def dumps(index: Index) -> bytes:
    ti = index.text_index
    if isinstance(index, FullIndex):
        kind, eps, alpha, beta, terminal = KIND_FULL, Fraction(1), None, None, 0
        sections = list(_text_sections(ti)) + list(_full_sections(index))
        modes = index.modes
    else:
        kind, eps, alpha, beta, terminal = KIND_RECURSIVE, index.epsilon, index.alpha, index.beta, index.terminal_tau
        sections = list(_text_sections(ti)) + list(_recursive_sections(index))
        modes = index.mode_names
    w = _Writer()
    w.parts.append(MAGIC)
    w.u32(FORMAT_VERSION)
    w.parts.append(_HEADER.pack(kind, modes_to_mask(modes), eps.numerator, eps.denominator,
                                _opt(alpha), _opt(beta), terminal))
    w.u32(len(sections))
    for tag, body in sections:
        w.parts.append(tag)
        w.blob(body)
    data = w.getvalue()
    return data + _digest(data)


def save_index(index: Index, path) -> int:
    data = dumps(index)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


# -- reading ------------------------------------------------------------------

def _read_header(data: bytes):
    if len(data) < len(MAGIC) + 4 + DIGEST_SIZE or data[:4] != MAGIC:
        raise IndexFormatError("not an index file (bad magic)")
    body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
    version = struct.unpack_from("<I", data, 4)[0]
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"unsupported format version {version} (expected {FORMAT_VERSION})")
    if _digest(body) != digest:
        raise IndexFormatError("checksum mismatch")
    r = _Reader(body)
    r.pos = 8
    header = _HEADER.unpack(r._take(_HEADER.size))
    sections: Dict[bytes, List[bytes]] = {}
    for _ in range(r.u32()):
        tag = r._take(4)
        sections.setdefault(tag, []).append(r.blob())
    r.done()
    return header, sections


def _one(sections, tag: bytes) -> _Reader:
    bodies = sections.get(tag)
    if not bodies or len(bodies) != 1:
        raise IndexFormatError(f"expected exactly one {tag.decode()} section")
    return _Reader(bodies[0])


def _load_text(sections) -> TextIndex:
    r = _one(sections, b"TEXT")
    text = r.blob()
    r.done()
    r = _one(sections, b"SUFA")
    sa, lcp = r.ints(), r.ints()
    r.done()
    return TextIndex(text, sa, lcp)


def _load_full(ti: TextIndex, modes, sections) -> FullIndex:
    index = FullIndex(ti, modes, lists={})
    lists: Dict[str, List[VersionedOrderedList]] = {}
    for body in sections.get(b"LIST", []):
        r = _Reader(body)
        mode = r.blob().decode()
        if mode not in ("topk", "far"):
            raise IndexFormatError(f"unknown list family {mode!r}")
        order = "asc" if mode == "topk" else "desc"
        count = r.u32()
        if count != len(index.hpd.paths):
            raise IndexFormatError("heavy path count mismatch")
        out = []
        for path in index.hpd.paths:
            segs = r.u64()
            lst = unpack_layout(r.layout(), len(path), order, segs)
            lst.payload = [ConsecutivePair(i, i + x) for i, x in zip(lst.payload, lst.x)]
            out.append(lst)
        r.done()
        lists[mode] = out
    index.lists = lists
    return index


def _load_recursive(ti: TextIndex, modes, eps, alpha, beta, terminal, sections) -> RecursiveIndex:
    index = RecursiveIndex(ti, eps, modes, alpha, beta, terminal_tau=terminal, _empty=True)
    r = _one(sections, b"SCHD")
    taus = r.ints()
    specs = []
    for _ in range(r.u32()):
        order = "asc" if r.u8() == 0 else "desc"
        specs.append(ModeSpec(order, _unopt(r.i64())))
    r.done()
    if taus != index.taus or specs != index.unique_specs:
        raise IndexFormatError("stored schedule or modes disagree with header")
    r = _one(sections, b"LEVL")
    for _ in range(r.u32()):
        info = LevelInfo(r.u32(), r.u64(), r.u64(), r.u64())
        info.spines = r.ints()
        index.levels.append(info)
    r.done()
    r = _one(sections, b"SPIN")
    for _ in range(r.u64()):
        level, tau, nodes = r.u32(), r.u64(), r.ints()
        structures = {}
        for spec in specs:
            segs, ranks, width = r.u64(), r.u64(), r.u8()
            offsets = r.packed()
            lst = unpack_layout(r.layout(), len(nodes), spec.order, segs)
            structures[spec] = SpineStructure(spec, lst, offsets, ranks, width)
        index.spines.append(Spine(level, tau, nodes, structures))
    r.done()
    r = _one(sections, b"ROUT")
    index.route_spine = [s - 1 for s in r.ints()]
    index.route_depth = r.ints()
    r.done()
    if len(index.route_spine) != ti.node_count or len(index.route_depth) != ti.node_count:
        raise IndexFormatError("routing table size mismatch")
    return index


def loads(data: bytes) -> Index:
    (kind, mask, num, den, alpha, beta, terminal), sections = _read_header(bytes(data))
    modes = mask_to_modes(mask)
    ti = _load_text(sections)
    if kind == KIND_FULL:
        if not set(modes) <= set(MODES_FULL):
            raise IndexFormatError(f"full index cannot hold modes {modes}")
        return _load_full(ti, modes, sections)
    if kind == KIND_RECURSIVE:
        if not set(modes) <= set(MODES_RECURSIVE) or den == 0:
            raise IndexFormatError("bad recursive index header")
        return _load_recursive(ti, modes, Fraction(num, den), _unopt(alpha), _unopt(beta), terminal, sections)
    raise IndexFormatError(f"unknown structure kind {kind}")


def load_index(path) -> Index:
    with open(path, "rb") as fh:
        return loads(fh.read())
