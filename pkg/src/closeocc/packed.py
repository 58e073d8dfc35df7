"""Fixed-width unsigned integer arrays packed little-endian into bytes."""
from __future__ import annotations

from typing import Iterable, List

import numpy as np


def width_for(max_value: int) -> int:
    """Bits needed to hold every value in ``0..max_value``."""
    return max(int(max_value), 0).bit_length()


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


class PackedIntArray:
    __slots__ = ("width", "length", "buf", "_mask")

    def __init__(self, width: int, values: Iterable[int] = (), length: int = None, buf: bytes = None):
        self.width = width
        self._mask = (1 << width) - 1
        if buf is not None:
            self.length = length
            self.buf = bytearray(buf)
            return
        values = list(values)
        self.length = len(values)
        nbytes = (self.length * width + 7) // 8 + 1
        if not values or not width:
            if any(values):
                raise ValueError(f"nonzero value does not fit in {width} bits")
            self.buf = bytearray(nbytes)
            return
        if width > 63:
            self.buf = bytearray(nbytes)
            for i, v in enumerate(values):
                self._put(i, v)
            return
        arr = np.asarray(values, dtype=np.int64)
        if arr.min() < 0 or int(arr.max()) > self._mask:
            bad = int(arr.max()) if arr.min() >= 0 else int(arr.min())
            raise ValueError(f"value {bad} does not fit in {width} bits")
        bits = (arr[:, None] >> np.arange(width, dtype=np.int64)) & 1
        packed = np.packbits(bits.astype(np.uint8).ravel(), bitorder="little").tobytes()
        self.buf = bytearray(packed.ljust(nbytes, b"\0"))

    def _put(self, i: int, v: int) -> None:
        if v < 0 or v > self._mask:
            raise ValueError(f"value {v} does not fit in {self.width} bits")
        if not self.width:
            return
        bit = i * self.width
        byte, shift = bit >> 3, bit & 7
        nb = (shift + self.width + 7) >> 3
        cur = int.from_bytes(self.buf[byte:byte + nb], "little")
        cur |= v << shift
        self.buf[byte:byte + nb] = cur.to_bytes(nb, "little")

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        if not self.width:
            return 0
        bit = i * self.width
        byte, shift = bit >> 3, bit & 7
        nb = (shift + self.width + 7) >> 3
        return (int.from_bytes(self.buf[byte:byte + nb], "little") >> shift) & self._mask

    def tolist(self) -> List[int]:
        if not self.length or not self.width or self.width > 63:
            return [self[i] for i in range(self.length)]
        total = self.length * self.width
        bits = np.unpackbits(np.frombuffer(bytes(self.buf), dtype=np.uint8), bitorder="little")[:total]
        weights = np.left_shift(np.int64(1), np.arange(self.width, dtype=np.int64))
        return (bits.reshape(self.length, self.width).astype(np.int64) @ weights).tolist()

    @property
    def nbits(self) -> int:
        return self.length * self.width

    def payload_bytes(self) -> bytes:
        return bytes(self.buf[:(self.nbits + 7) // 8])

    def __eq__(self, other) -> bool:
        return isinstance(other, PackedIntArray) and self.width == other.width and self.tolist() == other.tolist()

    def __repr__(self) -> str:
        return f"PackedIntArray(width={self.width}, length={self.length})"
