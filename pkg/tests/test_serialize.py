import hashlib
import random
import struct
from fractions import Fraction

import pytest

from conftest import BATMAN, random_text, substring_pattern
from closeocc.cluster import MODES_RECURSIVE, RecursiveIndex
from closeocc.extensions import query_gap_fixed_alpha, query_gap_fixed_beta, query_nonoverlapping
from closeocc.heavypath import MODES_FULL, FullIndex
from closeocc.serialize import (
    DIGEST_SIZE,
    MAGIC,
    IndexFormatError,
    dumps,
    load_index,
    loads,
    mask_to_modes,
    modes_to_mask,
    save_index,
)
from closeocc.text import TextIndex


def reseal(body: bytes) -> bytes:
    return body + hashlib.blake2b(body, digest_size=DIGEST_SIZE).digest()


@pytest.fixture(scope="module")
def rec():
    return RecursiveIndex(TextIndex(BATMAN), Fraction(1, 2), MODES_RECURSIVE, alpha=3, beta=4, terminal_tau=2)


def test_header_layout(rec):
    data = dumps(rec)
    assert data[:4] == MAGIC
    assert struct.unpack_from("<I", data, 4)[0] == 1
    kind, mask, num, den = struct.unpack_from("<BIII", data, 8)
    assert (kind, num, den) == (1, 1, 2)
    assert mask_to_modes(mask) == MODES_RECURSIVE


def test_mode_mask_round_trip():
    for modes in (("topk",), ("far", "nonoverlap"), MODES_RECURSIVE):
        assert set(mask_to_modes(modes_to_mask(modes))) == set(modes)
    with pytest.raises(IndexFormatError):
        mask_to_modes(1 << 9)


def test_recursive_round_trip(rec, tmp_path):
    path = tmp_path / "batman.idx"
    save_index(rec, path)
    back = load_index(path)
    assert path.read_bytes() == dumps(back)
    assert back.taus == rec.taus and back.route_spine == rec.route_spine
    for a in range(len(BATMAN)):
        p = BATMAN[a:a + 2]
        for k in range(8):
            assert back.query_topk(p, k) == rec.query_topk(p, k)
            assert back.query_topk_far(p, k) == rec.query_topk_far(p, k)
        assert query_gap_fixed_alpha(back, p, 6) == query_gap_fixed_alpha(rec, p, 6)
        assert query_gap_fixed_beta(back, p, 2) == query_gap_fixed_beta(rec, p, 2)
        assert query_nonoverlapping(back, p) == query_nonoverlapping(rec, p)


def test_full_round_trip():
    rng = random.Random(41)
    for _ in range(10):
        text = random_text(rng, rng.randint(1, 300), rng.choice([2, 4, 26]))
        idx = FullIndex(TextIndex(text), MODES_FULL)
        back = loads(dumps(idx))
        assert dumps(back) == dumps(idx)
        assert back.modes == idx.modes
        for _ in range(10):
            p = substring_pattern(rng, text)
            assert back.query_topk(p, 5) == idx.query_topk(p, 5)
            assert back.query_topk_far(p, 5) == idx.query_topk_far(p, 5)
            assert query_nonoverlapping(back, p) == query_nonoverlapping(idx, p)


def test_same_input_same_bytes():
    a = dumps(RecursiveIndex(TextIndex(BATMAN), 1, ("topk", "far"), terminal_tau=2))
    b = dumps(RecursiveIndex(TextIndex(BATMAN), 1, ("far", "topk"), terminal_tau=2))
    assert a == b


def test_rejects_corruption(rec):
    data = bytearray(dumps(rec))
    flipped = bytes(data[:100]) + bytes([data[100] ^ 1]) + bytes(data[101:])
    with pytest.raises(IndexFormatError, match="checksum"):
        loads(flipped)
    with pytest.raises(IndexFormatError, match="magic"):
        loads(b"XXXX" + bytes(data[4:]))
    with pytest.raises(IndexFormatError):
        loads(bytes(data[:10]))


def test_rejects_version_mismatch(rec):
    body = bytearray(dumps(rec)[:-DIGEST_SIZE])
    struct.pack_into("<I", body, 4, 2)
    with pytest.raises(IndexFormatError, match="version 2"):
        loads(reseal(bytes(body)))


def test_rejects_inconsistent_sections(rec):
    body = bytearray(dumps(rec)[:-DIGEST_SIZE])
    # claim one section fewer than stored
    at = 4 + 4 + struct.calcsize("<BIIIqqI")
    count = struct.unpack_from("<I", body, at)[0]
    struct.pack_into("<I", body, at, count - 1)
    with pytest.raises(IndexFormatError):
        loads(reseal(bytes(body)))
