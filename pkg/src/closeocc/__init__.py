"""Indexes reporting the closest (or farthest) consecutive occurrences of a pattern."""

from .cluster import RecursiveIndex, build_recursive_index
from .extensions import (
    GapConfig,
    query_gap_fixed_alpha,
    query_gap_fixed_beta,
    query_nonoverlapping,
    query_topk_far,
)
from .heavypath import FullIndex, ModeError, build_full_index, query_topk
from .oracle import ConsecutivePair
from .serialize import IndexFormatError, load_index, save_index
from .text import TextIndex

__all__ = [
    "ConsecutivePair",
    "FullIndex",
    "GapConfig",
    "IndexFormatError",
    "ModeError",
    "RecursiveIndex",
    "TextIndex",
    "build_full_index",
    "build_recursive_index",
    "load_index",
    "query_gap_fixed_alpha",
    "query_gap_fixed_beta",
    "query_nonoverlapping",
    "query_topk",
    "query_topk_far",
    "save_index",
]
