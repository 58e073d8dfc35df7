"""``closeocc`` command line: build, query, oracle, stats, verify, bench.

Exit codes: 0 success, 1 usage error, 2 data error, 3 verification mismatch.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from . import oracle
from .cluster import MODES_RECURSIVE, TERMINAL_TAU, RecursiveIndex, as_fraction
from .extensions import (
    query_gap_fixed_alpha,
    query_gap_fixed_beta,
    query_nonoverlapping,
    query_topk_far,
)
from .heavypath import MODES_FULL, FullIndex, ModeError, decompose_heavy_paths
from .persistent import layout_bits, packed_layout
from .serialize import MAGIC, IndexFormatError, load_index, save_index
from .text import TextError, TextIndex

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- helpers ------------------------------------------------------------------

def read_bytes(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from e


def parse_modes(spec: str) -> List[str]:
    modes = [m.strip() for m in spec.split(",") if m.strip()]
    if not modes:
        raise UsageError("--modes must name at least one mode")
    return modes


def make_index(text: bytes, structure: str, epsilon=1, modes: Sequence[str] = ("topk",), alpha=None, beta=None,
               terminal_tau: int = TERMINAL_TAU, check: bool = False):
    """Validate flags and build; flag problems raise UsageError, input problems DataError."""
    modes = list(dict.fromkeys(modes))
    if structure == "full":
        bad = [m for m in modes if m not in MODES_FULL]
        if bad:
            raise UsageError(f"full structure supports modes {','.join(MODES_FULL)}; got {','.join(bad)}")
    elif structure == "recursive":
        bad = [m for m in modes if m not in MODES_RECURSIVE]
        if bad:
            raise UsageError(f"unknown modes {','.join(bad)}")
        try:
            epsilon = as_fraction(epsilon)
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(str(e)) from e
        if terminal_tau < 1:
            raise UsageError("--terminal-tau must be >= 1")
    else:
        raise UsageError(f"unknown structure {structure!r}")
    if ("gap-alpha" in modes) != (alpha is not None):
        raise UsageError("--alpha is required exactly when mode gap-alpha is requested")
    if ("gap-beta" in modes) != (beta is not None):
        raise UsageError("--beta is required exactly when mode gap-beta is requested")
    for name, v in (("alpha", alpha), ("beta", beta)):
        if v is not None and v < 1:
            raise UsageError(f"--{name} must be >= 1")
    try:
        ti = TextIndex(text)
    except TextError as e:
        raise DataError(str(e)) from e
    if structure == "full":
        return FullIndex(ti, modes)
    return RecursiveIndex(ti, epsilon, modes, alpha, beta, check=check, terminal_tau=terminal_tau)


def read_pattern(args) -> bytes:
    if args.pattern is not None:
        p = os.fsencode(args.pattern)
    else:
        p = read_bytes(args.pattern_file)
    if not p:
        raise UsageError("pattern must be nonempty")
    return p


def format_pairs(pairs) -> str:
    return "".join(f"{p[0]} {p[1]} {p[1] - p[0]}\n" for p in pairs)


def run_query(index, pattern: bytes, family: str, value: Optional[int]):
    if family == "topk":
        return index.query_topk(pattern, value)
    if family == "topk-far":
        return query_topk_far(index, pattern, value)
    if family == "gap-beta":
        return query_gap_fixed_alpha(index, pattern, value)
    if family == "gap-alpha":
        return query_gap_fixed_beta(index, pattern, value)
    if family == "nonoverlap":
        return query_nonoverlapping(index, pattern)
    raise UsageError(f"unknown query {family}")


def run_oracle(text: bytes, pattern: bytes, family: str, value: Optional[int], alpha=None, beta=None):
    if family == "topk":
        return oracle.oracle_topk(text, pattern, value)
    if family == "topk-far":
        return oracle.oracle_topk_far(text, pattern, value)
    if family == "gap-beta":
        if alpha is None:
            raise UsageError("--gap-beta needs --alpha for the oracle")
        return oracle.oracle_gap(text, pattern, alpha, value)
    if family == "gap-alpha":
        if beta is None:
            raise UsageError("--gap-alpha needs --beta for the oracle")
        return oracle.oracle_gap(text, pattern, value, beta, descending=True)
    if family == "nonoverlap":
        return oracle.oracle_nonoverlap(text, pattern)
    raise UsageError(f"unknown query {family}")


def _query_family(args):
    for family in ("topk", "topk_far", "gap_beta", "gap_alpha"):
        v = getattr(args, family)
        if v is not None:
            if v < 0:
                raise UsageError(f"--{family.replace('_', '-')} must be >= 0")
            return family.replace("_", "-"), v
    return "nonoverlap", None


def stored_bits(index) -> int:
    if isinstance(index, FullIndex):
        return sum(layout_bits(packed_layout(l, [p.i for p in l.payload])) for ls in index.lists.values() for l in ls)
    return sum(row["stored_bits"] for row in index.level_stats())


def stats_report(index, seconds: Optional[float] = None, timing_key: str = "build_seconds") -> dict:
    ti = index.text_index
    hpd = index.hpd if isinstance(index, FullIndex) else decompose_heavy_paths(ti)
    rep = {
        "structure": index.kind,
        "n": ti.n,
        "node_count": ti.node_count,
        "heavy_path_count": len(hpd.paths),
        "modes": list(index.modes if isinstance(index, FullIndex) else index.mode_names),
    }
    if isinstance(index, FullIndex):
        rep["total_segments"] = index.total_segments
        rep["levels"] = []
    else:
        eps = index.epsilon
        rep.update({
            "epsilon": [eps.numerator, eps.denominator],
            "alpha": index.alpha,
            "beta": index.beta,
            "terminal_tau": index.terminal_tau,
            "schedule": index.taus,
            "total_segments": index.total_segments,
            "levels": index.level_stats(),
        })
    rep["stored_bits"] = sum(r["stored_bits"] for r in rep["levels"]) if rep["levels"] else stored_bits(index)
    rep[timing_key] = None if seconds is None else round(seconds, 6)
    return rep


# -- verification ---------------------------------------------------------------

@dataclass
class Mismatch:
    label: str
    family: str
    pattern: bytes
    value: Optional[int]
    expected: list
    got: list

    def line(self) -> str:
        v = "" if self.value is None else f" {self.value}"
        return (f"MISMATCH {self.label} --pattern {self.pattern!r} --{self.family}{v}: "
                f"expected {[tuple(p) for p in self.expected]} got {[tuple(p) for p in self.got]}")


def _families(index) -> List[str]:
    if isinstance(index, FullIndex):
        fam = []
        if "topk" in index.lists:
            fam.append("topk")
        if "far" in index.lists:
            fam += ["topk-far", "nonoverlap"]
        return fam
    fam = []
    names = index.mode_names
    if "topk" in names:
        fam.append("topk")
    if "far" in names:
        fam.append("topk-far")
    if "gap-alpha" in names:
        fam.append("gap-beta")
    if "gap-beta" in names:
        fam.append("gap-alpha")
    if "nonoverlap" in names:
        fam.append("nonoverlap")
    return fam


def _check(index, text: bytes, pattern: bytes, family: str, value) -> Optional[tuple]:
    alpha = getattr(index, "alpha", None)
    beta = getattr(index, "beta", None)
    try:
        got = run_query(index, pattern, family, value)
    except (IndexError, KeyError, AssertionError) as e:
        got = [("error", repr(e))]
    want = run_oracle(text, pattern, family, value, alpha, beta)
    return None if got == want else (want, got)


def _minimize(index, text: bytes, pattern: bytes, family: str, value) -> tuple:
    """Shrink the failing query: shorter pattern (while still failing), then smaller value."""
    changed = True
    while changed and len(pattern) > 1:
        changed = False
        for cand in (pattern[1:], pattern[:-1]):
            if _check(index, text, cand, family, value):
                pattern, changed = cand, True
                break
    if value is not None:
        lowest = {"gap-beta": getattr(index, "alpha", 0), "gap-alpha": 1}.get(family, 0)
        for v in range(lowest, value):
            if _check(index, text, pattern, family, v):
                value = v
                break
    return pattern, value


def _random_value(rng: random.Random, index, family: str, occ: int) -> Optional[int]:
    if family in ("topk", "topk-far"):
        return rng.choice([0, 1, 2, 5, max(occ - 1, 0), occ + 3])
    if family == "gap-beta":
        return index.alpha + rng.randrange(0, 12)
    if family == "gap-alpha":
        return rng.randint(1, index.beta)
    return None


def verify_indexes(text: bytes, indexes: Dict[str, object], trials: int, rng: random.Random,
                   minimize: bool = True) -> tuple:
    """Run ``trials`` random queries per index and family; return (cases, first mismatch or None)."""
    n = len(text)
    cases = 0
    for _ in range(trials):
        i = rng.randrange(n)
        pattern = text[i:i + rng.randint(1, min(8, n - i))]
        occ = len(oracle.oracle_occurrences(text, pattern))
        for label, index in indexes.items():
            for family in _families(index):
                value = _random_value(rng, index, family, occ)
                cases += 1
                bad = _check(index, text, pattern, family, value)
                if bad:
                    if minimize:
                        pattern, value = _minimize(index, text, pattern, family, value)
                        bad = _check(index, text, pattern, family, value)
                    return cases, Mismatch(label, family, pattern, value, *bad)
    return cases, None


def verification_suite(text: bytes, epsilon, rng: random.Random, terminal_tau: int = TERMINAL_TAU) -> Dict[str, object]:
    """Every structure and mode on one text, with random fixed gap endpoints."""
    ti = TextIndex(text)
    alpha = rng.randint(1, 8)
    beta = rng.randint(1, 16)
    out = {"full": FullIndex(ti, MODES_FULL)}
    for tt in dict.fromkeys((terminal_tau, 2)):
        out[f"recursive(eps={epsilon},terminal={tt},alpha={alpha},beta={beta})"] = RecursiveIndex(
            ti, epsilon, MODES_RECURSIVE, alpha, beta, check=True, terminal_tau=tt)
    return out


# -- subcommands ----------------------------------------------------------------

def cmd_build(args) -> int:
    text = read_bytes(args.text)
    t0 = time.perf_counter()
    index = make_index(text, args.structure, args.epsilon, parse_modes(args.modes), args.alpha, args.beta,
                       args.terminal_tau)
    elapsed = time.perf_counter() - t0
    size = save_index(index, args.output)
    print(f"wrote {args.output}: {index.kind} index, n={index.text_index.n}, {size} bytes, "
          f"built in {elapsed:.3f}s", file=sys.stderr)
    return EXIT_OK


def cmd_query(args) -> int:
    pattern = read_pattern(args)
    family, value = _query_family(args)
    index = load_index(args.index)
    sys.stdout.write(format_pairs(run_query(index, pattern, family, value)))
    return EXIT_OK


def cmd_oracle(args) -> int:
    pattern = read_pattern(args)
    family, value = _query_family(args)
    text = read_bytes(args.text)
    sys.stdout.write(format_pairs(run_oracle(text, pattern, family, value, args.alpha, args.beta)))
    return EXIT_OK


def cmd_stats(args) -> int:
    data = read_bytes(args.path)
    if data[:4] == MAGIC:
        t0 = time.perf_counter()
        index = load_index(args.path)
        rep = stats_report(index, time.perf_counter() - t0, "load_seconds")
    else:
        t0 = time.perf_counter()
        index = make_index(data, args.structure, args.epsilon, parse_modes(args.modes), args.alpha, args.beta,
                           args.terminal_tau)
        rep = stats_report(index, time.perf_counter() - t0, "build_seconds")
    json.dump(rep, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    text = read_bytes(args.text)
    try:
        epsilon = as_fraction(args.epsilon)
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(str(e)) from e
    rng = random.Random(args.seed)
    try:
        if args.index:
            indexes = {args.index: load_index(args.index)}
            if indexes[args.index].text_index.text != text:
                raise DataError("index was built from a different text")
        else:
            indexes = verification_suite(text, epsilon, rng, args.terminal_tau)
    except (TextError, AssertionError) as e:
        if isinstance(e, AssertionError):
            print(f"MISMATCH invariant: {e}")
            return EXIT_MISMATCH
        raise DataError(str(e)) from e
    cases, bad = verify_indexes(text, indexes, args.trials, rng)
    if bad:
        print(bad.line())
        print(f"FAIL after {cases} cases (seed {args.seed})")
        return EXIT_MISMATCH
    print(f"PASS {cases} cases over {len(indexes)} structures (seed {args.seed})")
    return EXIT_OK


def _bench_patterns(text: bytes, rng: random.Random, count: int) -> List[bytes]:
    n = len(text)
    out = []
    for _ in range(count):
        i = rng.randrange(n)
        out.append(text[i:i + rng.randint(1, min(3, n - i))])
    return out


def _time_queries(fn: Callable, patterns, k: int, threads: int) -> float:
    for p in patterns[:5]:
        fn(p, k)  # warmup
    t0 = time.perf_counter()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(lambda p: fn(p, k), patterns))
    else:
        for p in patterns:
            fn(p, k)
    return (time.perf_counter() - t0) / len(patterns)


def cmd_bench(args) -> int:
    text = read_bytes(args.text)
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else [len(text)]
    ks = [int(k) for k in args.ks.split(",")]
    structures = ["full", "recursive"] if args.structure == "both" else [args.structure]
    rng = random.Random(args.seed)
    header = ["structure", "n", "build_s", "stored_bits"] + [f"k={k} us/q" for k in ks]
    rows = [header]
    for size in sizes:
        prefix = text[:size]
        patterns = _bench_patterns(prefix, rng, args.queries)
        for structure in structures:
            t0 = time.perf_counter()
            index = make_index(prefix, structure, args.epsilon)
            build = time.perf_counter() - t0
            row = [structure, str(len(prefix)), f"{build:.3f}", str(stored_bits(index))]
            for k in ks:
                row.append(f"{1e6 * _time_queries(index.query_topk, patterns, k, args.threads):.1f}")
            rows.append(row)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    for r in rows:
        print("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def _add_build_flags(p, with_structure_default="full"):
    p.add_argument("--structure", choices=["full", "recursive"], default=with_structure_default)
    p.add_argument("--epsilon", default="1", help="recursion exponent in (0, 1], e.g. 1, 0.5 or 1/3")
    p.add_argument("--modes", default="topk", help="comma-separated: topk,far,gap-alpha,gap-beta,nonoverlap")
    p.add_argument("--alpha", type=int, help="minimum gap fixed at build time (mode gap-alpha)")
    p.add_argument("--beta", type=int, help="maximum gap fixed at build time (mode gap-beta)")
    p.add_argument("--terminal-tau", type=int, default=TERMINAL_TAU)


def _add_query_flags(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--pattern", help="pattern as literal bytes")
    src.add_argument("--pattern-file", help="file whose exact bytes are the pattern")
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--topk", type=int, metavar="K")
    q.add_argument("--topk-far", type=int, metavar="K")
    q.add_argument("--gap-beta", type=int, metavar="BETA", help="upper gap on a gap-alpha index")
    q.add_argument("--gap-alpha", type=int, metavar="ALPHA", help="lower gap on a gap-beta index")
    q.add_argument("--nonoverlap", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="closeocc", description="Top-k close consecutive occurrence indexes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="build an index file from a text file")
    p.add_argument("text")
    p.add_argument("-o", "--output", required=True)
    _add_build_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="query an index file")
    p.add_argument("index")
    _add_query_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("oracle", help="brute-force answer for the same flags as query")
    p.add_argument("text")
    _add_query_flags(p)
    p.add_argument("--alpha", type=int, help="fixed lower gap for --gap-beta")
    p.add_argument("--beta", type=int, help="fixed upper gap for --gap-alpha")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("stats", help="structural statistics of an index file (or of a text, built on the fly)")
    p.add_argument("path")
    _add_build_flags(p, "recursive")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("verify", help="fuzz all structures and modes against the oracle")
    p.add_argument("text")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", default="1")
    p.add_argument("--terminal-tau", type=int, default=TERMINAL_TAU)
    p.add_argument("--index", help="verify this index file instead of freshly built ones")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="build and query timings")
    p.add_argument("text")
    p.add_argument("--sizes", help="comma-separated prefix lengths (default: whole text)")
    p.add_argument("--ks", default="1,4,16,64")
    p.add_argument("--structure", choices=["full", "recursive", "both"], default="both")
    p.add_argument("--epsilon", default="1")
    p.add_argument("--queries", type=int, default=200)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"closeocc: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ModeError as e:
        print(f"closeocc: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (DataError, IndexFormatError, TextError) as e:
        print(f"closeocc: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"closeocc: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"closeocc: error: cannot read {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
