"""Memory-efficient Four-Russians solver: O(n^3 / log n) time, O(n^2 / log n) words.

No n x n table is ever built. Values are recovered from per-block anchors
(``D``, ``E``, ``F``) plus 0/1 difference vectors packed into words
(``L_t``, ``R_t``); a precomputed central table answers the best split
inside any full block between i and j in one lookup.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _backend
from .model import (
    CounterSet,
    DEFAULT_RULE,
    FoldResult,
    InputError,
    PairingRule,
    RnaSequence,
    SecondaryStructure,
    check_w,
    default_w,
    mem_budget_bytes,
)


@dataclass(frozen=True)
class BlockPartition:
    n: int
    w: int

    @property
    def k(self) -> int:
        return self.n // self.w + 1

    def interval(self, s: int) -> tuple[int, int]:
        """Inclusive bounds of block ``s``; the last block may be short or empty."""
        if not 0 <= s < self.k:
            raise IndexError(s)
        lo = s * self.w + 1
        hi = self.n if s == self.k - 1 else (s + 1) * self.w
        return lo, hi

    def block_of(self, pos: int) -> int:
        return (pos - 1) // self.w


def encode_vector(components, w: int) -> int:
    if len(components) != w:
        raise ValueError(f"expected {w} components, got {len(components)}")
    value = 0
    for q, bit in enumerate(components):
        if bit not in (0, 1):
            raise ValueError(f"component {q + 1} is {bit!r}, not 0/1")
        value |= bit << q
    return value


def decode_vector(value: int, w: int) -> list[int]:
    if not 0 <= value < (1 << w):
        raise ValueError(f"{value} does not fit in {w} bits")
    return [(value >> q) & 1 for q in range(w)]


@dataclass(frozen=True)
class CentralTable:
    """Best in-block split offset and its gain over offset 1, for every (left, right) vector pair."""

    w: int
    rep: np.ndarray = field(repr=False)
    dev: np.ndarray = field(repr=False)
    steps: int = 0

    def entry(self, u: int, v: int) -> tuple[int, int]:
        idx = (u << self.w) | v
        return int(self.rep[idx]), int(self.dev[idx])

    @property
    def words(self) -> int:
        return int(self.rep.size + self.dev.size)


@lru_cache(maxsize=16)
def _central_cached(w: int, backend: str) -> CentralTable:
    size = 1 << (2 * w)
    rep = np.zeros(size, dtype=np.int8)
    dev = np.zeros(size, dtype=np.int8)
    counters = np.zeros(7, dtype=np.int64)
    _backend.get(backend).central_table(w, rep, dev, counters)
    rep.flags.writeable = False
    dev.flags.writeable = False
    return CentralTable(w, rep, dev, int(counters[4]))


def precompute_central(w: int, backend: str | None = None) -> CentralTable:
    """Shared, read-only table for block width ``w`` (cached per width)."""
    w = check_w(w)
    if 2 * (1 << (2 * w)) > mem_budget_bytes():
        raise InputError(f"central table for w={w} exceeds the memory budget")
    return _central_cached(w, backend or _backend.DEFAULT)


class BlockTables:
    """Every table the memory-efficient solver keeps, with word accounting."""

    def __init__(self, n: int, w: int):
        self.partition = BlockPartition(n, w)
        self.n, self.w = n, w
        k = self.partition.k
        self.shapes: dict[str, tuple[int, ...]] = {}
        self.D = self._alloc("D", (n + 2, w + 1), np.int32)
        self.E = self._alloc("E", (n + 2, k), np.int32)
        self.F = self._alloc("F", (k, n + 2), np.int32)
        self.G = self._alloc("G", (n + 2, w + 1), np.int32)
        self.L = self._alloc("L_t", (n + 2, k), np.int64)
        self.R = self._alloc("R_t", (n + 2, k), np.int64)
        self.shapes["N"] = (n + 2,)
        self.shapes["O"] = (n + 2,)
        self.shapes["Q"] = (n + 2,)
        self.central: CentralTable | None = None
        self.columns_done = 0

    def _alloc(self, name, shape, dtype):
        self.shapes[name] = shape
        return np.zeros(shape, dtype=dtype)

    @property
    def word_count(self) -> int:
        total = sum(int(np.prod(s)) for s in self.shapes.values())
        if self.central is not None:
            total += self.central.words
        return total

    def assert_no_square_table(self) -> None:
        """Fail if any table spans n rows by n columns (meaningful for w >= 2)."""
        n = self.n
        for name, shape in self.shapes.items():
            if len(shape) == 2 and shape[0] >= n and shape[1] >= n and self.w >= 2:
                raise AssertionError(f"table {name} has shape {shape} for n={n}")


def _needs_central(n: int, w: int) -> bool:
    # a full block strictly between i's and j's blocks needs at least 2w+1 positions
    return n >= 2 * w + 1


def fill_fr(seq: RnaSequence, rule: PairingRule = DEFAULT_RULE, w: int | None = None,
            backend: str | None = None, counters: CounterSet | None = None) -> BlockTables:
    """Run the column sweep and return the populated compressed tables."""
    n = len(seq)
    w = default_w(n) if w is None else check_w(w)
    tables = BlockTables(n, w)
    counters = counters if counters is not None else CounterSet()
    raw = np.zeros(7, dtype=np.int64)
    cdev = None
    if _needs_central(n, w):
        tables.central = precompute_central(w, backend)
        cdev = tables.central.dev
        raw[4] += tables.central.steps
    kern = _backend.get(backend)
    kern.fr_fill(seq.codes(), rule.matrix(), rule.min_loop, w,
                 tables.D, tables.E, tables.F, tables.G, tables.L, tables.R, cdev, raw)
    tables.columns_done = n
    counters.absorb(raw)
    counters.peak_table_words = max(counters.peak_table_words, tables.word_count)
    return tables


def reconstruct_m(tables: BlockTables, i: int, j: int) -> int:
    """M[i, j] from an anchor cell plus a prefix of one right difference vector."""
    if not 1 <= i <= j <= tables.n:
        if i == j + 1:
            return 0
        raise IndexError((i, j))
    if j > tables.columns_done:
        raise ValueError(f"column {j} is not finalized")
    if i == j:
        return 0
    w = tables.w
    m = (i - 1) // w
    if m == (j - 1) // w:
        return int(tables.D[i, j - i + 1])
    q = i - m * w
    v = int(tables.R[j, m])
    anchor = int(tables.F[m, j])
    if q == 1:
        return anchor + (v & 1)
    return anchor - ((v >> 1) & ((1 << (q - 2)) - 1)).bit_count()


def traceback_fr(tables: BlockTables, seq: RnaSequence, rule: PairingRule, i: int, j: int,
                 counters: CounterSet | None = None,
                 backend: str | None = None) -> SecondaryStructure:
    if tables.columns_done < tables.n:
        raise ValueError("traceback requires a completed DP")
    raw = np.zeros(7, dtype=np.int64)
    pairs = _backend.get(backend).fr_traceback(
        seq.codes(), rule.matrix(), rule.min_loop, tables.w,
        tables.D, tables.F, tables.R, i, j, raw)
    if counters is not None:
        counters.absorb(raw)
    return SecondaryStructure.of(pairs)


def fold_fr(seq: RnaSequence, rule: PairingRule = DEFAULT_RULE, w: int | None = None,
            backend: str | None = None) -> FoldResult:
    counters = CounterSet()
    tables = fill_fr(seq, rule, w, backend, counters)
    n = len(seq)
    if n == 0:
        return FoldResult(0, SecondaryStructure(), counters, tables.w)
    score = reconstruct_m(tables, 1, n)
    st = traceback_fr(tables, seq, rule, 1, n, counters, backend)
    return FoldResult(score, st, counters, tables.w)
