"""Two-log Four-Russians solver: O(n^3 / log^2 n) time.

For a fixed column j, rows are finalized one whole block at a time. Each
lower block carries a partial result (best split restricted to the right of
some frontier) as an anchor plus a 0/1 staircase over its rows. Moving the
frontier one block left costs two lookups: the partial central table gives
the block's own contribution, the updation table merges it in.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .model import (
    CounterSet,
    DEFAULT_RULE,
    FoldResult,
    PairingRule,
    RnaSequence,
    SecondaryStructure,
    TableFault,
    check_w,
    default_w,
    mem_budget_bytes,
)
from .oracle import dp_table

DENSE, CACHED, AUTO = "dense", "cached", "auto"
_UP_ENTRY_BYTES = 8


def dense_updation_entries(n: int, w: int) -> int:
    return (n + 1) * (2 * n + 1) * (1 << (2 * w))


def resolve_mode(n: int, w: int, mode: str = AUTO, budget_bytes: int | None = None) -> str:
    """Turn ``auto`` into ``dense`` or ``cached`` by comparing the dense size to the budget."""
    if mode == AUTO:
        budget = mem_budget_bytes() if budget_bytes is None else budget_bytes
        fits = dense_updation_entries(n, w) * _UP_ENTRY_BYTES <= budget
        return DENSE if fits else CACHED
    if mode not in (DENSE, CACHED):
        raise ValueError(f"unknown updation mode {mode!r}")
    return mode


@dataclass
class UpdationTable:
    """Partial-staircase merge results keyed by (d1, d2, u1, u2).

    ``dense`` holds every key in one flat array; otherwise results are
    computed on first use and cached. Both give identical answers.
    """

    n: int
    w: int
    mode: str
    dense: np.ndarray | None = field(default=None, repr=False)
    cache: dict = field(default_factory=dict, repr=False)
    steps: int = 0

    @classmethod
    def build(cls, n: int, w: int, mode: str = AUTO, budget_bytes: int | None = None,
              backend: str | None = None) -> "UpdationTable":
        mode = resolve_mode(n, w, mode, budget_bytes)
        if mode == CACHED:
            return cls(n, w, CACHED)
        out = np.zeros(dense_updation_entries(n, w), dtype=np.int64)
        raw = np.zeros(7, dtype=np.int64)
        _backend.get(backend).updation_dense(n, w, out, raw)
        return cls(n, w, DENSE, dense=out, steps=int(raw[4]))

    def query(self, d1: int, d2: int, u1: int, u2: int) -> tuple[int, int]:
        key = (((d1 * (2 * self.n + 1)) + d2) << (2 * self.w)) | (u1 << self.w) | u2
        if self.dense is not None:
            packed = int(self.dense[key])
            return packed & ((1 << self.w) - 1), packed >> self.w
        hit = self.cache.get(key)
        if hit is None:
            hit = _backend.get("python").updation_entry(d1, d2, u1, u2, self.w, self.n)
            self.cache[key] = hit
        return hit

    @property
    def words(self) -> int:
        if self.dense is not None:
            return int(self.dense.size)
        return 2 * len(self.cache)


def precompute_updation(n: int, w: int, mode: str = DENSE,
                        backend: str | None = None) -> UpdationTable:
    return UpdationTable.build(n, check_w(w), mode, backend=backend)


def compute_partial_central(right_vec: int, left_vec: int, block_right_vecs, w: int,
                            backend: str | None = None) -> tuple[int, int]:
    """Row staircase and deviation of the best split inside one block.

    ``right_vec`` is the current column's right vector over the upper block,
    ``left_vec`` the left vector of the lower block's last row over the upper
    block, ``block_right_vecs`` the lower block's right vectors at each column
    of the upper block.
    """
    if len(block_right_vecs) != w:
        raise ValueError(f"need {w} per-column right vectors")
    return _backend.get(backend).partial_central(left_vec, list(block_right_vecs), right_vec, w)


def staircase_values(code: int, anchor: int, w: int) -> list[int]:
    """Expand (code, anchor-at-last-row) into values for rows 1..w of a block."""
    return [anchor + ((code >> (q - 1)) & ((1 << (w - q)) - 1)).bit_count()
            for q in range(1, w + 1)]


class FullResultTable:
    """Final M values plus the block tables of the two-log solver."""

    def __init__(self, n: int, w: int):
        self.n, self.w = n, w
        k = n // w + 1
        self.k = k
        self.M = np.zeros((n + 2, n + 2), dtype=np.int32)
        self.L = np.zeros((n + 2, k), dtype=np.int64)
        self.R = np.zeros((n + 2, k), dtype=np.int64)
        self.Rp_code = np.zeros((n + 2, k), dtype=np.int64)
        self.Rp_dev = np.zeros((n + 2, k), dtype=np.int64)
        cp = k * k * (1 << w) if k >= 2 else 0
        self.Cp_code = np.zeros(cp, dtype=np.int64)
        self.Cp_dev = np.zeros(cp, dtype=np.int64)

    @property
    def words(self) -> int:
        return sum(int(a.size) for a in (self.M, self.L, self.R, self.Rp_code,
                                         self.Rp_dev, self.Cp_code, self.Cp_dev))

    def cell(self, i: int, j: int) -> int:
        return 0 if i > j else int(self.M[i, j])


class DebugChecker:
    """Verifies every partial read against values derived from the oracle table."""

    def __init__(self, seq: RnaSequence, rule: PairingRule, w: int):
        self.M = dp_table(seq, rule).M.tolist()
        self.w = w
        self.reads = 0

    def _partial(self, i, j, t, o):
        M = self.M
        return max(M[i][l] + M[l + 1][j] for l in range(t, o + 1))

    def frontier(self, j, g, t, code, dev):
        w, M = self.w, self.M
        anchor = M[(g + 1) * w][j - 1] + dev
        got = staircase_values(code, anchor, w)
        want = [self._partial(g * w + q, j, t, j - 1) for q in range(1, w + 1)]
        self.reads += 1
        if got != want:
            raise TableFault(f"partial right data for (j={j}, block {g}, t={t}): {got} != {want}")

    def central(self, j, g, y, code, dev):
        w, M = self.w, self.M
        a, ga = (y + 1) * w, (g + 1) * w
        anchor = M[ga][a] + M[a + 1][j] + dev
        got = staircase_values(code, anchor, w)
        want = [self._partial(g * w + q, j, y * w + 1, a) for q in range(1, w + 1)]
        self.reads += 1
        if got != want:
            raise TableFault(f"partial central data for (j={j}, {g}, {y}): {got} != {want}")


def fill_fr2(seq: RnaSequence, rule: PairingRule = DEFAULT_RULE, w: int | None = None,
             backend: str | None = None, updation: str = AUTO,
             budget_bytes: int | None = None, debug: bool = False,
             counters: CounterSet | None = None) -> tuple[FullResultTable, UpdationTable]:
    n = len(seq)
    w = default_w(n) if w is None else check_w(w)
    counters = counters if counters is not None else CounterSet()
    tables = FullResultTable(n, w)
    up = UpdationTable.build(n, w, updation, budget_bytes, backend)
    raw = np.zeros(7, dtype=np.int64)
    raw[4] += up.steps
    if debug:
        kern = _backend.get("python")
        check = DebugChecker(seq, rule, w)
    else:
        kern = _backend.get(backend)
        check = None
    args = (seq.codes(), rule.matrix(), rule.min_loop, w, tables.M, tables.L, tables.R,
            tables.Rp_code, tables.Rp_dev, tables.Cp_code, tables.Cp_dev,
            up.dense, up.cache, raw)
    if check is not None:
        kern.fr2_fill(*args, check=check)
    else:
        kern.fr2_fill(*args)
    counters.absorb(raw)
    counters.peak_table_words = max(counters.peak_table_words, tables.words + up.words)
    return tables, up


def fold_fr2(seq: RnaSequence, rule: PairingRule = DEFAULT_RULE, w: int | None = None,
             backend: str | None = None, updation: str = AUTO,
             budget_bytes: int | None = None, debug: bool = False) -> FoldResult:
    counters = CounterSet()
    tables, up = fill_fr2(seq, rule, w, backend, updation, budget_bytes, debug, counters)
    n = len(seq)
    result_w = tables.w
    if n == 0:
        return FoldResult(0, SecondaryStructure(), counters, result_w)
    raw = np.zeros(7, dtype=np.int64)
    pairs = _backend.get(backend).full_traceback(
        tables.M, seq.codes(), rule.matrix(), rule.min_loop, 1, n, raw)
    counters.absorb(raw)
    fold = FoldResult(tables.cell(1, n), SecondaryStructure.of(pairs), counters, result_w)
    return fold
