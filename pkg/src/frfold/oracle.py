"""Reference O(n^3) solver over a full table, plus a brute-force enumerator.

This is deliberately the plainest correct implementation; every faster
solver in the package is tested against it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    CounterSet,
    FoldResult,
    InputError,
    PairingRule,
    RnaSequence,
    SecondaryStructure,
    TableFault,
    DEFAULT_RULE,
)

MAX_ENUMERATION_LENGTH = 16


@dataclass(frozen=True)
class FullDpTable:
    """``M[i, j]`` for 1 <= i <= j+1 <= n+1; row/column padding holds zeros."""

    M: np.ndarray
    n: int

    def cell(self, i: int, j: int) -> int:
        if i > j:
            return 0
        return int(self.M[i, j])


def dp_table(seq: RnaSequence, rule: PairingRule = DEFAULT_RULE) -> FullDpTable:
    n = len(seq)
    M = np.zeros((n + 2, n + 2), dtype=np.int32)
    for j in range(2, n + 1):
        for i in range(j - 1, 0, -1):
            best = max(M[i + 1, j], M[i, j - 1])
            if rule.can_pair(seq, i, j):
                best = max(best, M[i + 1, j - 1] + 1)
            # split p in [i, j-1]: M[i, p] + M[p+1, j]
            split = (M[i, i:j] + M[i + 1:j + 1, j]).max()
            M[i, j] = max(best, split)
    return FullDpTable(M=M, n=n)


def traceback_full(cell, seq: RnaSequence, rule: PairingRule, i: int, j: int,
                   counters: CounterSet | None = None) -> SecondaryStructure:
    """Recover an optimal structure on S[i..j] from any M-value accessor.

    Ties are broken in a fixed order: pair, M[i+1,j], M[i,j-1], leftmost split.
    """
    pairs = []
    stack = [(i, j)]
    while stack:
        a, b = stack.pop()
        if counters is not None:
            counters.traceback_nodes += 1
        if a >= b:
            continue
        c = cell(a, b)
        if rule.can_pair(seq, a, b) and c == cell(a + 1, b - 1) + 1:
            pairs.append((a, b))
            stack.append((a + 1, b - 1))
            continue
        if c == cell(a + 1, b):
            stack.append((a + 1, b))
            continue
        if c == cell(a, b - 1):
            stack.append((a, b - 1))
            continue
        for p in range(a, b):
            if c == cell(a, p) + cell(p + 1, b):
                stack.append((p + 1, b))
                stack.append((a, p))
                break
        else:
            raise TableFault(f"no traceback case matches M[{a},{b}]={c}")
    return SecondaryStructure.of(pairs)


def fold_oracle(seq: RnaSequence, rule: PairingRule = DEFAULT_RULE) -> FoldResult:
    table = dp_table(seq, rule)
    n = len(seq)
    counters = CounterSet(peak_table_words=int(table.M.size))
    if n == 0:
        return FoldResult(0, SecondaryStructure(), counters)
    rows = table.M.tolist()

    def cell(a, b):
        return rows[a][b] if a <= b else 0

    st = traceback_full(cell, seq, rule, 1, n, counters)
    return FoldResult(cell(1, n), st, counters)


def _best_pairing(seq: RnaSequence, rule: PairingRule, i: int, j: int) -> int:
    # Walks every non-crossing pair set on [i, j]: position i is either left
    # unpaired or bonded to some k, splitting the rest into inside/outside.
    if j - i < 1:
        return 0
    best = _best_pairing(seq, rule, i + 1, j)
    for k in range(i + 1, j + 1):
        if rule.can_pair(seq, i, k):
            inner = _best_pairing(seq, rule, i + 1, k - 1)
            outer = _best_pairing(seq, rule, k + 1, j)
            best = max(best, 1 + inner + outer)
    return best


def enumerate_optimal_count(seq: RnaSequence, rule: PairingRule = DEFAULT_RULE) -> int:
    """Exhaustive maximum pair count; exponential, so limited to n <= 16."""
    if len(seq) > MAX_ENUMERATION_LENGTH:
        raise InputError(
            f"enumeration limited to n <= {MAX_ENUMERATION_LENGTH}, got {len(seq)}")
    return _best_pairing(seq, rule, 1, len(seq))


def iter_structures(seq: RnaSequence, rule: PairingRule, i: int, j: int):
    """Yield every non-crossing pair set on S[i..j] as a tuple of pairs."""
    if j - i < 1:
        yield ()
        return
    for rest in iter_structures(seq, rule, i + 1, j):
        yield rest
    for k in range(i + 1, j + 1):
        if rule.can_pair(seq, i, k):
            for inner in iter_structures(seq, rule, i + 1, k - 1):
                for outer in iter_structures(seq, rule, k + 1, j):
                    yield ((i, k),) + inner + outer
