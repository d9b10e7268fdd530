"""CNF membership testing: naive CYK and a bit-packed variant using O(g n^2 / w) words.

Grammar file format::

    # comment
    start: S
    nullable: true
    S -> A B
    A -> 'a'
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .model import CounterSet, InputError

_BINARY = re.compile(r"^([^\s']+)\s*->\s*([^\s']+)\s+([^\s']+)$")
_UNIT = re.compile(r"^([^\s']+)\s*->\s*'(.)'$")


@dataclass(frozen=True)
class CnfGrammar:
    nonterminals: tuple[str, ...]
    terminals: frozenset[str]
    unit_rules: frozenset[tuple[str, str]]
    binary_rules: frozenset[tuple[str, str, str]]
    start: str
    nullable: bool = False

    def __post_init__(self):
        names = set(self.nonterminals)
        if not names:
            raise InputError("grammar needs at least one nonterminal")
        if self.start not in names:
            raise InputError(f"start symbol {self.start!r} is not a nonterminal")
        for a, t in self.unit_rules:
            if a not in names or t not in self.terminals:
                raise InputError(f"rule {a} -> '{t}' references an undeclared symbol")
        for rule in self.binary_rules:
            missing = [x for x in rule if x not in names]
            if missing:
                raise InputError(f"rule {rule[0]} -> {rule[1]} {rule[2]} references {missing}")

    @classmethod
    def from_rules(cls, start: str, units, binaries, nullable: bool = False) -> "CnfGrammar":
        order: list[str] = [start]
        for rule in list(units) + list(binaries):
            syms = (rule[0],) if len(rule) == 2 else rule
            for x in syms:
                if x not in order:
                    order.append(x)
        return cls(tuple(order), frozenset(t for _, t in units), frozenset(units),
                   frozenset(binaries), start, nullable)

    @property
    def g(self) -> int:
        return len(self.nonterminals)

    def index(self) -> dict[str, int]:
        return {a: x for x, a in enumerate(self.nonterminals)}


def _strip_comment(line: str) -> str:
    quoted = False
    for pos, ch in enumerate(line):
        if ch == "'":
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:pos]
    return line


def parse_grammar(text: str) -> CnfGrammar:
    start = None
    nullable = False
    units, binaries = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("start:"):
            start = line.split(":", 1)[1].strip()
            continue
        if line.startswith("nullable:"):
            value = line.split(":", 1)[1].strip().lower()
            if value not in ("true", "false"):
                raise InputError(f"line {lineno}: nullable must be true or false")
            nullable = value == "true"
            continue
        m = _UNIT.match(line)
        if m:
            units.append((m.group(1), m.group(2)))
            continue
        m = _BINARY.match(line)
        if m:
            binaries.append((m.group(1), m.group(2), m.group(3)))
            continue
        raise InputError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if start is None:
        raise InputError("grammar has no 'start:' line")
    return CnfGrammar.from_rules(start, units, binaries, nullable)


def _check_input(grammar: CnfGrammar, text: str) -> None:
    for offset, ch in enumerate(text, start=1):
        if ch not in grammar.terminals:
            raise InputError(f"unknown terminal {ch!r} at offset {offset}")


def recognize_naive(grammar: CnfGrammar, text: str) -> bool:
    _check_input(grammar, text)
    n = len(text)
    if n == 0:
        return grammar.nullable
    table = [[set() for _ in range(n)] for _ in range(n)]
    for i, ch in enumerate(text):
        table[i][i] = {a for a, t in grammar.unit_rules if t == ch}
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span - 1
            cell = table[i][j]
            for p in range(i, j):
                left, right = table[i][p], table[p + 1][j]
                if not left or not right:
                    continue
                for a, b, c in grammar.binary_rules:
                    if b in left and c in right:
                        cell.add(a)
    return grammar.start in table[0][n - 1]


@dataclass
class PackedParseTable:
    """Row- and column-packed derivability bits, ``w`` booleans per word."""

    g: int
    n: int
    w: int
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)

    @classmethod
    def allocate(cls, g: int, n: int, w: int) -> "PackedParseTable":
        words = max(1, -(-n // w))
        rows = np.zeros((g, n + 1, words), dtype=np.uint64)
        cols = np.zeros((g, n + 1, words), dtype=np.uint64)
        return cls(g, n, w, rows, cols)

    @property
    def word_count(self) -> int:
        return int(self.rows.size + self.cols.size)

    def derives(self, a: int, i: int, j: int) -> bool:
        """True if nonterminal ``a`` derives 0-based span [i, j]."""
        return bool((int(self.rows[a, i, j // self.w]) >> (j % self.w)) & 1)


def recognize_packed(grammar: CnfGrammar, text: str, w: int = 64,
                     counters: CounterSet | None = None,
                     backend: str | None = None) -> bool:
    """Same verdict as :func:`recognize_naive`; splits are tested ``w`` at a time."""
    if not 1 <= w <= 64:
        raise InputError(f"packed word width must be in [1, 64], got {w}")
    _check_input(grammar, text)
    n = len(text)
    if n == 0:
        return grammar.nullable
    idx = grammar.index()
    units = np.zeros(n, dtype=np.uint64)
    by_char: dict[str, int] = {}
    for a, t in grammar.unit_rules:
        by_char[t] = by_char.get(t, 0) | (1 << idx[a])
    if grammar.g > 64:
        raise InputError("packed recognizer supports at most 64 nonterminals")
    for i, ch in enumerate(text):
        units[i] = by_char.get(ch, 0)
    rules = np.array(sorted((idx[a], idx[b], idx[c]) for a, b, c in grammar.binary_rules),
                     dtype=np.int64).reshape(-1, 3)
    table = PackedParseTable.allocate(grammar.g, n, w)
    raw = np.zeros(7, dtype=np.int64)
    whole = _backend.get(backend).cyk_packed(
        units, rules, n, grammar.g, w, table.rows, table.cols, raw)
    if counters is not None:
        counters.absorb(raw)
        counters.peak_table_words = max(counters.peak_table_words, table.word_count)
    return bool((int(whole) >> idx[grammar.start]) & 1)
