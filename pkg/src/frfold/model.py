"""Sequences, pairing rules, structures and run counters shared by all solvers.

Positions are 1-indexed everywhere in the public API.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

import numpy as np

ALPHABET = "ACGU"
WORD_BITS = 64

_CANONICAL = frozenset({("A", "U"), ("U", "A"), ("C", "G"), ("G", "C")})
_WOBBLE = frozenset({("G", "U"), ("U", "G")})


class InputError(ValueError):
    """Malformed user input (bad residue, bad grammar, bad parameter)."""


class TableFault(RuntimeError):
    """A DP table is internally inconsistent; indicates a solver bug."""


@dataclass(frozen=True)
class RnaSequence:
    residues: str

    def __post_init__(self):
        for offset, ch in enumerate(self.residues, start=1):
            if ch not in ALPHABET:
                raise InputError(f"invalid residue {ch!r} at offset {offset}")

    @classmethod
    def parse(cls, text: str) -> "RnaSequence":
        """Uppercase ``text``, map T to U, and validate."""
        return cls("".join(text.split()).upper().replace("T", "U"))

    def __len__(self) -> int:
        return len(self.residues)

    def __getitem__(self, pos: int) -> str:
        """Residue at 1-indexed position ``pos``."""
        if not 1 <= pos <= len(self.residues):
            raise IndexError(pos)
        return self.residues[pos - 1]

    def __str__(self) -> str:
        return self.residues

    def codes(self) -> np.ndarray:
        """Residue codes (A=0, C=1, G=2, U=3) padded so index ``i`` is position ``i``."""
        out = np.zeros(len(self.residues) + 2, dtype=np.int8)
        for i, ch in enumerate(self.residues, start=1):
            out[i] = ALPHABET.index(ch)
        return out


@dataclass(frozen=True)
class PairingRule:
    wobble_enabled: bool = False
    min_loop: int = 0

    def __post_init__(self):
        if self.min_loop < 0:
            raise InputError("min_loop must be non-negative")

    def matrix(self) -> np.ndarray:
        """4x4 0/1 complementarity matrix in ALPHABET order."""
        out = np.zeros((4, 4), dtype=np.int8)
        for x, a in enumerate(ALPHABET):
            for y, b in enumerate(ALPHABET):
                out[x, y] = complementary(self, a, b)
        return out

    def can_pair(self, seq: RnaSequence, i: int, j: int) -> bool:
        return j - i > self.min_loop and complementary(self, seq[i], seq[j]) == 1


DEFAULT_RULE = PairingRule()


def complementary(rule: PairingRule, a: str, b: str) -> int:
    """1 if ``a`` and ``b`` can form a base pair under ``rule`` (distance ignored)."""
    if (a, b) in _CANONICAL:
        return 1
    if rule.wobble_enabled and (a, b) in _WOBBLE:
        return 1
    return 0


@dataclass(frozen=True)
class SecondaryStructure:
    pairs: frozenset = frozenset()

    @classmethod
    def of(cls, pairs) -> "SecondaryStructure":
        return cls(frozenset((int(i), int(j)) for i, j in pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_structure(seq: RnaSequence, rule: PairingRule,
                       st: SecondaryStructure) -> ValidationReport:
    """Check range, disjointness, non-crossing, complementarity and loop length."""
    report = ValidationReport()
    n = len(seq)
    seen: dict[int, tuple[int, int]] = {}
    for i, j in st.sorted_pairs():
        if not 1 <= i < j <= n:
            report.violations.append(f"pair ({i},{j}) out of range for n={n}")
            continue
        for pos in (i, j):
            if pos in seen:
                report.violations.append(
                    f"position {pos} in both {seen[pos]} and ({i},{j})")
            seen[pos] = (i, j)
        if not complementary(rule, seq[i], seq[j]):
            report.violations.append(
                f"pair ({i},{j}) {seq[i]}-{seq[j]} is not complementary")
        if j - i <= rule.min_loop:
            report.violations.append(
                f"pair ({i},{j}) violates min_loop={rule.min_loop}")
    pairs = st.sorted_pairs()
    for a in range(len(pairs)):
        i, j = pairs[a]
        for b in range(a + 1, len(pairs)):
            k, l = pairs[b]
            if k > j:
                break
            if l > j:
                report.violations.append(f"pairs ({i},{j}) and ({k},{l}) cross")
    return report


@dataclass
class CounterSet:
    central_queries: int = 0
    updation_queries: int = 0
    inner_iterations: int = 0
    peak_table_words: int = 0
    precompute_steps: int = 0
    traceback_nodes: int = 0
    traceback_steps: int = 0

    def as_dict(self) -> dict[str, int]:
        return {f.name: int(getattr(self, f.name)) for f in fields(self)}

    def absorb(self, raw) -> None:
        """Add kernel counter slots (ordered like the fields) into this set."""
        for f, value in zip(fields(self), raw):
            setattr(self, f.name, getattr(self, f.name) + int(value))


@dataclass(frozen=True)
class FoldResult:
    score: int
    structure: SecondaryStructure
    counters: CounterSet
    w: int | None = None

    def __post_init__(self):
        if len(self.structure) != self.score:
            raise TableFault(
                f"structure has {len(self.structure)} pairs, score is {self.score}")


def default_w(n: int) -> int:
    """Block width max(1, floor(log2(n) / 4)), clamped to the word size."""
    if n < 2:
        return 1
    return max(1, min(WORD_BITS - 1, (n.bit_length() - 1) // 4))


def check_w(w: int) -> int:
    if not isinstance(w, (int, np.integer)) or not 1 <= w <= WORD_BITS - 1:
        raise InputError(f"w must be an integer in [1, {WORD_BITS - 1}], got {w!r}")
    return int(w)


def mem_budget_bytes() -> int:
    """Cap for optional precomputed tables, from ``FRFOLD_MEM_BUDGET_MB`` (default 2048)."""
    raw = os.environ.get("FRFOLD_MEM_BUDGET_MB", "2048")
    try:
        mb = float(raw)
    except ValueError:
        raise InputError(f"FRFOLD_MEM_BUDGET_MB={raw!r} is not a number") from None
    return int(mb * 1024 * 1024)
