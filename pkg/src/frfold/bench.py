"""Counter-based scaling harness.

Wall time is recorded for reference only; verdicts are computed from the
deterministic operation counters, which do not depend on the machine.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, fields

import numpy as np

from .fr import fold_fr
from .fr2 import AUTO, fold_fr2, resolve_mode
from .model import ALPHABET, DEFAULT_RULE, InputError, PairingRule, RnaSequence

TIME_TOL = 0.15
SPACE_TOL = 2.0


@dataclass
class BenchRecord:
    n: int
    w: int
    algorithm: str
    score: int
    central_queries: int
    updation_queries: int
    inner_iterations: int
    peak_table_words: int
    precompute_steps: int
    wall_time_ms: float | None


CSV_COLUMNS = [f.name for f in fields(BenchRecord)] + ["updation_mode"]


def random_sequence(seed: int, index: int, n: int) -> RnaSequence:
    """Uniform sequence from a counter-based generator keyed by (seed, index)."""
    bits = np.random.Philox(key=np.array([seed, index], dtype=np.uint64))
    draws = np.random.Generator(bits).integers(0, 4, size=n)
    return RnaSequence("".join(ALPHABET[x] for x in draws))


@dataclass
class Verdict:
    algorithm: str
    metric: str
    n_lo: int
    n_hi: int
    ratio: float
    predicted: float
    ok: bool

    def line(self) -> str:
        status = "ok" if self.ok else "FAIL"
        return (f"{self.algorithm} {self.metric} n {self.n_lo}->{self.n_hi}: "
                f"ratio {self.ratio:.3f} predicted {self.predicted:.3f} "
                f"deviation {self.ratio / self.predicted - 1:+.1%} {status}")


def run_one(alg: str, seq: RnaSequence, w: int | None, rule: PairingRule = DEFAULT_RULE,
            backend: str | None = None, updation: str = AUTO,
            budget_bytes: int | None = None) -> tuple[BenchRecord, str]:
    """Fold once; return the record and the resolved updation mode (empty for fr)."""
    mode = ""
    start = time.perf_counter()
    if alg == "fr":
        res = fold_fr(seq, rule, w, backend)
    elif alg == "fr2":
        res = fold_fr2(seq, rule, w, backend, updation, budget_bytes)
        mode = resolve_mode(len(seq), res.w, updation, budget_bytes)
    else:
        raise ValueError(f"unknown benchmark algorithm {alg!r}")
    elapsed = (time.perf_counter() - start) * 1000.0
    c = res.counters
    rec = BenchRecord(len(seq), res.w, alg, res.score, c.central_queries, c.updation_queries,
                      c.inner_iterations, c.peak_table_words, c.precompute_steps, elapsed)
    return rec, mode


def _query_prediction(alg: str, lo: BenchRecord, hi: BenchRecord) -> tuple[str, float]:
    grow = (hi.n / lo.n) ** 3
    if alg == "fr":
        return "central_queries", grow * lo.w / hi.w
    return "updation_queries", grow * (lo.w / hi.w) ** 2


def scaling_verdicts(records: list[BenchRecord], time_tol: float = TIME_TOL,
                     space_tol: float = SPACE_TOL) -> tuple[list[Verdict], list[str]]:
    """Compare adjacent sizes per algorithm; the second list holds skipped comparisons."""
    verdicts: list[Verdict] = []
    skipped: list[str] = []
    by_alg: dict[str, dict[int, BenchRecord]] = {}
    for rec in records:
        by_alg.setdefault(rec.algorithm, {}).setdefault(rec.n, rec)
    for alg, by_n in by_alg.items():
        sizes = sorted(by_n)
        for a, b in zip(sizes, sizes[1:]):
            lo, hi = by_n[a], by_n[b]
            metric, predicted = _query_prediction(alg, lo, hi)
            base = getattr(lo, metric)
            if base == 0 or lo.n == 0:
                skipped.append(f"{alg} {metric} n {a}->{b}: no queries at n={a}, skipped")
            else:
                ratio = getattr(hi, metric) / base
                ok = abs(ratio / predicted - 1) <= time_tol
                verdicts.append(Verdict(alg, metric, a, b, ratio, predicted, ok))
            if alg == "fr" and lo.peak_table_words and lo.n:
                ratio = hi.peak_table_words / lo.peak_table_words
                predicted = (hi.n ** 2 / hi.w) / (lo.n ** 2 / lo.w)
                rel = ratio / predicted
                ok = 1 / space_tol <= rel <= space_tol
                verdicts.append(Verdict(alg, "peak_table_words", a, b, ratio, predicted, ok))
    return verdicts, skipped


def write_csv(records: list[BenchRecord], modes: list[str], out, omit_timing: bool = False) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec, mode in zip(records, modes):
        row = [getattr(rec, name) for name in CSV_COLUMNS[:-1]]
        row[-1] = "" if omit_timing else f"{rec.wall_time_ms:.3f}"
        writer.writerow(row + [mode])


def run_bench(algorithms: list[str], sizes: list[int], reps: int = 1, seed: int = 0,
              w: int | None = None, rule: PairingRule = DEFAULT_RULE,
              backend: str | None = None, updation: str = AUTO,
              budget_bytes: int | None = None) -> tuple[list[BenchRecord], list[str]]:
    """One record per (algorithm, n, repetition); every algorithm sees the same inputs."""
    if list(sizes) != sorted(sizes):
        raise InputError("benchmark sizes must be ascending")
    if reps < 1:
        raise InputError("reps must be at least 1")
    records: list[BenchRecord] = []
    modes: list[str] = []
    for index, n in enumerate(sizes):
        seq = random_sequence(seed, index, n)
        for alg in algorithms:
            for _ in range(reps):
                rec, mode = run_one(alg, seq, w, rule, backend, updation, budget_bytes)
                records.append(rec)
                modes.append(mode)
    return records, modes


def render_csv(records: list[BenchRecord], modes: list[str], omit_timing: bool = False) -> str:
    buf = io.StringIO()
    write_csv(records, modes, buf, omit_timing)
    return buf.getvalue()
