"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest, or directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import itertools
import os
import random
import subprocess
import sys
import tempfile

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from frfold import fr as fr_module
from frfold.cfl import parse_grammar, recognize_naive, recognize_packed
from frfold.fr import fill_fr, fold_fr, precompute_central
from frfold.fr2 import fold_fr2
from frfold.model import CounterSet, PairingRule, RnaSequence, default_w, validate_structure
from frfold.oracle import dp_table, enumerate_optimal_count, fold_oracle, iter_structures

from helpers import BACKEND_NAMES, brute_central, rand_seq
from test_cfl import PARENS, balanced, random_grammar

FR2_BUDGET = 64 << 20


def line(tag: str, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} [{tag}] {detail}"


def check_oracle_equivalence():
    rng = random.Random(101)
    combos = list(itertools.product((0, 3), (False, True), range(1, 7)))
    count = 0
    mismatches = []
    for rep in range(42):
        for h, wobble, w in combos:
            seq = rand_seq(rng, rng.randint(0, 300))
            rule = PairingRule(wobble, h)
            want = fold_oracle(seq, rule).score
            a = fold_fr(seq, rule, w).score
            b = fold_fr2(seq, rule, w, budget_bytes=FR2_BUDGET).score
            count += 1
            if not a == b == want:
                mismatches.append((str(seq), h, wobble, w, want, a, b))
    ok = not mismatches and count >= 1000
    return ok, f"fr = fr2 = oracle on {count} sequences, n in [0,300], 24 (h, wobble, w) combos; " \
               f"{len(mismatches)} mismatches"


def check_enumeration_anchor():
    rng = random.Random(102)
    bad = 0
    for x in range(500):
        seq = rand_seq(rng, rng.randint(0, 12))
        rule = PairingRule(x % 2 == 1, (0, 3)[(x // 2) % 2])
        bad += fold_oracle(seq, rule).score != enumerate_optimal_count(seq, rule)
    return bad == 0, f"oracle = exhaustive enumeration on 500 sequences, n <= 12; {bad} mismatches"


def check_difference_bounds():
    rng = random.Random(103)
    bad = 0
    cells = 0
    for x in range(1000):
        n = rng.randint(1, 200)
        M = dp_table(rand_seq(rng, n), PairingRule(x % 2 == 1, x % 4)).M.astype(np.int64)
        inner = np.triu(np.ones((n, n), dtype=bool), 1)
        down = (M[1:n + 1, 1:n + 1] - M[2:n + 2, 1:n + 1])[inner]
        left = (M[1:n + 1, 1:n + 1] - M[1:n + 1, 0:n])[inner]
        cells += int(inner.sum())
        bad += int(((down < 0) | (down > 1)).sum() + ((left < 0) | (left > 1)).sum())
    return bad == 0, f"0 <= adjacent difference <= 1 at {cells} cells of 1000 tables; {bad} violations"


def check_central_table():
    bad = 0
    entries = 0
    for backend in BACKEND_NAMES:
        for w in range(1, 5):
            table = precompute_central(w, backend)
            for u in range(1 << w):
                for v in range(1 << w):
                    entries += 1
                    bad += table.entry(u, v) != brute_central(u, v, w)
    return bad == 0, (f"central table = prefix-sum enumeration incl. leftmost tie, w 1..4, "
                      f"{entries} entries over backends {BACKEND_NAMES}; {bad} mismatches")


def _partial(Mrows, i, j, t, o):
    return max(Mrows[i][l] + (Mrows[l + 1][j] if l + 1 <= j else 0) for l in range(t, o + 1))


def check_partial_results():
    rng = random.Random(105)
    samples = 0
    bad = 0
    while samples < 10_000:
        n = rng.randint(4, 80)
        seq = rand_seq(rng, n)
        rule = PairingRule(rng.random() < 0.5, rng.choice((0, 3)))
        M = dp_table(seq, rule).M.tolist()
        for _ in range(250):
            i = rng.randint(2, n - 1)
            j = rng.randint(i + 1, n)
            t = rng.randint(i, j - 1)
            o = rng.randint(t, j - 1)
            here = _partial(M, i, j, t, o)
            above = _partial(M, i - 1, j, t, o)
            base = M[i][o] + M[o + 1][j]
            bad += not (here <= above <= here + 1 and here - base >= 0)
            samples += 1
    # A restricted set may not pair a position in [i, t] with one in (o, j]. With the
    # left range half-open, [i, t), a lone pair (t, h > o) would cross every allowed
    # split, so that variant is only tallied, not gated.
    sets = 0
    set_bad = 0
    open_bad = 0
    while sets < 200:
        n = rng.randint(2, 14)
        seq = rand_seq(rng, n)
        rule = PairingRule(rng.random() < 0.5, rng.choice((0, 1, 3)))
        M = dp_table(seq, rule).M.tolist()
        i = rng.randint(1, n - 1)
        j = rng.randint(i + 1, n)
        t = rng.randint(i, j - 1)
        o = rng.randint(t, j - 1)
        want = _partial(M, i, j, t, o)
        closed = opened = 0
        for s in iter_structures(seq, rule, i, j):
            if not any(i <= g <= t and o < h <= j for g, h in s):
                closed = max(closed, len(s))
            if not any(i <= g < t and o < h <= j for g, h in s):
                opened = max(opened, len(s))
        set_bad += closed != want
        open_bad += opened != want
        sets += 1
    ok = bad == 0 and set_bad == 0
    return ok, (f"row sandwich and non-negative deviation on {samples} samples (n <= 80): "
                f"{bad} violations; best restricted set = restricted split on {sets} samples "
                f"(n <= 14): {set_bad} mismatches ({open_bad} if the left range excludes t)")


def check_traceback():
    rng = random.Random(106)
    invalid = 0
    for _ in range(100):
        seq = rand_seq(rng, 200)
        res = fold_fr(seq)
        report = validate_structure(seq, PairingRule(), res.structure)
        invalid += not report.ok or len(res.structure) != res.score
    work = {}
    nodes = {}
    for n in (100, 200, 400):
        steps, count = [], []
        for _ in range(10):
            res = fold_fr(rand_seq(rng, n))
            steps.append(res.counters.traceback_steps / n ** 2)
            count.append(res.counters.traceback_nodes / n)
        work[n] = float(np.mean(steps))
        nodes[n] = float(np.mean(count))
    spread = max(work.values()) / min(work.values())
    ok = invalid == 0 and spread < 2.0
    shown = ", ".join(f"n={n}: {v:.3f}" for n, v in work.items())
    per_n = ", ".join(f"{v:.2f}" for v in nodes.values())
    return ok, (f"100 random 200-mers valid with |pairs| = score ({invalid} bad); traceback "
                f"cell evaluations / n^2 {shown}, spread {spread:.2f}x (< 2x); "
                f"visited intervals / n {per_n}")


def _ratio_in(value, lo, hi):
    return lo <= value <= hi


def check_fr_time_scaling():
    rng = random.Random(107)
    q = {}
    for n, w in ((512, 2), (1024, 2), (1024, 4)):
        c = CounterSet()
        fill_fr(rand_seq(rng, n), w=w, counters=c)
        q[n, w] = c.central_queries
    by_n = q[1024, 2] / q[512, 2]
    by_w = q[1024, 2] / q[1024, 4]
    ok = _ratio_in(by_n, 6.8, 9.2) and _ratio_in(by_w, 1.5, 2.5)
    return ok, (f"fr central_queries: w=2, n 512->1024 ratio {by_n:.3f} in [6.8, 9.2]; "
                f"n=1024, w 2->4 ratio {by_w:.3f} in [1.5, 2.5]")


def check_fr2_time_scaling():
    rng = random.Random(108)
    q = {}
    for n, w in ((512, 2), (1024, 2), (1024, 4)):
        res = fold_fr2(rand_seq(rng, n), w=w)
        q[n, w] = res.counters.updation_queries
    by_w = q[1024, 2] / q[1024, 4]
    by_n = q[1024, 2] / q[512, 2]
    ok = _ratio_in(by_w, 3.0, 5.0) and _ratio_in(by_n, 6.8, 9.2)
    return ok, (f"fr2 updation_queries: n=1024, w 2->4 ratio {by_w:.3f} in [3, 5]; "
                f"w=2, n 512->1024 ratio {by_n:.3f} in [6.8, 9.2]")


class _AllocationWatch:
    """Stands in for numpy inside the solver module and records every array shape."""

    def __init__(self):
        self.shapes = []

    def zeros(self, shape, *args, **kwargs):
        self.shapes.append(tuple(np.atleast_1d(shape)))
        return np.zeros(shape, *args, **kwargs)

    def __getattr__(self, name):
        return getattr(np, name)


def check_fr_space():
    rng = random.Random(109)
    scaled = {}
    square = []
    for n in (512, 1024, 2048, 4096):
        watch = _AllocationWatch()
        saved = fr_module.np
        fr_module.np = watch
        try:
            c = CounterSet()
            tables = fill_fr(rand_seq(rng, n), counters=c)
        finally:
            fr_module.np = saved
        tables.assert_no_square_table()
        square += [s for s in watch.shapes if len(s) == 2 and s[0] >= n and s[1] >= n]
        scaled[n] = c.peak_table_words * default_w(n) / n ** 2
    spread = max(scaled.values()) / min(scaled.values())
    ok = spread < 2.0 and not square
    shown = ", ".join(f"n={n}: {v:.3f}" for n, v in scaled.items())
    return ok, (f"fr peak_table_words*w/n^2 at default w {shown}, spread {spread:.2f}x (< 2x); "
                f"n-by-n allocations seen: {len(square)}")


def check_cfl():
    rng = random.Random(110)
    bad = 0
    for _ in range(500):
        g = random_grammar(rng)
        text = "".join(rng.choice("ab") for _ in range(rng.randint(0, 64)))
        bad += recognize_packed(g, text, rng.choice([8, 16, 64])) != recognize_naive(g, text)
    parens = parse_grammar(PARENS)
    suite = ["", "()", "(()", "(()())", "())(", "((()))()", ")("]
    suite += ["".join(rng.choice("()") for _ in range(rng.randrange(0, 40, 2))) for _ in range(200)]
    suite += ["(" * k + ")" * k for k in range(1, 20)]
    paren_bad = sum(recognize_packed(parens, s) != balanced(s) or
                    recognize_naive(parens, s) != balanced(s) for s in suite)
    scaled = {}
    for n in (256, 512, 1024):
        c = CounterSet()
        text = "".join(rng.choice("()") for _ in range(n))
        recognize_packed(parens, text, 64, c)
        scaled[n] = c.peak_table_words * 64 / (parens.g * n ** 2)
    spread = max(scaled.values()) / min(scaled.values())
    ok = bad == 0 and paren_bad == 0 and spread < 2.0
    shown = ", ".join(f"n={n}: {v:.3f}" for n, v in scaled.items())
    return ok, (f"packed = naive on 500 random (grammar, string) cases ({bad} mismatches); "
                f"balanced-parentheses suite of {len(suite)} strings ({paren_bad} mismatches); "
                f"word_count*w/(g n^2) {shown}, spread {spread:.2f}x (< 2x)")


def _cli(args, stdin=""):
    out = subprocess.run([sys.executable, "-m", "frfold", *args], input=stdin.encode(),
                         capture_output=True, check=True)
    return out.stdout


def check_determinism():
    rng = random.Random(111)
    fasta = "".join(f">r{x}\n{rand_seq(rng, 60 + 20 * x)}\n" for x in range(4))
    same = {}
    for fmt in ("dotbracket", "json"):
        for alg in ("oracle", "fr", "fr2"):
            args = ["fold", "--alg", alg, "--format", fmt, "--min-loop", "3"]
            same[f"{alg}/{fmt}"] = _cli(args, fasta) == _cli(args, fasta)
    with tempfile.TemporaryDirectory() as tmp:
        blobs = []
        for run in range(2):
            path = os.path.join(tmp, f"run{run}.csv")
            _cli(["bench", "--alg", "all", "--sizes", "64,128", "--reps", "2", "--seed", "7",
                  "--csv", path, "--omit-timing"])
            with open(path, "rb") as fh:
                blobs.append(fh.read())
        same["csv"] = blobs[0] == blobs[1] and len(blobs[0]) > 0
    ok = all(same.values())
    failed = [k for k, v in same.items() if not v]
    return ok, f"byte-identical repeat runs for {len(same)} outputs (dot-bracket, JSON, CSV); " \
               f"differing: {failed or 'none'}"


CHECKS = [
    ("01", "oracle equivalence", check_oracle_equivalence),
    ("02", "enumeration anchor", check_enumeration_anchor),
    ("03", "difference bounds", check_difference_bounds),
    ("04", "central table", check_central_table),
    ("05", "partial results", check_partial_results),
    ("06", "traceback", check_traceback),
    ("07", "fr time scaling", check_fr_time_scaling),
    ("08", "fr2 time scaling", check_fr2_time_scaling),
    ("09", "fr space", check_fr_space),
    ("10", "packed recognition", check_cfl),
    ("11", "determinism", check_determinism),
]


@pytest.mark.parametrize("tag, name, check", CHECKS, ids=[c[1].replace(" ", "_") for c in CHECKS])
def test_criterion(tag, name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + line(tag, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for tag, name, check in CHECKS:
        ok, detail = check()
        print(line(tag, ok, detail), flush=True)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
