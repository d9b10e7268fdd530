import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frfold.fr import encode_vector
from frfold.fr2 import (
    CACHED,
    DENSE,
    UpdationTable,
    compute_partial_central,
    dense_updation_entries,
    fill_fr2,
    fold_fr2,
    precompute_updation,
    resolve_mode,
    staircase_values,
)
from frfold.model import PairingRule, RnaSequence, validate_structure
from frfold.oracle import dp_table, fold_oracle, iter_structures

from helpers import BACKEND_NAMES, cell, left_vector, partial, rand_seq, right_vector


def suffix(code, q, w):
    return sum((code >> (l - 1)) & 1 for l in range(q, w))


def two_family(d1, d2, u1, u2, w, n):
    """Recompress max of both candidate families, anchored at the last row."""
    best = [max(d1 + suffix(u1, q, w), d2 - n + suffix(u2, q, w)) for q in range(1, w + 1)]
    code = sum((best[q - 1] - best[q]) << (q - 1) for q in range(1, w))
    return code, best[w - 1], best


def test_updation_flat_example():
    up = precompute_updation(10, 3)
    assert up.query(0, 10, 0, 0) == (0, 0)


def test_updation_first_family_dominates():
    n, w = 10, 3
    u1 = encode_vector([1, 1, 0], 3)
    code, dev, best = two_family(0, n - 5, u1, 0, w, n)
    assert all(best[q - 1] == suffix(u1, q, w) for q in range(1, 4))
    assert precompute_updation(n, w).query(0, n - 5, u1, 0) == (code, dev) == (u1, 0)


@pytest.mark.parametrize("mode", [DENSE, CACHED])
def test_updation_matches_enumeration(mode):
    rng = random.Random(4)
    for w in range(1, 5):
        n = 12
        up = UpdationTable.build(n, w, mode)
        for _ in range(300):
            d1, d2 = rng.randint(0, n), rng.randint(0, 2 * n)
            u1, u2 = rng.randrange(1 << w), rng.randrange(1 << w)
            assert up.query(d1, d2, u1, u2) == two_family(d1, d2, u1, u2, w, n)[:2]


def test_updation_mode_selection():
    assert resolve_mode(10, 2, "auto", budget_bytes=10 ** 9) == DENSE
    assert resolve_mode(10, 2, "auto", budget_bytes=8) == CACHED
    assert resolve_mode(10, 2, CACHED) == CACHED
    with pytest.raises(ValueError):
        resolve_mode(10, 2, "sparse")
    assert dense_updation_entries(3, 1) == 4 * 7 * 4


@pytest.mark.parametrize("backend", BACKEND_NAMES)
def test_partial_central_zero_inputs(backend):
    assert compute_partial_central(0, 0, [0, 0, 0], 3, backend) == (0, 0)


def brute_partial_central(u, x, vs, w):
    """Enumerate every (row offset, split offset) of the block from vector sums alone."""
    def ssum(code, lo, hi):
        return sum((code >> (l - 1)) & 1 for l in range(lo, hi + 1))
    best = []
    for sb in range(1, w + 1):
        best.append(max(ssum(u, sc + 1, w) - ssum(x, sc + 1, w) + ssum(vs[sc - 1], sb, w - 1)
                        for sc in range(1, w + 1)))
    code = sum((best[q - 1] - best[q]) << (q - 1) for q in range(1, w))
    return code, best[w - 1]


@pytest.mark.parametrize("backend", BACKEND_NAMES)
def test_partial_central_hand_case(backend):
    u, x = encode_vector([1, 0], 2), encode_vector([0, 1], 2)
    vs = [encode_vector([0, 0], 2), encode_vector([1, 0], 2)]
    assert compute_partial_central(u, x, vs, 2, backend) == brute_partial_central(u, x, vs, 2)


def test_partial_central_rejects_wrong_arity():
    with pytest.raises(ValueError):
        compute_partial_central(0, 0, [0], 2)


@pytest.mark.parametrize("backend", BACKEND_NAMES)
def test_partial_central_matches_table(backend):
    rng = random.Random(8)
    n, w = 80, 3
    M = dp_table(rand_seq(rng, n)).M.tolist()
    checked = 0
    for s2 in range(1, n // w):
        a = (s2 + 1) * w
        for s1 in range(s2):
            ga = (s1 + 1) * w
            for j in range(a + 1, n + 1):
                u = right_vector(M, j, s2, w)
                x = left_vector(M, ga, s2, w)
                vs = [right_vector(M, s2 * w + c, s1, w) for c in range(1, w + 1)]
                code, dev = compute_partial_central(u, x, vs, w, backend)
                anchor = cell(M, ga, a) + cell(M, a + 1, j) + dev
                want = [partial(M, s1 * w + q, j, s2 * w + 1, a) for q in range(1, w + 1)]
                assert staircase_values(code, anchor, w) == want
                checked += 1
    assert checked > 1000


def test_staircase_values():
    assert staircase_values(0, 4, 3) == [4, 4, 4]
    assert staircase_values(0b11, 0, 3) == [2, 1, 0]


def test_all_unpairable_block():
    res = fold_fr2(RnaSequence("A" * 20), w=2)
    assert res.score == 0
    tables, _ = fill_fr2(RnaSequence("A" * 20), w=2)
    assert int(tables.M.max()) == 0 and int(tables.R.max()) == 0


@pytest.mark.parametrize("text, w, score", [("AU", None, 1), ("AU", 1, 1), ("ACGU", 2, 2),
                                            ("", None, 0)])
def test_fold_examples(text, w, score):
    assert fold_fr2(RnaSequence(text), w=w).score == score


def test_finalized_cells_equal_table():
    rng = random.Random(10)
    for _ in range(30):
        n = rng.randint(1, 150)
        seq = rand_seq(rng, n)
        rule = PairingRule(rng.random() < 0.5, rng.choice((0, 3)))
        tables, _ = fill_fr2(seq, rule, w=rng.randint(1, 4), budget_bytes=1 << 22)
        M = dp_table(seq, rule).M
        upper = np.triu(np.ones((n + 2, n + 2), dtype=bool))
        assert (tables.M[upper] == M[upper]).all()


@pytest.mark.parametrize("w", [1, 2, 3])
def test_debug_checks_every_partial_read(w):
    rng = random.Random(w)
    for _ in range(3):
        seq = rand_seq(rng, 40)
        tables, _ = fill_fr2(seq, w=w, debug=True, updation=CACHED)
        assert tables.cell(1, 40) == fold_oracle(seq).score


@settings(max_examples=120, deadline=None)
@given(st.text(alphabet="ACGU", max_size=80).map(RnaSequence),
       st.booleans(), st.integers(0, 3), st.integers(1, 4))
def test_matches_oracle(seq, wobble, h, w):
    rule = PairingRule(wobble, h)
    res = fold_fr2(seq, rule, w, budget_bytes=1 << 22)
    assert res.score == fold_oracle(seq, rule).score
    assert validate_structure(seq, rule, res.structure)


def test_dense_and_cached_agree():
    rng = random.Random(6)
    for _ in range(10):
        seq = rand_seq(rng, rng.randint(1, 90))
        a = fold_fr2(seq, w=2, updation=DENSE)
        b = fold_fr2(seq, w=2, updation=CACHED)
        assert a.structure == b.structure
        assert a.counters.updation_queries == b.counters.updation_queries


def best_restricted_set(seq, rule, i, j, t, o):
    """Largest pair set on [i, j] with no pair joining [i, t] to (o, j]."""
    return max(len(s) for s in iter_structures(seq, rule, i, j)
               if not any(i <= g <= t and o < h <= j for g, h in s))


def test_restricted_split_counts_restricted_sets():
    seq, rule = RnaSequence("CGG"), PairingRule()
    M = dp_table(seq, rule).M.tolist()
    # the lone pair (1, 2) starts at t and ends past o, so it crosses the only split
    assert partial(M, 1, 2, 1, 1) == best_restricted_set(seq, rule, 1, 2, 1, 1) == 0
    rng = random.Random(12)
    for _ in range(60):
        n = rng.randint(2, 11)
        seq = rand_seq(rng, n)
        M = dp_table(seq, rule).M.tolist()
        i = rng.randint(1, n - 1)
        j = rng.randint(i + 1, n)
        t = rng.randint(i, j - 1)
        o = rng.randint(t, j - 1)
        assert partial(M, i, j, t, o) == best_restricted_set(seq, rule, i, j, t, o)


@settings(max_examples=80, deadline=None)
@given(st.text(alphabet="ACGU", min_size=4, max_size=50).map(RnaSequence), st.data())
def test_restricted_split_row_sandwich(seq, data):
    n = len(seq)
    M = dp_table(seq).M.tolist()
    i = data.draw(st.integers(2, n - 1))
    j = data.draw(st.integers(i + 1, n))
    t = data.draw(st.integers(i, j - 1))
    o = data.draw(st.integers(t, j - 1))
    here, above = partial(M, i, j, t, o), partial(M, i - 1, j, t, o)
    assert here <= above <= here + 1
    assert here >= cell(M, i, o) + cell(M, o + 1, j)
