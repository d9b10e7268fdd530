import numpy as np
import pytest

from frfold.model import (
    CounterSet,
    FoldResult,
    InputError,
    PairingRule,
    RnaSequence,
    SecondaryStructure,
    TableFault,
    check_w,
    complementary,
    default_w,
    mem_budget_bytes,
    validate_structure,
)


def test_complementary_examples():
    default = PairingRule()
    assert complementary(default, "A", "U") == 1
    assert complementary(default, "A", "C") == 0
    assert complementary(default, "G", "U") == 0
    assert complementary(PairingRule(wobble_enabled=True), "G", "U") == 1


def test_matrix_is_symmetric_and_matches_rule():
    for rule in (PairingRule(), PairingRule(True)):
        m = rule.matrix()
        assert (m == m.T).all()
        assert m.sum() == (6 if rule.wobble_enabled else 4)


def test_sequence_parse_folds_case_and_thymine():
    assert str(RnaSequence.parse("acgt")) == "ACGU"
    with pytest.raises(InputError, match="offset 3"):
        RnaSequence("ACXU")


def test_sequence_is_one_indexed():
    s = RnaSequence("ACGU")
    assert s[1] == "A" and s[4] == "U"
    with pytest.raises(IndexError):
        s[0]
    assert list(s.codes()) == [0, 0, 1, 2, 3, 0]


def test_negative_min_loop_rejected():
    with pytest.raises(InputError):
        PairingRule(min_loop=-1)


def test_can_pair_respects_min_loop():
    s = RnaSequence("GAAC")
    assert PairingRule(min_loop=2).can_pair(s, 1, 4)
    assert not PairingRule(min_loop=3).can_pair(s, 1, 4)


def test_validate_examples():
    assert validate_structure(RnaSequence("AU"), PairingRule(), SecondaryStructure.of([(1, 2)]))
    crossing = validate_structure(RnaSequence("AUAU"), PairingRule(),
                                  SecondaryStructure.of([(1, 3), (2, 4)]))
    assert not crossing.ok and any("cross" in v for v in crossing.violations)
    stem = SecondaryStructure.of([(1, 9), (2, 8), (3, 7)])
    assert validate_structure(RnaSequence("GGGAAACCC"), PairingRule(min_loop=3), stem)


@pytest.mark.parametrize("text, pairs, needle", [
    ("AA", [(1, 3)], "out of range"),
    ("AUA", [(1, 2), (2, 3)], "position 2"),
    ("AA", [(1, 2)], "not complementary"),
])
def test_validate_reports_each_violation(text, pairs, needle):
    report = validate_structure(RnaSequence(text), PairingRule(), SecondaryStructure.of(pairs))
    assert any(needle in v for v in report.violations)


def test_validate_min_loop():
    report = validate_structure(RnaSequence("GC"), PairingRule(min_loop=1),
                                SecondaryStructure.of([(1, 2)]))
    assert any("min_loop" in v for v in report.violations)


def test_default_w_and_bounds():
    assert default_w(0) == 1 and default_w(15) == 1
    assert default_w(256) == 2 and default_w(4096) == 3 and default_w(65536) == 4
    assert check_w(np.int64(3)) == 3
    for bad in (0, 64, 2.0, None):
        with pytest.raises(InputError):
            check_w(bad)


def test_counterset_absorb_follows_field_order():
    c = CounterSet()
    c.absorb(np.arange(1, 8))
    assert list(c.as_dict().values()) == [1, 2, 3, 4, 5, 6, 7]


def test_fold_result_rejects_inconsistent_score():
    with pytest.raises(TableFault):
        FoldResult(2, SecondaryStructure.of([(1, 2)]), CounterSet())


def test_mem_budget_env(monkeypatch):
    monkeypatch.setenv("FRFOLD_MEM_BUDGET_MB", "1")
    assert mem_budget_bytes() == 1 << 20
    monkeypatch.setenv("FRFOLD_MEM_BUDGET_MB", "lots")
    with pytest.raises(InputError):
        mem_budget_bytes()
