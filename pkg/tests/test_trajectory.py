import pytest
from hypothesis import given, settings, strategies as st

from dynsys import builtin
from dynsys.sysdef import DomainError, parse_system_def
from dynsys.trajectory import (
    Cycle,
    FixedPoint,
    Limits,
    classify_root,
    descent_check,
    trace,
)


def test_collatz_seed_7():
    rec = trace(builtin("collatz"), 7)
    assert rec.values[1:] == [22, 11, 34, 17, 52, 26, 13, 40, 20, 10, 5, 16, 8, 4, 2, 1, 4]
    assert rec.root == Cycle((1, 4, 2))
    assert rec.root.label == "Cycle(1,4,2)"
    assert rec.total_stop == 16
    assert rec.max_excursion == 52


def test_collatz_seed_27():
    rec = trace(builtin("collatz"), 27)
    assert (rec.total_stop, rec.max_excursion) == (111, 9232)


def test_simple_seed_12():
    rec = trace(builtin("simple"), 12)
    assert rec.values == [12, 6, 3, 1]
    assert rec.root == FixedPoint(1)
    assert rec.steps_to_root == 3


def test_zero_step_limit():
    for name in ("collatz", "simple", "pow2"):
        rec = trace(builtin(name), 3, Limits(max_steps=0))
        assert rec.root.kind == "step_bound"
        assert rec.values == [3]


def test_value_limit():
    rec = trace(builtin("collatz"), 27, Limits(max_value=1000))
    assert rec.root.kind == "value_bound"
    assert rec.values[-1] > 1000


def test_seed_not_admitted():
    with pytest.raises(DomainError):
        trace(builtin("collatz-reduced"), 9)


def test_no_rule_and_left_domain():
    nu2 = builtin("collatz-reduced-nu2")
    assert trace(nu2, 7).root.label == "NoRuleApplies(7)"
    # 13 -> 5 -> 1 is fine, 3 * 11 + 1 = 34 has a single factor of two
    assert trace(nu2, 13).root == FixedPoint(1)
    assert trace(nu2, 29).root.label == "NoRuleApplies(11)"
    leaky = parse_system_def('name = leaky\nadmit = "n mod 2 = 1"\nif n > 1 -> n - 1\nif n = 1 -> n\n')
    assert trace(leaky, 9).root.label == "LeftDomain(8)"


def test_classify_root_examples():
    assert classify_root([1, 4, 2, 1]) == Cycle((1, 4, 2))
    assert classify_root([1, 1]) == FixedPoint(1)
    assert classify_root([13, 5, 1, 0, 0]) == FixedPoint(0)
    assert classify_root([9, 7, 5]) is None


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 10**6), min_size=2, max_size=8, unique=True), st.integers(0, 7))
def test_cycle_rotation_invariant(cycle, k):
    k %= len(cycle)
    rotated = cycle[k:] + cycle[:k]
    a = classify_root(cycle + cycle[:1])
    b = classify_root(rotated + rotated[:1])
    assert a == b
    assert a.cycle[0] == min(cycle)


def test_trajectories_connect():
    simple = builtin("simple")
    a, b = trace(simple, 6).values, trace(simple, 7).values
    shared = next(v for v in a if v in b)
    assert shared == 3
    assert a[a.index(3):] == b[b.index(3):]


def test_brent_tail_matches_exact_detection():
    collatz = builtin("collatz")
    for seed in (7, 27, 97, 871):
        full = trace(collatz, seed)
        capped = trace(collatz, seed, memory_cap=5)
        assert capped.root == full.root
        assert capped.truncated and not full.truncated
        assert (capped.steps_to_root, capped.total_stop, capped.max_excursion) == (
            full.steps_to_root, full.total_stop, full.max_excursion)


def test_record_dict():
    d = trace(builtin("simple"), 12).to_dict()
    assert d["root"]["kind"] == "fixed" and d["total_stop"] == 3


def test_descent_examples():
    assert descent_check(builtin("simple"), 1, 10**4).passed
    res = descent_check(builtin("collatz-reduced"), 1, 100)
    assert not res.passed and res.witness == (7, 11)
    assert descent_check(builtin("incr"), 1, 10**4).passed
    nu2 = descent_check(builtin("collatz-reduced-nu2"), 1, 1000)
    assert nu2.passed
    assert nu2.no_rule[:4] == [7, 11, 19, 23]
    assert all((3 * n + 1) % 4 for n in nu2.no_rule)


@pytest.mark.parametrize("name", ["simple", "incr", "mp", "pow2"])
def test_monotone_systems_converge_within_bound(name):
    s = builtin(name)
    B = 10**4
    assert descent_check(s, 1, B).passed
    for seed in range(0, B + 1):
        if not s.admits(seed):
            continue
        rec = trace(s, seed, Limits(max_steps=B))
        assert rec.root == FixedPoint(s.fixed_point)
        assert rec.steps_to_root <= B
