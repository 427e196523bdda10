import pytest
from hypothesis import given, settings, strategies as st

from dynsys import builtin
from dynsys.builtins import NAMES
from dynsys.reverse import (
    Caps,
    Frontier,
    NoReverseFamily,
    build_reverse_tree,
    coverage_check,
    eta_profile,
    predecessors,
    scan_predecessors,
)
from dynsys.sysdef import DomainError, Next, eval_forward, parse_system_def


def test_predecessor_examples():
    assert predecessors(builtin("simple"), 3) == [6, 7]
    assert predecessors(builtin("collatz-reduced"), 1, Caps(param_cap=12)) == [5, 85, 341]
    assert predecessors(builtin("mp"), 1, Caps(value_cap=40)) == [5, 7, 11, 13, 17, 19, 23, 29, 31, 37]


def test_collatz_reduced_oracle():
    # independent brute force: odd n not divisible by 3 with odd_part(3n + 1) == m
    cr = builtin("collatz-reduced")
    for m in (1, 5, 7, 11, 13, 23, 25):
        want = []
        for mu in range(1, 25):
            q, r = divmod(2**mu * m - 1, 3)
            if r == 0 and q % 6 in (1, 5) and q != m and q <= 2**40:
                want.append(q)
        assert predecessors(cr, m) == want


def test_mp_policy_guards():
    # m = 35 has largest factor 7 so predecessors multiply by primes >= 7
    assert predecessors(builtin("mp"), 35, Caps(param_cap=4)) == [245, 385, 455, 595]
    # the smallest-factor policy caps the multiplier at 5, leaving a finite set
    scan = scan_predecessors(builtin("mp-smallest"), 35)
    assert scan.values == [175] and not scan.truncated


def test_no_reverse_family():
    s = parse_system_def('name = t\nadmit = "n >= 1"\nif n > 1 -> n - 1\n')
    with pytest.raises(NoReverseFamily):
        predecessors(s, 3)


def test_unadmitted_target():
    with pytest.raises(DomainError):
        predecessors(builtin("mp"), 9)


@pytest.mark.parametrize("name", NAMES + ("mp-smallest",))
def test_round_trip_small(name):
    s = builtin(name)
    if not s.reverse:
        pytest.skip("no reverse family")
    caps = Caps(param_cap=24, value_cap=10**7)
    for m in range(0, 600):
        if not s.admits(m):
            continue
        scan = scan_predecessors(s, m, caps)
        assert scan.violations == []
        for v in scan.values:
            assert v != m and s.admits(v)
            assert eval_forward(s, v) == Next(m)


def test_tree_examples():
    t = build_reverse_tree(builtin("simple"), 1, 3)
    assert t.nodes == set(range(1, 16))
    assert t.level(3) == list(range(8, 16))
    assert all(t.frontier[n] is Frontier.DEPTH for n in t.level(3))
    t = build_reverse_tree(builtin("pow2"), 0, 1, Caps(value_cap=20))
    assert t.level(1) == [1, 2, 4, 8, 16]
    assert t.frontier[0] is Frontier.CAP
    for name in ("simple", "collatz-reduced", "pow2"):
        s = builtin(name)
        assert build_reverse_tree(s, s.fixed_point, 0).nodes == {s.fixed_point}


@pytest.mark.parametrize("d", range(1, 11))
def test_simple_tree_levels(d):
    t = build_reverse_tree(builtin("simple"), 1, d)
    assert t.level_counts() == [1] + [2**k for k in range(1, d + 1)]
    assert t.nodes == set(range(1, 2 ** (d + 1)))


def test_tree_parent_invariant():
    for name, root, d in (("collatz-reduced", 1, 4), ("mp", 1, 3), ("pow2", 0, 4), ("incr", 1, 5)):
        s = builtin(name)
        t = build_reverse_tree(s, root, d, Caps(param_cap=10, value_cap=10**6))
        assert t.violations == []
        assert len(t.nodes) == len(t.parent)
        for n, p in t.parent.items():
            if p is not None:
                assert eval_forward(s, n) == Next(p)
                assert t.depth_of[n] == t.depth_of[p] + 1


def test_collatz_cycle_closure_counted():
    t = build_reverse_tree(builtin("collatz"), 1, 6)
    assert t.cycle_closures == 1
    assert t.duplicate_rejections == 0
    assert t.nodes == {1, 2, 4, 8, 16, 5, 32, 10, 64}


def test_node_cap():
    t = build_reverse_tree(builtin("simple"), 1, 20, Caps(node_cap=50))
    assert t.cap_truncated
    assert 50 <= len(t) <= 52


def test_eta_examples():
    p = eta_profile(builtin("simple"), range(1, 101))
    assert set(p.counts.values()) == {2} and not any(p.unbounded.values())
    p = eta_profile(builtin("pow2"), [3], Caps(value_cap=20))
    assert p.counts[3] == 3 and p.unbounded[3]
    assert predecessors(builtin("pow2"), 3, Caps(value_cap=20)) == [7, 11, 19]
    p = eta_profile(builtin("collatz-reduced"), [1], Caps(param_cap=12))
    assert p.counts[1] == 3 and p.unbounded[1]


def test_coverage_examples():
    s = builtin("simple")
    assert coverage_check(s, 1, 15, 3).uncovered == set()
    assert coverage_check(s, 1, 16, 3).uncovered == {16}


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 10**5).map(lambda k: 6 * k + 1), mu=st.integers(1, 16))
def test_eta_agrees_with_predecessors(m, mu):
    s = builtin("collatz-reduced")
    caps = Caps(param_cap=mu)
    assert eta_profile(s, [m], caps).counts[m] == len(predecessors(s, m, caps))


def test_count_cap():
    scan = scan_predecessors(builtin("mp"), 1, Caps(count_cap=3))
    assert scan.values == [5, 7, 11] and scan.truncated
