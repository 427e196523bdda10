import random

from hypothesis import given, settings, strategies as st

from dynsys import builtin
from dynsys.canonical import TRUNC, ahu_encode, parent_array_form, tree_form
from dynsys.reverse import Caps, build_reverse_tree

from trees import children_of, isomorphic, recursive_parent_arrays


def test_simple_depth_two():
    assert tree_form(build_reverse_tree(builtin("simple"), 1, 2)) == "((()())(()()))"


def test_single_root():
    assert tree_form(build_reverse_tree(builtin("simple"), 1, 0)) == "()"
    assert parent_array_form([-1]) == "()"


def test_truncation_atoms():
    kids = {0: [1, 2], 1: [3], 2: [], 3: []}
    assert ahu_encode(0, kids, lambda n: "atom" if n == 2 else None) == "((())[T])"
    assert ahu_encode(0, kids, lambda n: "cut" if n == 2 else None) == "((())([T]))"
    # a truncated atom never equals an ordinary leaf
    assert ahu_encode(0, {0: []}, lambda n: "atom") == TRUNC != "()"


def test_depth_marking():
    t = build_reverse_tree(builtin("simple"), 1, 1)
    assert tree_form(t) == "(()())"
    assert tree_form(t, mark_depth=True) == "([T][T])"


def test_cap_cut_marked():
    t = build_reverse_tree(builtin("pow2"), 0, 1, Caps(value_cap=4))
    assert tree_form(t) == "(()()()[T])"


def test_child_order_irrelevant():
    assert ahu_encode(0, {0: [1, 2], 1: [3], 2: [], 3: []}) == ahu_encode(0, {0: [2, 1], 1: [], 2: [3], 3: []})


def test_deep_path_is_iterative():
    n = 50_000
    kids = {i: [i + 1] for i in range(n)}
    kids[n] = []
    enc = ahu_encode(0, kids)
    assert enc == "(" * (n + 1) + ")" * (n + 1)


def test_small_class_counts():
    want = [1, 1, 2, 4, 9, 20, 48]
    for n, k in enumerate(want, start=1):
        forms = {parent_array_form(p) for p in recursive_parent_arrays(n)}
        assert len(forms) == k


def _relabel(parents, perm):
    # perm maps old index -> new index, root stays 0
    out = [0] * len(parents)
    for i, p in enumerate(parents):
        out[perm[i]] = -1 if p < 0 else perm[p]
    return out


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 40).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.integers(0, 10**9), min_size=n, max_size=n), st.randoms(use_true_random=False))))
def test_relabeling_invariance(args):
    n, raw, rnd = args
    parents = [-1] + [raw[i] % i for i in range(1, n)]
    perm = [0] + rnd.sample(range(1, n), n - 1)
    shuffled = _relabel(parents, perm)
    kids = children_of(shuffled)
    assert ahu_encode(0, kids) == parent_array_form(parents)


def test_equal_forms_iff_isomorphic_sampled():
    rng = random.Random(7)
    trees = [[-1] + [rng.randrange(i) for i in range(1, rng.randint(1, 8))] for _ in range(150)]
    forms = [parent_array_form(t) for t in trees]
    for i in range(len(trees)):
        for j in range(i + 1, len(trees)):
            assert (forms[i] == forms[j]) == isomorphic(trees[i], trees[j])
