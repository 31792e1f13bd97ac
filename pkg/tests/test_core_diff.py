import itertools

import pytest
from hypothesis import given, strategies as st

from iterdiff.core_diff import (FiniteSequence, IndexTuple, contains_diff_structure,
                                contains_fs_structure, diff_set, diff_signs, fs_set,
                                iterated_diff, partial_sums, read_sequence_file)
from iterdiff.errors import BoundExceeded, MalformedInput, MalformedQuery, MalformedTuple, NotFound, TooShort

from oracles import brute_contains_diff, brute_contains_fs, naive_diff

ints = st.integers(min_value=-10**30, max_value=10**30)


@pytest.mark.parametrize("t, expected", [((1, 2), 1), ((5, 3), -2), ((1, 2, 5, 3), -3)])
def test_iterated_diff_worked_values(t, expected):
    assert iterated_diff(t) == expected


@pytest.mark.parametrize("n", [0, 1, 3, 5, 6, 12])
def test_iterated_diff_rejects_bad_lengths(n):
    with pytest.raises(MalformedTuple):
        iterated_diff(tuple(range(n)))


def test_diff_signs_level_two():
    assert diff_signs(2) == (1, -1, -1, 1)


def test_big_integers_are_exact():
    t = (0, 2 ** 200, 3 ** 150, 5 ** 90)
    assert iterated_diff(t) == (5 ** 90 - 3 ** 150) - 2 ** 200


@given(st.integers(2, 4).flatmap(lambda l: st.lists(ints, min_size=2 ** l, max_size=2 ** l)))
def test_composition_identity(t):
    pairs = [iterated_diff(t[i:i + 2]) for i in range(0, len(t), 2)]
    assert iterated_diff(t) == iterated_diff(pairs)


def _telescoped(m):
    # d(m_1..m_{2^l}) = m_{2^l} - sum_t d(m_{2^l - 2^(l-t) + 1} .. m_{2^l - 2^(l-t-1)})
    n = len(m)
    level = n.bit_length() - 1
    total = m[-1]
    for t in range(level):
        block = m[n - 2 ** (level - t): n - 2 ** (level - t - 1)]
        total -= block[0] if len(block) == 1 else iterated_diff(block)
    return total


@given(st.integers(1, 4).flatmap(lambda l: st.lists(ints, min_size=2 ** l, max_size=2 ** l)))
def test_telescoping_identity(t):
    assert iterated_diff(t) == _telescoped(t)


@given(ints, ints)
def test_antisymmetry(a, b):
    assert iterated_diff((a, b)) == -iterated_diff((b, a))


@given(st.integers(1, 3).flatmap(lambda l: st.lists(ints, min_size=2 ** l, max_size=2 ** l)))
def test_matches_naive_recursion(t):
    assert iterated_diff(t) == naive_diff(t)


def test_finite_sequence_invariants():
    with pytest.raises(MalformedInput):
        FiniteSequence((1, 1, 2))
    with pytest.raises(MalformedInput):
        FiniteSequence(())
    with pytest.raises(MalformedTuple):
        IndexTuple(2, (1, 2, 3))
    with pytest.raises(MalformedTuple):
        IndexTuple(1, (2, 1))


def test_diff_set_examples():
    assert diff_set((1, 2, 4, 8), 1).value_set == {1, 2, 3, 4, 6, 7}
    assert diff_set((1, 2, 4, 8), 2).value_set == {3}
    with pytest.raises(TooShort):
        diff_set((1, 2), 2)


def test_diff_set_positive_only_filter():
    full = diff_set((1, 2, 10, 11, 12), 2)
    pos = diff_set((1, 2, 10, 11, 12), 2, positive_only=True)
    assert min(full.values) <= 0
    assert pos.value_set == {v for v in full.values if v > 0}


@given(st.lists(st.integers(-50, 50), min_size=4, max_size=9, unique=True), st.integers(1, 3))
def test_diff_set_size_bound(xs, level):
    s = sorted(xs)
    if len(s) < 2 ** level:
        return
    from math import comb
    d = diff_set(s, level)
    assert len(d.values) == comb(len(s), 2 ** level)
    assert len(d.value_set) <= comb(len(s), 2 ** level)


def test_fs_set_examples():
    assert fs_set((1, 2, 4), 3).value_set == set(range(1, 8))
    assert fs_set((10, 100), 2).value_set == {10, 100, 110}
    with pytest.raises(TooShort):
        fs_set((1, 2), 3)


@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=10, unique=True))
def test_fs_multiset_size(xs):
    s = sorted(xs)
    assert len(fs_set(s).values) == 2 ** len(s) - 1


def test_partial_sums_examples():
    assert partial_sums((1, 2, 4)).elements == (1, 3, 7)
    assert diff_set(partial_sums((1, 2, 4)), 1).value_set == {2, 4, 6}
    assert partial_sums((5,)).elements == (5,)


@given(st.lists(st.integers(1, 10**4), min_size=2, max_size=12, unique=True))
def test_partial_sum_differences_are_finite_sums(xs):
    s = sorted(xs)
    assert diff_set(partial_sums(s), 1).value_set <= fs_set(s).value_set


def test_contains_diff_examples():
    # lex-least over [-10, 10]; any translate of (1, 2, 3) works, so it starts at -10
    assert contains_diff_structure({1, 2, 3}, 1, 3, 10).elements == (-10, -9, -8)
    assert brute_contains_diff({1, 2, 3}, 1, 3, 10) == (-10, -9, -8)
    assert contains_diff_structure({5}, 1, 2, 100).elements == (-100, -95)
    res = contains_diff_structure({1}, 1, 3, 50)
    assert isinstance(res, NotFound) and res.kind == "within_bound"
    assert brute_contains_diff({1}, 1, 3, 50) is None
    with pytest.raises(MalformedQuery):
        contains_diff_structure({1, 2}, 2, 3, 10)


def test_contains_diff_node_budget():
    with pytest.raises(BoundExceeded):
        contains_diff_structure(range(1, 200, 2), 2, 10, 200, node_budget=50)


def test_contains_fs_examples():
    assert contains_fs_structure({1, 2, 3}, 2).elements == (1, 2)
    assert contains_fs_structure({2, 4, 6}, 2).elements == (2, 4)
    assert isinstance(contains_fs_structure({1, 2, 4}, 2), NotFound)
    assert contains_fs_structure({1, 3, 4}, 2).elements == (1, 3)
    assert isinstance(contains_fs_structure({1, 2, 4, 8}, 3), NotFound)


@given(st.sets(st.integers(1, 30), max_size=12), st.integers(2, 4))
def test_diff_search_agrees_with_brute_force(E, r):
    bound = 6
    got = contains_diff_structure(E, 1, r, bound)
    want = brute_contains_diff(E, 1, r, bound)
    assert (got.elements if got else None) == want


@given(st.sets(st.integers(1, 30), max_size=10), st.integers(2, 4))
def test_level_two_search_agrees_with_brute_force(E, r):
    if r < 4:
        r = 4
    bound = 5
    got = contains_diff_structure(E, 2, r, bound)
    assert (got.elements if got else None) == brute_contains_diff(E, 2, r, bound)


@given(st.sets(st.integers(1, 30), max_size=14), st.integers(1, 4))
def test_fs_search_agrees_with_brute_force(E, r):
    got = contains_fs_structure(E, r, 30)
    assert (got.elements if got else None) == brute_contains_fs(E, r, 30)


def test_read_sequence_file(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("# powers of three\n3\n9\n\n27\n", encoding="utf-8")
    assert read_sequence_file(p).elements == (3, 9, 27)
    p.write_text("3\n2\n", encoding="utf-8")
    with pytest.raises(MalformedInput):
        read_sequence_file(p)
    p.write_text("3\nabc\n", encoding="utf-8")
    with pytest.raises(MalformedInput):
        read_sequence_file(p)
