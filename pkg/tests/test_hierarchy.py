import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from iterdiff.core_diff import diff_set
from iterdiff.errors import MalformedInput, MalformedQuery, NotEnoughElements, NotFound
from iterdiff.hierarchy import (check_powers_of_ten, check_strict_inclusion, factorial_block,
                                gap_check, lacunary_fs_check, multiples_subsequence,
                                powers_of_ten_set, strict_inclusion_set, window_density)


def test_strict_inclusion_examples():
    assert strict_inclusion_set(2).elements == (2, 24, 48)
    assert strict_inclusion_set(3).elements == (2, 24, 48, 720, 1440, 2160)
    assert 48 < 720 - math.factorial(4)


def test_strict_inclusion_formula():
    sep = strict_inclusion_set(5)
    want = sorted(math.factorial(2 * k) * j for k in range(1, 6) for j in range(1, k + 1))
    assert list(sep.elements) == want


@pytest.mark.parametrize("K", [1, 2, 3, 4, 5])
def test_gap_property(K):
    sep = strict_inclusion_set(K)
    rows = gap_check(sep)
    assert len(rows) == K - 1 and all(r["ok"] for r in rows)
    for s in range(1, K):
        assert max(sep.blocks[s - 1]) < min(sep.blocks[s]) - math.factorial(2 * s)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_progression_differences_fill_a_block(k):
    f = math.factorial(2 * k)
    prog = [f * j for j in range(k + 1)]
    assert diff_set(prog, 1).value_set == set(factorial_block(k))


def test_strict_inclusion_witnesses():
    out = check_strict_inclusion(4)
    E = set(out["set"].elements)
    for r in range(2, 5):
        w = out["witnesses"][r]
        assert not isinstance(w, NotFound) and len(w.elements) == r
        assert diff_set(w, 1).value_set <= E


def test_powers_of_ten_examples():
    assert powers_of_ten_set(1).elements == (9, 90, 99)
    assert 990 in powers_of_ten_set(2).elements


@pytest.mark.parametrize("K", [1, 3, 6])
def test_powers_of_ten_are_differences(K):
    D = set(powers_of_ten_set(K).elements)
    assert D == diff_set([10 ** k for k in range(K + 2)], 1).value_set
    assert D == {9 * sum(10 ** s for s in range(i, j + 1)) for i in range(K + 1) for j in range(i, K + 1)}


def test_no_fs_triple_in_powers_of_ten():
    D = powers_of_ten_set(8).elements
    Dset = set(D)
    brute = [t for t in itertools.combinations(D, 3)
             if {sum(c) for k in (2, 3) for c in itertools.combinations(t, k)} <= Dset]
    assert brute == []
    assert isinstance(check_powers_of_ten(8, 3), NotFound)


def test_lacunary_contract_cases():
    with pytest.raises(MalformedInput):
        lacunary_fs_check([3, 5, 20])
    with pytest.raises(MalformedQuery):
        lacunary_fs_check([3, 9, 27], level=3)
    assert isinstance(lacunary_fs_check([3, 9, 27], c_bound=0).result, NotFound)


def test_lacunary_small_bound():
    res = lacunary_fs_check([3 ** k for k in range(1, 5)], c_bound=30)
    assert res.target_length == 14 and isinstance(res.result, NotFound)
    assert res.fs_size == 15


def test_multiples_examples():
    assert multiples_subsequence(range(1, 21), 3, 5).elements == (1, 4, 7, 10, 13)
    tens = [10 ** k for k in range(1, 7)]
    assert multiples_subsequence(tens, 9, 6).elements == tuple(tens)
    with pytest.raises(NotEnoughElements):
        multiples_subsequence([1, 2, 3], 1, 5)


@given(st.lists(st.integers(1, 10**6), min_size=8, max_size=40, unique=True), st.integers(2, 7))
def test_multiples_have_divisible_differences(xs, m):
    s = sorted(xs)
    target = max(2, len(s) // m)
    try:
        sub = multiples_subsequence(s, m, target)
    except NotEnoughElements:
        return
    for level in (1, 2, 3):
        if len(sub.elements) >= 2 ** level:
            assert all(v % m == 0 for v in diff_set(sub, level).values)


def test_window_density_examples():
    assert window_density(range(1, 11), 1, 10) == 1
    assert window_density([], 1, 10) == 0
    E = strict_inclusion_set(4).elements
    end = math.factorial(10)
    assert window_density(E, 1, end) == F(sum(1 for e in E if 1 <= e <= end), end)
    assert window_density(E, 1, end) == F(1, 362880)
    with pytest.raises(MalformedQuery):
        window_density(E, 5, 4)
