import itertools
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from iterdiff.dioph import IN, PolySpec
from iterdiff.errors import BoundExceeded, MalformedInput, MalformedQuery, NotFound, PipelineIncomplete, TooShort
from iterdiff.ramsey import (Coloring, cells_for, cube_cell, finitistic_cubic_pipeline,
                             is_monochromatic, monochromatic_search, ramsey_upper_bound)
from iterdiff.reals import DigitSource, NamedIrrational, constant

from oracles import brute_monochromatic, mp_dist

PENTAGON = {(i, j): int((j - i) % 5 in (1, 4)) for i, j in itertools.combinations(range(1, 6), 2)}


def test_pentagon_has_no_monochromatic_triangle():
    assert brute_monochromatic(5, 2, PENTAGON.__getitem__, 3) is None
    c = Coloring.from_map(5, 2, {f"{i},{j}": v for (i, j), v in PENTAGON.items()})
    assert isinstance(monochromatic_search(c, 3), NotFound)


def test_bound_examples():
    assert ramsey_upper_bound(1, 2, 3) >= 6  # the pentagon shows R > 5
    assert ramsey_upper_bound(1, 2, 3) == 8
    assert ramsey_upper_bound(3, 1, 11) == 11
    assert ramsey_upper_bound(2, 5, 4) == 4
    assert ramsey_upper_bound(1, 5, 2) == 2


def test_bound_errors():
    with pytest.raises(MalformedQuery):
        ramsey_upper_bound(2, 2, 3)
    with pytest.raises(MalformedQuery):
        ramsey_upper_bound(1, 0, 3)
    with pytest.raises(BoundExceeded):
        ramsey_upper_bound(2, 2, 5)


@given(st.integers(1, 2), st.integers(1, 4), st.integers(0, 3))
def test_bound_monotone(level, M, extra):
    r = 2 ** level + extra
    try:
        b = ramsey_upper_bound(level, M, r)
        b_next_r = ramsey_upper_bound(level, M, r + 1)
        b_next_m = ramsey_upper_bound(level, M + 1, r)
    except BoundExceeded:
        return
    assert b >= r
    assert b_next_m >= b
    if M >= 2:
        assert b_next_r > b


def test_every_two_colouring_of_k6_has_a_triangle():
    pairs = list(itertools.combinations(range(1, 7), 2))
    for mask in range(1 << len(pairs)):
        table = {p: (mask >> i) & 1 for i, p in enumerate(pairs)}
        c = Coloring(6, 2, table.__getitem__)
        found = monochromatic_search(c, 3)
        assert found == brute_monochromatic(6, 2, table.__getitem__, 3)
        assert is_monochromatic(c, found)


@settings(max_examples=40)
@given(st.integers(4, 9), st.integers(2, 3), st.integers(1, 3), st.data())
def test_search_matches_brute_force(ground, arity, colours, data):
    subsets = list(itertools.combinations(range(1, ground + 1), arity))
    cols = data.draw(st.lists(st.integers(0, colours - 1), min_size=len(subsets), max_size=len(subsets)))
    table = dict(zip(subsets, cols))
    r = data.draw(st.integers(arity, ground))
    got = monochromatic_search(Coloring(ground, arity, table.__getitem__), r)
    want = brute_monochromatic(ground, arity, table.__getitem__, r)
    assert (None if isinstance(got, NotFound) else got) == want


def test_single_colour_returns_whole_ground():
    c = Coloring(7, 4, lambda s: "x")
    assert monochromatic_search(c, 7) == tuple(range(1, 8))


def test_node_budget():
    c = Coloring.from_map(5, 2, {f"{i},{j}": v for (i, j), v in PENTAGON.items()})
    with pytest.raises(BoundExceeded):
        monochromatic_search(c, 3, node_budget=3)


def test_coloring_json_must_be_total():
    with pytest.raises(MalformedInput):
        Coloring.from_json({"ground": 4, "arity": 2, "colors": {"1,2": 0}})
    c = Coloring.from_json('{"ground": 3, "arity": 2, "colors": {"1,2": 0, "1,3": 0, "2,3": 0}}')
    assert monochromatic_search(c, 3) == (1, 2, 3)


def test_cube_cell_examples():
    assert cube_cell((F(1, 20), F(11, 20), F(19, 20)), 10) == (0, 5, 9)
    assert cube_cell((0, 0, 0), 4) == (0, 0, 0)
    assert cube_cell((F(-1, 20), F(5, 2), 3), 10) == (9, 5, 0)
    blurry = NamedIrrational("blurry", DigitSource("0.1"))
    assert cube_cell((blurry, 0, 0), 10) is None
    s2 = constant("sqrt2")
    assert cube_cell((s2, s2, s2), 10) == (4, 4, 4)


def test_cells_for():
    assert cells_for(F(4, 5)) == 9
    assert cells_for(8) == 1
    assert cells_for(7) == 2  # 7/1 is not below 7
    with pytest.raises(MalformedInput):
        cells_for(0)


def test_pipeline_single_cell():
    rep = finitistic_cubic_pipeline(constant("sqrt2"), 8, [1, 2, 3, 5, 8, 13, 21])
    assert rep.N == 1 and rep.mono_set == (1, 2, 3, 4, 5, 6) and rep.verified


def test_pipeline_errors():
    with pytest.raises(TooShort):
        finitistic_cubic_pipeline(constant("sqrt2"), F(4, 5), [1, 2, 3, 4, 5])
    fib = [1, 2]
    while len(fib) < 40:
        fib.append(fib[-1] + fib[-2])
    with pytest.raises(PipelineIncomplete) as info:
        finitistic_cubic_pipeline(constant("sqrt2"), F(4, 5), fib, node_budget=20000)
    assert info.value.stats["N"] == 9


def _scaled_fibonacci(q, count):
    a, b, out = 1, 2, []
    for _ in range(count):
        out.append(q * a)
        a, b = b, a + b
    return out


def test_pipeline_soundness():
    seq = _scaled_fibonacci(1393, 40)
    rep = finitistic_cubic_pipeline(constant("sqrt2"), F(4, 5), seq)
    assert rep.verified and rep.direct_check["agrees"]
    with mpmath.workprec(2 * 4096):
        assert mp_dist(mpmath.sqrt(2) * mpmath.mpf(rep.diff_value) ** 3) < mpmath.mpf(4) / 5
        for item in rep.inequalities:
            assert mp_dist(mpmath.sqrt(2) * item["multiplier"]) < \
                mpmath.mpf(item["threshold"].numerator) / item["threshold"].denominator
    t = rep.mono_set
    assert rep.values == tuple(seq[i - 1] for i in t[:4])
    n = [0] + seq
    s2 = constant("sqrt2")
    from iterdiff.reals import scaled
    cells = set()
    for j1, j2, j3, _ in itertools.combinations(t, 4):
        g = n[j2] - n[j1]
        cells.add(cube_cell((scaled(s2, g ** 3), scaled(s2, n[j3] * g * g),
                             scaled(s2, (n[j3] - n[j2]) ** 2 * n[j1])), rep.N))
    assert len(cells) == 1 and None not in cells
