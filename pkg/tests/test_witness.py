import itertools
import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from iterdiff.core_diff import diff_set
from iterdiff.dioph import IN, PolySpec
from iterdiff.errors import MalformedInput, NotFound, TooShort
from iterdiff.reals import ExactRational, constant
from iterdiff.verify import verify_certificate, verify_witness
from iterdiff.witness import (build_even_avoider, build_high_degree_avoider,
                              build_nonsyndetic_avoider, build_square_avoider, find_delta_witness,
                              nonsyndetic_intervals, odd_degree_factor, sarkozy_search)

from oracles import lex_least_quadruple, mp_dist, naive_diff

SQRT2_CUBE = "sqrt2*x^3"
increasing = st.lists(st.integers(1, 10**9), min_size=4, max_size=14, unique=True).map(sorted)


def _all_diffs(seq, level):
    for idx in itertools.combinations(range(len(seq)), 2 ** level):
        yield naive_diff([seq[i] for i in idx])


def test_rational_cubic_example():
    r = find_delta_witness((1, 2, 3), PolySpec.of((3, F(1, 2))), F(1, 10), 1)
    assert r.indices.indices == (1, 3) and r.diff_value == 2
    assert r.bound.upper == 0 and r.bound.verdict == IN


def test_powers_of_three_match_exhaustive_oracle():
    seq = [3 ** k for k in range(1, 21)]
    with mpmath.workprec(256):
        oracle = lex_least_quadruple(seq, mpmath.sqrt(2), 3, mpmath.mpf(1) / 4)
    r = find_delta_witness(seq, PolySpec.parse(SQRT2_CUBE), F(1, 4), 2)
    assert (r.indices.indices, r.diff_value) == oracle == ((1, 2, 3, 5), 210)
    assert verify_witness(r)


def test_too_short():
    with pytest.raises(TooShort):
        find_delta_witness((1, 2, 3), PolySpec.parse(SQRT2_CUBE), F(1, 4), 2)
    with pytest.raises(MalformedInput):
        find_delta_witness((1, 2, 3, 4), PolySpec.parse(SQRT2_CUBE), F(3, 4), 2)


def test_absence_flagged_for_odd_low_degree():
    res = find_delta_witness((1, 2, 3, 4), PolySpec.parse(SQRT2_CUBE), F(1, 10**6), 2)
    assert isinstance(res, NotFound) and res.kind == "within_sequence"
    assert res.stats["success_guaranteed"] is True
    assert res.stats["nonpositive_skipped"] == 1


@settings(max_examples=30)
@given(increasing, st.sampled_from([F(1, 4), F(1, 10), F(1, 50)]))
def test_witness_agrees_with_oracle(seq, eps):
    with mpmath.workprec(300):
        oracle = lex_least_quadruple(seq, mpmath.sqrt(2), 3, mpmath.mpf(eps.numerator) / eps.denominator)
    r = find_delta_witness(seq, PolySpec.parse(SQRT2_CUBE), eps, 2)
    assert ((r.indices.indices, r.diff_value) if r else None) == oracle
    if r:
        assert verify_witness(r)


@settings(max_examples=20)
@given(increasing)
def test_threads_do_not_change_the_answer(seq):
    v = PolySpec.parse(SQRT2_CUBE)
    a = find_delta_witness(seq, v, F(1, 20), 2, threads=1)
    b = find_delta_witness(seq, v, F(1, 20), 2, threads=3)
    assert a == b


@settings(max_examples=30)
@given(increasing, st.fractions(min_value=F(1, 1000), max_value=F(1, 4)),
       st.fractions(min_value=0, max_value=F(1, 4)))
def test_larger_epsilon_keeps_success(seq, eps, extra):
    v = PolySpec.parse(SQRT2_CUBE)
    small = find_delta_witness(seq, v, eps, 2)
    big = find_delta_witness(seq, v, min(eps + extra, F(1, 2)), 2)
    if small:
        assert big and big.indices.indices <= small.indices.indices


@settings(max_examples=40)
@given(st.integers(1, 12), st.lists(st.integers(1, 10**12), min_size=13, max_size=13, unique=True))
def test_rational_polynomial_pigeonhole(b, pool):
    seq = sorted(pool)[: b + 1]
    r = find_delta_witness(seq, PolySpec.of((3, F(1, b))), F(1, 1000), 1)
    assert r and r.bound.upper == 0 and r.diff_value ** 3 % b == 0


def test_verify_rejects_tampering():
    r = find_delta_witness([3 ** k for k in range(1, 21)], PolySpec.parse(SQRT2_CUBE), F(1, 4), 2)
    r.diff_value += 1
    assert not verify_witness(r)


def _sqrt2_dist(d, shift=0):
    return mp_dist(mpmath.sqrt(2) * mpmath.mpf(d) ** 2 - shift)


def test_square_avoider_certificate():
    cert = build_square_avoider(constant("sqrt2"), F(1, 6), 8)
    assert cert.verified and len(cert.sequence.elements) == 8
    assert len(cert.checks) == math.comb(8, 4)
    assert verify_certificate(cert) == []
    with mpmath.workprec(4000):
        for d in _all_diffs(cert.sequence.elements, 2):
            assert _sqrt2_dist(d, mpmath.mpf(4) / 3) < mpmath.mpf(1) / 6
            assert _sqrt2_dist(d) >= mpmath.mpf(1) / 6
    assert min(c.direct.lower for c in cert.checks) >= F(1, 3) - F(1, 6)


def test_square_avoider_contract_cases():
    cert = build_square_avoider(constant("sqrt2"), F(1, 6), 4)
    assert len(cert.checks) == 1 and cert.verified
    with pytest.raises(MalformedInput):
        build_square_avoider(ExactRational(F(1, 3)))
    with pytest.raises(MalformedInput):
        build_square_avoider(constant("sqrt2"), F(1, 5))


def test_square_avoider_partial_when_scan_is_short():
    cert = build_square_avoider(constant("sqrt2"), F(1, 6), 8, scan_bound=10)
    assert cert.status == "partial" and not cert.complete
    assert cert.construction[0]["examined"] == 10


def test_even_avoider_certificate():
    cert = build_even_avoider(PolySpec.parse("sqrt2*x^2"), F(3, 10), 2, 8)
    assert cert.verified and verify_certificate(cert) == []
    seq = cert.sequence.elements
    with mpmath.workprec(4000):
        for level in (1, 2):
            for d in _all_diffs(seq, level):
                assert _sqrt2_dist(d) > mpmath.mpf(3) / 10


def test_even_avoider_with_rational_even_terms():
    cert = build_even_avoider(PolySpec.parse("sqrt2*x^2 + 1/3*x^4"), F(1, 4), 1, 6)
    assert cert.verified and verify_certificate(cert) == []


@pytest.mark.parametrize("poly", ["x^2", "sqrt2*x^3", "sqrt2*x^2 + 1"])
def test_even_avoider_rejections(poly):
    with pytest.raises(MalformedInput):
        build_even_avoider(PolySpec.parse(poly), F(3, 10), 2, 8)


def test_odd_degree_factor_matches_factorial_formula():
    for j in range(1, 8):
        want = -(2 ** (j - 1)) * math.factorial(2 * j + 1) // (2 * math.factorial(2 * j - 1))
        assert odd_degree_factor(j) == want


def test_high_degree_avoider_pairs():
    v = PolySpec.parse("sqrt2*x^5")
    cert = build_high_degree_avoider(v, 1, 8, [constant("sqrt3"), constant("sqrt5")])
    assert cert.verified and verify_certificate(cert) == []
    with mpmath.workprec(4000):
        for d in _all_diffs(cert.sequence.elements, 1):
            assert mp_dist(mpmath.sqrt(2) * mpmath.mpf(d) ** 5) > mpmath.mpf(1) / 4


def test_high_degree_avoider_contract_cases():
    with pytest.raises(MalformedInput):
        build_high_degree_avoider(PolySpec.parse("sqrt2*x^3"), 2, 8, [constant("sqrt3")])
    with pytest.raises(TooShort):
        build_high_degree_avoider(PolySpec.parse("sqrt2*x^5"), 2, 3,
                                  [constant("sqrt3"), constant("sqrt5")])
    with pytest.raises(MalformedInput):
        build_high_degree_avoider(PolySpec.parse("sqrt2*x^5"), 1, 8)


def test_nonsyndetic_intervals_growth():
    iv = nonsyndetic_intervals(6)
    assert [r for _, r in iv] == [2, 6, 20, 62, 188, 566]
    for k in range(1, 6):
        assert iv[k][0] == sum(r for _, r in iv[:k]) + k and iv[k][1] == 2 * iv[k][0]


def test_nonsyndetic_certificate():
    iv = nonsyndetic_intervals(6)
    cert = build_nonsyndetic_avoider(iv, 2)
    assert cert.verified and cert.sequence.elements == tuple(r for _, r in iv)
    assert verify_certificate(cert) == []
    for d in _all_diffs(cert.sequence.elements, 2):
        assert any(lo <= d <= hi for lo, hi in iv)


def test_nonsyndetic_rejections():
    with pytest.raises(TooShort):
        build_nonsyndetic_avoider(nonsyndetic_intervals(2), 2)
    with pytest.raises(MalformedInput):
        build_nonsyndetic_avoider([(1, 5), (4, 20), (30, 100), (200, 900)], 2)
    with pytest.raises(MalformedInput):
        # R_1 + L_2 = 2 + 3 is not below R_2 = 4
        build_nonsyndetic_avoider([(1, 2), (3, 4), (10, 100), (200, 900)], 1)


def test_sarkozy_examples():
    cube = PolySpec.parse("x^3")
    assert sarkozy_search([1, 2], cube, 10).hits == (1,)
    assert 3 in sarkozy_search([1, 9, 28], cube, 10).hits
    empty = sarkozy_search([], cube, 10)
    assert empty.hits == () and empty.density == 0
    with pytest.raises(MalformedInput):
        sarkozy_search([1, 2], PolySpec.parse("1/2*x^3"), 10)
    with pytest.raises(MalformedInput):
        sarkozy_search([1, 2], PolySpec.parse("sqrt2*x"), 10)


@given(st.sets(st.integers(1, 60), max_size=15), st.integers(1, 40))
def test_sarkozy_matches_direct_enumeration(E, N):
    v = PolySpec.parse("1/2*x^2 + 1/2*x")
    diffs = {a - b for a in E for b in E if a > b}
    want = tuple(n for n in range(1, N + 1) if n * (n + 1) // 2 in diffs)
    assert sarkozy_search(E, v, N).hits == want
