import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pellconcat.sequences import (
    ALPHA,
    BETA,
    EquationId,
    QuadInt,
    QuadRat,
    alpha_power,
    concat_check,
    digit_count,
    pell,
    pell_binet_exact,
    pell_lucas,
    pell_lucas_binet_exact,
    pell_lucas_table,
    pell_table,
)

from .oracles import digits_naive, pell_lucas_naive, pell_naive


def test_first_terms():
    assert [pell(n) for n in range(8)] == [0, 1, 2, 5, 12, 29, 70, 169]
    assert [pell_lucas(n) for n in range(6)] == [2, 2, 6, 14, 34, 82]


@pytest.mark.parametrize("n", [0, 1, 2, 3, 10, 57, 64, 100, 257, 1000])
def test_fast_doubling_matches_recurrence(n):
    assert pell(n) == pell_naive(n)
    assert pell_lucas(n) == pell_lucas_naive(n)


def test_tables_match_pointwise():
    assert pell_table(120) == [pell_naive(i) for i in range(121)]
    assert pell_lucas_table(120) == [pell_lucas_naive(i) for i in range(121)]


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        pell(-1)


@given(st.integers(min_value=0, max_value=600))
def test_binet_exact(n):
    assert pell_binet_exact(n) == pell(n)
    assert pell_lucas_binet_exact(n) == pell_lucas(n)


@given(st.integers(min_value=1, max_value=400))
def test_lucas_companion_identity(k):
    assert pell_lucas(k) == pell(k + 1) + pell(k - 1)
    assert pell_lucas(k) == 2 * (pell(k) + pell(k - 1))


def test_quadint_units():
    assert ALPHA * BETA == QuadInt(-1, 0)
    assert ALPHA.norm() == -1
    assert ALPHA * ALPHA.unit_inverse() == QuadInt(1, 0)
    assert alpha_power(-3) * alpha_power(3) == QuadRat.of(1)


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_quadint_norm_is_multiplicative(a, b, c, d):
    x, y = QuadInt(a, b), QuadInt(c, d)
    assert (x * y).norm() == x.norm() * y.norm()
    assert (x * y).conj() == x.conj() * y.conj()


@given(st.integers(-9, 9), st.integers(-9, 9), st.integers(1, 9))
def test_quadrat_inverse(a, c, den):
    x = QuadRat(QuadInt(a, c), den)
    if a == 0 and c == 0:
        with pytest.raises(ZeroDivisionError):
            x.inverse()
    else:
        assert x * x.inverse() == QuadRat.of(1)


@given(st.integers(min_value=0, max_value=10 ** 40), st.integers(min_value=2, max_value=40))
def test_digit_count_matches_division(x, b):
    assert digit_count(x, b) == digits_naive(x, b)


def test_digit_count_edges():
    assert digit_count(0, 10) == 1
    assert digit_count(9, 10) == 1
    assert digit_count(10, 10) == 2
    assert digit_count(34, 6) == 2
    with pytest.raises(ValueError):
        digit_count(5, 1)


def test_concat_check_known_identity():
    chk = concat_check(1, 6, 6, 1, 4)
    assert chk.holds and chk.d == 2
    assert (chk.lhs, chk.term1, chk.term2) == (70, 36, 34)
    assert concat_check(2, 5, 6, 3, 0).holds
    assert not concat_check(1, 6, 6, 1, 3).holds


def test_equation_parse():
    assert EquationId.parse("2") is EquationId.EQ2
    with pytest.raises(ValueError):
        EquationId.parse(3)


@settings(max_examples=60)
@given(st.integers(min_value=2, max_value=200), st.integers(min_value=2, max_value=10))
def test_digit_bounds_for_lucas_terms(k, b):
    import math

    d = digit_count(pell_lucas(k), b)
    assert pell_lucas(k) < b ** d <= b * pell_lucas(k)
    assert (k - 2) * math.log(1 + math.sqrt(2)) / math.log(b) < d
