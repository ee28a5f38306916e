from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pellconcat.contfrac import (
    CFExpansion,
    cached_expansion,
    expand,
    extend,
    first_denominator_exceeding,
    legendre_rational_gap,
    max_partial_quotient,
    tau,
)
from pellconcat.hpreal import PrecisionExhausted, PrecisionPolicy

from .oracles import cf_mpmath, convergents

M_LEGENDRE = 91_200_000_000_000_000_000_000_000_000


@pytest.mark.parametrize("b", range(2, 11))
def test_partial_quotients_match_plain_float_expansion(b):
    cf = expand(b, terms=80)
    assert list(cf.partial_quotients) == cf_mpmath(b, 80)
    assert list(cf.convergents) == convergents(cf_mpmath(b, 80))


@pytest.mark.parametrize("b", [2, 3, 6, 10])
def test_determinant_identity(b):
    cf = expand(b, terms=70)
    conv = cf.convergents
    for t in range(1, len(conv)):
        (p1, q1), (p0, q0) = conv[t], conv[t - 1]
        assert p1 * q0 - p0 * q1 == (-1) ** (t + 1)


def test_convergents_alternate_around_tau():
    cf = expand(5, terms=40)
    x = tau(5, 512)
    for t, (p, q) in enumerate(cf.convergents):
        side = x - Fraction(p, q)
        assert (side.sign() == 1) == (t % 2 == 0)


def test_until_q_stops_at_first_large_denominator():
    cf = expand(2, until_q=10 ** 30)
    qs = cf.denominators()
    assert qs[-1] > 10 ** 30 and all(q <= 10 ** 30 for q in qs[:-1])
    assert len(cf.partial_quotients) == 59


def test_exactly_one_stopping_rule():
    with pytest.raises(ValueError):
        expand(3, terms=4, until_q=100)
    with pytest.raises(ValueError):
        expand(3)


def test_resume_gives_same_terms():
    short = expand(7, terms=15)
    assert extend(short, terms=60).partial_quotients == expand(7, terms=60).partial_quotients
    assert extend(short, terms=10).partial_quotients == short.partial_quotients[:10]


def test_precision_exhaustion():
    with pytest.raises(PrecisionExhausted) as info:
        expand(3, terms=200, policy=PrecisionPolicy(64, 256))
    assert isinstance(info.value.last, CFExpansion)
    assert 0 < len(info.value.last.partial_quotients) < 200


def test_json_uses_decimal_strings():
    d = expand(2, terms=4).to_json()
    assert d["partial_quotients"] == ["0", "1", "3", "1"]
    assert d["convergents"][2] == {"t": 2, "p": "3", "q": "4"}


# a(M) for M = 9.12e28, 0-based argmax index and N; published indices are these plus one
FROZEN_MAX_QUOTIENTS = {
    2: (55, 100, 27), 3: (58, 130, 26), 4: (65, 110, 58), 5: (54, 163, 16), 6: (42, 509, 8),
    7: (57, 33, 7), 8: (55, 34, 24), 9: (52, 68, 4), 10: (66, 52, 23),
}


@pytest.mark.parametrize("b", range(2, 11))
def test_max_partial_quotient_frozen(b):
    mq = max_partial_quotient(cached_expansion(b, M_LEGENDRE), M_LEGENDRE)
    assert (mq.N, mq.a_of_M, mq.argmax_index) == FROZEN_MAX_QUOTIENTS[b]
    oracle = cf_mpmath(b, 90)
    qs = [q for _, q in convergents(oracle)]
    N = next(t for t, q in enumerate(qs) if q > M_LEGENDRE)
    assert N == mq.N and max(oracle[: N + 1]) == mq.a_of_M


def test_first_denominator_exceeding_extends():
    t, q = first_denominator_exceeding(expand(4, terms=3), 10 ** 12)
    assert q > 10 ** 12 and expand(4, terms=t).q(t - 1) <= 10 ** 12


def _check_legendre(b, M):
    """|tau - x/y| >= c / y^2 for every 0 < y < M and both neighbours x of y tau."""
    c = legendre_rational_gap(cached_expansion(b, M), M)
    x = tau(b, 256)
    for y in range(1, M):
        near = (x * y).floor()
        for num in (near, near + 1):
            assert abs(x - Fraction(num, y)).lower() >= c / (y * y)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=2, max_value=400))
def test_legendre_gap_holds_at_toy_scale(b, M):
    _check_legendre(b, M)


@pytest.mark.parametrize("b", [2, 6, 10])
def test_legendre_gap_full_toy_range(b):
    _check_legendre(b, 10 ** 4)
