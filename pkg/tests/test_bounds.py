from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pellconcat.bounds import (
    REFERENCE_CONSTANTS,
    MatveevInstance,
    absolute_bound,
    absorption_holds,
    d_bound,
    height_composite_gamma3,
    height_rational,
    lemma7_solve,
    matveev_constant,
    matveev_exponent,
    n_bound_given_gap,
    solve_n_log_bound,
)
from pellconcat.hpreal import RealBall, log_nat
from pellconcat.sequences import EquationId

mp = mpmath.mp


def _f(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


@pytest.mark.parametrize("s,D", [(1, 1), (2, 2), (3, 2), (3, 4)])
def test_matveev_constant_formula(s, D):
    with mpmath.workdps(60):
        expect = mpmath.mpf(1.4) * 30 ** (s + 3) * mpmath.mpf(s) ** 4.5 * D ** 2 * (1 + mpmath.log(D))
        c = matveev_constant(s, D)
        assert _f(c.lower()) <= expect * (1 + mpmath.mpf(10) ** -15)
        assert expect <= _f(c.upper()) * (1 + mpmath.mpf(10) ** -15)


def test_matveev_instance_validation():
    one = RealBall.from_int(1)
    with pytest.raises(ValueError):
        MatveevInstance(2, 2, one, (one,))
    with pytest.raises(ValueError):
        MatveevInstance(1, 2, one, (RealBall.from_fraction(Fraction(1, 10)),))
    inst = MatveevInstance(1, 1, RealBall.from_int(3), (one,))
    assert matveev_exponent(inst).is_positive()


def test_heights():
    assert height_rational(3, 2).overlaps(log_nat(3))
    assert height_rational(-7, 3).overlaps(log_nat(7))
    with pytest.raises(ValueError):
        height_rational(4, 2)
    with pytest.raises(ValueError):
        height_composite_gamma3(1, 0, 5)
    with pytest.raises(ValueError):
        height_composite_gamma3(2, 0, 0)
    with mpmath.workdps(40):
        la, l2 = mpmath.log(1 + mpmath.sqrt(2)), mpmath.log(2)
        for eq, shift, m, g in ((1, 4, 3, 7), (2, 8, 0, 1)):
            h = height_composite_gamma3(eq, m, g)
            v = ((3 * g + shift) * la + 5 * l2) / 2
            assert _f(h.lower()) <= v * (1 + mpmath.mpf(10) ** -30)
            assert v <= _f(h.upper()) * (1 + mpmath.mpf(10) ** -30)


# frozen from an independent float evaluation of the same chain (rel. tol 1e-3)
FROZEN = {
    EquationId.EQ1: {"lambda1_matveev": 1.04269e10, "lambda2_matveev": 1.93949e12,
                     "C": 2.757e10, "n_squared_log": 5.347e22, "H": 4.3446e23, "final": 5.560e27},
    EquationId.EQ2: {"gap": 4.03305e12, "lambda2_matveev": 1.93949e12, "C": 1.0664e13,
                     "n_squared_log": 2.068e25, "H": 1.861e26, "final": 3.836e30},
}


def _chain_oracle(eq):
    """Straight mpmath evaluation of the stage chain."""
    log, mpf = mpmath.log, mpmath.mpf
    la, l2 = log(1 + mpmath.sqrt(2)), log(2)

    def c(s, D):
        return mpf("1.4") * 30 ** (s + 3) * mpf(s) ** 4.5 * D ** 2 * (1 + log(D))

    out = {}
    if eq == 1:
        lam1 = 2 * c(2, 2)
        gap = lam1 + log(mpf("2.2")) / (la * l2 * (1 + log(mpf("2.6"))))
        a3, bm = 10 * la + 5 * l2, 1 + log(mpf("3.9"))
        lam2 = 2 * c(3, 2) + log(mpf("5.885")) / (la * a3 * l2 * bm)
        C = 3 * la * gap + a3 / (l2 * bm)
        E = lam2 * C
        out.update(lambda1_matveev=lam1, gap=gap, lambda2_matveev=lam2, C=C, n_squared_log=E,
                   n_log_absorbed=E * mpf("6.25"), H=E * mpf("6.25") * mpf("1.3"))
    else:
        gap = 2 * c(3, 2) * log(8) + log(4) / (la * l2 * (1 + log(mpf("1.3"))))
        a3, bm = 11 * la + 5 * l2, 1 + log(mpf("2.6"))
        lam2 = 2 * c(3, 2) + log(mpf("3.42")) / (la * a3 * l2 * bm)
        C = 3 * la * gap + a3 / (l2 * bm)
        E = lam2 * C
        out.update(gap=gap, lambda2_matveev=lam2, C=C, n_squared_log=E, H=9 * E + 1 / l2 ** 4)
    H = out["H"]
    K = (log(H) + 2 * log(l2)) / mpmath.sqrt(l2)
    out.update(log_H=log(H), sqrt_log_factor=K,
               final=4 * H * K * K / (mpf("1.3") if eq == 1 else 1))
    return out


@pytest.mark.parametrize("eq", [1, 2])
def test_stage_chain_matches_oracle(eq):
    rep = absolute_bound(eq, 2)
    with mpmath.workdps(50):
        oracle = _chain_oracle(eq)
        assert [s.label for s in rep.stages] == list(oracle)
        tol = mpmath.mpf(10) ** -30
        for stage in rep.stages:
            lo, hi = _f(stage.value.lower()), _f(stage.value.upper())
            v = oracle[stage.label]
            assert lo * (1 - tol) <= v <= hi * (1 + tol), stage.label


@pytest.mark.parametrize("eq", list(EquationId))
def test_stage_constants_frozen_and_below_reference(eq):
    rep = absolute_bound(eq, 10)
    for label, value in FROZEN[eq].items():
        got = float(rep.stage(label).value.upper())
        assert got == pytest.approx(value, rel=1e-3), label
    for stage in rep.stages:
        assert stage.within_reference(), stage.label
        assert set(REFERENCE_CONSTANTS[eq]) >= {stage.label}


def test_lambda1_from_scratch():
    # 2 * 1.4 * 30^5 * 2^4.5 * 4 * (1 + log 2)
    with mpmath.workdps(40):
        v = 2 * mpmath.mpf("1.4") * 30 ** 5 * mpmath.mpf(2) ** 4.5 * 4 * (1 + mpmath.log(2))
        lam = absolute_bound(1, 2).stage("lambda1_matveev").value
        tol = mpmath.mpf(10) ** -30
        assert _f(lam.lower()) * (1 - tol) <= v <= _f(lam.upper()) * (1 + tol)


@pytest.mark.parametrize("b", range(2, 11))
def test_absolute_bounds_below_published_closed_form(b):
    lb3 = log_nat(b) ** 3
    for eq, c in ((1, "5.746e27"), (2, "4.7e30")):
        bound = absolute_bound(eq, b).n_bound
        assert bound.certainly_lt(lb3 * RealBall.from_fraction(Fraction(c)))


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=257.0, max_value=1e30))
def test_lemma7_bound_is_sound(H):
    """Above the returned bound, L / (log L)^2 exceeds H."""
    Hb = RealBall.from_fraction(Fraction(H))
    L = lemma7_solve(2, Hb)
    with mpmath.workdps(50):
        x = _f(L.upper())
        for scale in (1, 2, 10, 1000):
            y = x * scale
            assert y / mpmath.log(y) ** 2 >= H


def test_lemma7_hypothesis_checked():
    with pytest.raises(ValueError):
        lemma7_solve(2, RealBall.from_int(16))


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1.0, max_value=1e18))
def test_solve_n_log_bound(c):
    cb = RealBall.from_fraction(Fraction(c))
    X = solve_n_log_bound(cb)
    with mpmath.workdps(50):
        g = lambda n: n - c * (1 + mpmath.log(mpmath.mpf("1.3") * (n + 1)))  # noqa: E731
        assert g(X) >= 0 and g(2 * X) >= 0 and g(10 * X) >= 0
        # not wildly loose
        assert g(X * (1 - 1e-4)) < 0 or X < 100


def test_absorption_checks():
    assert absorption_holds(Fraction(5, 2), Fraction(13, 10), 0, 2)
    assert absorption_holds(Fraction(3), Fraction(1), 1, 1)
    with mpmath.workdps(30):
        for n in range(2, 10 ** 5, 997):
            assert 1 + mpmath.log(1.3 * (n + 1)) < 2.5 * mpmath.log(1.3 * n)
            assert 1 + mpmath.log(1.3 * (n + 1)) < 3 * mpmath.log(n + 1)


def test_second_form_bounds():
    X1 = n_bound_given_gap(1, 10, 104)
    X2 = n_bound_given_gap(2, 10, 106)
    assert X1 < Fraction("5.037e16") and X2 < Fraction("5.33e16")
    assert d_bound(X1 + 1) <= 655 * 10 ** 14
    assert d_bound(X2 + 1) <= 7 * 10 ** 16


def test_d_bound_rounding():
    assert d_bound(10) == 13
    assert d_bound(11) == 15  # 14.3 -> 15
    assert d_bound(11, 1) == 13
