"""Midpoint-radius real balls on top of mpmath's low-level float kernel.

A :class:`RealBall` ``[mid - rad, mid + rad]`` always contains the true value it
stands for.  Midpoints are rounded to nearest at ``prec + GUARD`` bits and the
rounding error is charged to the radius; radii are short floats rounded upward.
Every decision that feeds a certificate (sign, floor, comparison) must go
through ``sign``, ``floor`` and ``certainly_*`` below, which refuse to answer when
the ball straddles the decision boundary.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, TypeVar

from mpmath import libmp
from mpmath.libmp import (
    fzero,
    from_int,
    from_rational,
    mpf_abs,
    mpf_add,
    mpf_cmp,
    mpf_div,
    mpf_exp,
    mpf_log,
    mpf_mul,
    mpf_neg,
    mpf_shift,
    mpf_sqrt,
    mpf_sub,
    round_ceiling,
    round_floor,
    round_nearest,
    to_rational,
)

GUARD = 16
RAD_PREC = 32
_UP = round_ceiling
_DOWN = round_floor

T = TypeVar("T")


class PrecisionExhausted(RuntimeError):
    """Raised when a predicate could not be certified below ``max_bits``."""

    def __init__(self, message: str, last=None, bits: int | None = None):
        super().__init__(message)
        self.last = last
        self.bits = bits


@dataclass(frozen=True)
class PrecisionPolicy:
    initial_bits: int = 128
    max_bits: int = 1 << 16
    escalation_factor: int = 2

    def __post_init__(self):
        if self.initial_bits < 1 or self.max_bits < 1:
            raise ValueError("precisions must be positive")
        if self.initial_bits > self.max_bits:
            raise ValueError("initial_bits must not exceed max_bits")
        if self.escalation_factor < 2:
            raise ValueError("escalation_factor must be >= 2")

    @classmethod
    def from_env(cls, **overrides) -> "PrecisionPolicy":
        """Explicit overrides win over PELLCONCAT_PRECISION_MAX; None means unset."""
        kw = {k: v for k, v in overrides.items() if v is not None}
        env = os.environ.get("PELLCONCAT_PRECISION_MAX", "").strip()
        if env and "max_bits" not in kw:
            try:
                kw["max_bits"] = int(env)
            except ValueError:
                raise ValueError(f"PELLCONCAT_PRECISION_MAX must be an integer, got {env!r}") from None
        if "initial_bits" not in kw and "max_bits" in kw:
            kw["initial_bits"] = min(cls.initial_bits, kw["max_bits"])
        return cls(**kw)

    def ladder(self, start: int | None = None):
        """Yield the precisions to try, ending exactly at ``max_bits``."""
        p = max(self.initial_bits, start or 0)
        p = min(p, self.max_bits)
        while True:
            yield p
            if p >= self.max_bits:
                return
            p = min(p * self.escalation_factor, self.max_bits)


DEFAULT_POLICY = PrecisionPolicy()


def _up_add(*xs):
    acc = fzero
    for x in xs:
        acc = mpf_add(acc, x, RAD_PREC, _UP)
    return acc


def _up_mul(x, y):
    return mpf_mul(x, y, RAD_PREC, _UP)


def _rel_err(mid, wp):
    """Upper bound on the rounding error of a midpoint rounded to ``wp`` bits."""
    if mid == fzero:
        return fzero
    return mpf_shift(mpf_abs(mid, RAD_PREC, _UP), 1 - wp)


def _coerce(x, prec):
    if isinstance(x, RealBall):
        return x
    if isinstance(x, int):
        return RealBall.from_int(x, prec)
    if isinstance(x, Fraction):
        return RealBall.from_fraction(x, prec)
    return NotImplemented


class RealBall:
    """Certified enclosure ``mid +/- rad`` at nominal precision ``prec`` bits."""

    __slots__ = ("mid", "rad", "prec")

    def __init__(self, mid, rad=fzero, prec: int = 128):
        if mpf_cmp(rad, fzero) < 0:
            raise ValueError("radius must be nonnegative")
        self.mid = mid
        self.rad = rad
        self.prec = prec

    # -- construction -----------------------------------------------------
    @classmethod
    def from_int(cls, n: int, prec: int = 128) -> "RealBall":
        return cls(from_int(n), fzero, prec)

    @classmethod
    def from_fraction(cls, q: Fraction, prec: int = 128) -> "RealBall":
        q = Fraction(q)
        if q.denominator == 1:
            return cls.from_int(q.numerator, prec)
        wp = prec + GUARD
        mid = from_rational(q.numerator, q.denominator, wp, round_nearest)
        return cls(mid, _rel_err(mid, wp), prec)

    @classmethod
    def from_endpoints(cls, lo: Fraction, hi: Fraction, prec: int = 128) -> "RealBall":
        if lo > hi:
            raise ValueError("empty interval")
        c = (Fraction(lo) + Fraction(hi)) / 2
        mid = cls.from_fraction(c, prec)
        half = RealBall.from_fraction((Fraction(hi) - Fraction(lo)) / 2, prec)
        return cls(mid.mid, _up_add(mid.rad, half.upper_raw()), prec)

    # -- endpoints --------------------------------------------------------
    def lower_raw(self):
        return mpf_sub(self.mid, self.rad, RAD_PREC + self.prec + GUARD, _DOWN)

    def upper_raw(self):
        return mpf_add(self.mid, self.rad, RAD_PREC + self.prec + GUARD, _UP)

    def lower(self) -> Fraction:
        p, q = to_rational(self.lower_raw())
        return Fraction(int(p), int(q))

    def upper(self) -> Fraction:
        p, q = to_rational(self.upper_raw())
        return Fraction(int(p), int(q))

    def radius(self) -> Fraction:
        p, q = to_rational(self.rad)
        return Fraction(int(p), int(q))

    def __float__(self):
        return libmp.to_float(self.mid)

    def __repr__(self):
        return (f"RealBall({libmp.to_str(self.mid, 20)} +/- "
                f"{libmp.to_str(self.rad, 3)}, prec={self.prec})")

    def contains(self, x) -> bool:
        x = Fraction(x)
        return self.lower() <= x <= self.upper()

    def overlaps(self, other: "RealBall") -> bool:
        return not (self.upper() < other.lower() or other.upper() < self.lower())

    # -- decisions --------------------------------------------------------
    def sign(self) -> int | None:
        """+1 / -1 when certain, 0 for an exact zero ball, None when ambiguous."""
        if self.rad == fzero and self.mid == fzero:
            return 0
        if mpf_cmp(self.lower_raw(), fzero) > 0:
            return 1
        if mpf_cmp(self.upper_raw(), fzero) < 0:
            return -1
        return None

    def is_positive(self) -> bool:
        return self.sign() == 1

    def is_negative(self) -> bool:
        return self.sign() == -1

    def certainly_lt(self, other) -> bool:
        other = _coerce(other, self.prec)
        return mpf_cmp(self.upper_raw(), other.lower_raw()) < 0

    def certainly_gt(self, other) -> bool:
        other = _coerce(other, self.prec)
        return mpf_cmp(self.lower_raw(), other.upper_raw()) > 0

    def floor(self) -> int | None:
        """The common floor of every point in the ball, or None if it differs."""
        lo = self.lower()
        hi = self.upper()
        f = lo.numerator // lo.denominator
        if f == hi.numerator // hi.denominator:
            return f
        return None

    def ceil(self) -> int | None:
        f = (-self).floor()
        return None if f is None else -f

    # -- arithmetic -------------------------------------------------------
    def _wp(self, other=None):
        p = self.prec if other is None else max(self.prec, other.prec)
        return p, p + GUARD

    def __neg__(self):
        return RealBall(mpf_neg(self.mid), self.rad, self.prec)

    def __abs__(self):
        if mpf_cmp(self.mid, fzero) >= 0:
            return self
        return -self

    def __add__(self, other):
        other = _coerce(other, self.prec)
        if other is NotImplemented:
            return other
        p, wp = self._wp(other)
        mid = mpf_add(self.mid, other.mid, wp, round_nearest)
        return RealBall(mid, _up_add(self.rad, other.rad, _rel_err(mid, wp)), p)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other, self.prec)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other, self.prec)
        if other is NotImplemented:
            return other
        p, wp = self._wp(other)
        mid = mpf_mul(self.mid, other.mid, wp, round_nearest)
        a = mpf_abs(self.mid, RAD_PREC, _UP)
        b = mpf_abs(other.mid, RAD_PREC, _UP)
        rad = _up_add(_up_mul(a, other.rad), _up_mul(b, self.rad),
                      _up_mul(self.rad, other.rad), _rel_err(mid, wp))
        return RealBall(mid, rad, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other, self.prec)
        if other is NotImplemented:
            return other
        if other.sign() in (None, 0):
            raise ZeroDivisionError(f"divisor {other!r} may contain zero")
        p, wp = self._wp(other)
        mid = mpf_div(self.mid, other.mid, wp, round_nearest)
        a = mpf_abs(self.mid, RAD_PREC, _UP)
        b_up = mpf_abs(other.mid, RAD_PREC, _UP)
        b_down = mpf_abs(other.mid, RAD_PREC, _DOWN)
        num = _up_add(_up_mul(self.rad, b_up), _up_mul(a, other.rad))
        gap = mpf_sub(b_down, other.rad, RAD_PREC, _DOWN)
        den = mpf_mul(gap, b_down, RAD_PREC, _DOWN)
        rad = _up_add(mpf_div(num, den, RAD_PREC, _UP), _rel_err(mid, wp))
        return RealBall(mid, rad, p)

    def __rtruediv__(self, other):
        other = _coerce(other, self.prec)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return RealBall.from_int(1, self.prec) / (self ** -e)
        result = RealBall.from_int(1, self.prec)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def scale2(self, k: int) -> "RealBall":
        """Exact multiplication by 2**k."""
        return RealBall(mpf_shift(self.mid, k), mpf_shift(self.rad, k), self.prec)

    def with_prec(self, prec: int) -> "RealBall":
        return RealBall(self.mid, self.rad, prec)

    # -- elementary functions ---------------------------------------------
    def log(self) -> "RealBall":
        if not self.is_positive():
            raise ValueError(f"log of a ball not certainly positive: {self!r}")
        p, wp = self._wp()
        if self.rad == fzero and self.mid == libmp.fone:
            return RealBall(fzero, fzero, p)
        mid = mpf_log(self.mid, wp, round_nearest)
        lo = mpf_sub(self.mid, self.rad, RAD_PREC, _DOWN)
        prop = fzero if self.rad == fzero else mpf_div(self.rad, lo, RAD_PREC, _UP)
        # mpmath's log is accurate to within an ulp; charge two
        return RealBall(mid, _up_add(prop, _rel_err(mid, wp - 1)), p)

    def exp(self) -> "RealBall":
        p, wp = self._wp()
        mid = mpf_exp(self.mid, wp, round_nearest)
        prop = fzero
        if self.rad != fzero:
            top = mpf_exp(mpf_add(self.mid, self.rad, RAD_PREC, _UP), RAD_PREC, _UP)
            prop = _up_mul(mpf_shift(top, 1), self.rad)
        return RealBall(mid, _up_add(prop, _rel_err(mid, wp - 1)), p)

    def sqrt(self) -> "RealBall":
        if not (self.is_positive() or self.sign() == 0):
            raise ValueError("sqrt of a ball not certainly positive")
        p, wp = self._wp()
        mid = mpf_sqrt(self.mid, wp, round_nearest)
        prop = fzero
        if self.rad != fzero:
            lo = mpf_sqrt(mpf_sub(self.mid, self.rad, RAD_PREC, _DOWN), RAD_PREC, _DOWN)
            prop = mpf_div(self.rad, lo, RAD_PREC, _UP)
        return RealBall(mid, _up_add(prop, _rel_err(mid, wp)), p)

    # -- reporting --------------------------------------------------------
    def lower_decimal(self, digits: int = 12) -> str:
        return decimal_string(self.lower(), digits, "down")

    def upper_decimal(self, digits: int = 12) -> str:
        return decimal_string(self.upper(), digits, "up")


def decimal_string(x: Fraction, digits: int = 12, direction: str = "down") -> str:
    """Scientific-notation string of ``x`` with ``digits`` significant figures, rounded
    toward -inf (``down``) or +inf (``up``) so it stays a valid bound."""
    x = Fraction(x)
    if x == 0:
        return "0"
    neg = x < 0
    ax = -x if neg else x
    e = len(str(ax.numerator)) - len(str(ax.denominator))
    while ax >= Fraction(10) ** (e + 1):
        e += 1
    while ax < Fraction(10) ** e:
        e -= 1
    scaled = ax / Fraction(10) ** (e - digits + 1)
    away = (direction == "up") != neg
    if away:
        ip = -((-scaled.numerator) // scaled.denominator)
    else:
        ip = scaled.numerator // scaled.denominator
    if ip >= 10 ** digits:
        ip //= 10
        e += 1
    s = str(ip)
    body = s[0] + ("." + s[1:].rstrip("0") if s[1:].rstrip("0") else "")
    return f"{'-' if neg else ''}{body}e{e:+d}"


# -- constants ---------------------------------------------------------------

@lru_cache(maxsize=64)
def sqrt2(prec: int = 128) -> RealBall:
    return RealBall.from_int(2, prec).sqrt()


@lru_cache(maxsize=64)
def alpha(prec: int = 128) -> RealBall:
    return sqrt2(prec) + 1


@lru_cache(maxsize=64)
def log_alpha(prec: int = 128) -> RealBall:
    return alpha(prec).log()


@lru_cache(maxsize=1024)
def log_nat(x: int, prec: int = 128) -> RealBall:
    if x < 1:
        raise ValueError(f"log_nat needs x >= 1, got {x}")
    return RealBall.from_int(x, prec).log()


def log_rational(q: Fraction, prec: int = 128) -> RealBall:
    q = Fraction(q)
    if q <= 0:
        raise ValueError("log of a nonpositive rational")
    return log_nat(q.numerator, prec) - log_nat(q.denominator, prec)


@dataclass(frozen=True)
class NearestInt:
    dist: RealBall
    resolved: bool
    nearest: int | None

    def lower(self) -> Fraction:
        return max(Fraction(0), self.dist.lower())


def nearest_int_distance(x: RealBall) -> NearestInt:
    """Enclosure of ||x||, the distance from x to the nearest integer."""
    shifted = x + Fraction(1, 2)
    n = shifted.floor()
    if n is None:
        # the ball contains a half-integer: the nearest integer is ambiguous
        return NearestInt(RealBall.from_endpoints(Fraction(0), Fraction(1, 2), x.prec), False, None)
    d = x - n
    return NearestInt(abs(d), True, n)


def with_escalation(computation: Callable[[int], T],
                    predicate: Callable[[T], bool],
                    policy: PrecisionPolicy = DEFAULT_POLICY,
                    start: int | None = None,
                    what: str = "computation") -> tuple[T, int]:
    """Rerun ``computation(prec)`` at increasing precision until ``predicate`` holds.

    Returns ``(result, prec)``.  The predicate must be monotone in the precision.
    """
    last = None
    for prec in policy.ladder(start):
        last = computation(prec)
        if predicate(last):
            return last, prec
    raise PrecisionExhausted(f"{what}: not certified at {policy.max_bits} bits",
                             last=last, bits=policy.max_bits)
