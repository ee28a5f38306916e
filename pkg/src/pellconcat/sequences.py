"""Exact Pell / Pell-Lucas arithmetic, base-b digit counts and concatenation checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction


class EquationId(enum.IntEnum):
    """The two concatenation equations.

    ``EQ1``:  P_n = b^d * P_m + Q_k   (d = digits of Q_k in base b)
    ``EQ2``:  P_n = b^d * Q_m + P_k   (d = digits of P_k in base b)
    """

    EQ1 = 1
    EQ2 = 2

    @classmethod
    def parse(cls, value) -> "EquationId":
        if isinstance(value, cls):
            return value
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise ValueError(f"unknown equation id {value!r}; expected 1 or 2") from None


@dataclass(frozen=True)
class QuadInt:
    """Element ``a + c*sqrt(2)`` of Z[sqrt(2)]."""

    a: int
    c: int = 0

    def __add__(self, other):
        other = _as_quad(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.a + other.a, self.c + other.c)

    __radd__ = __add__

    def __neg__(self):
        return QuadInt(-self.a, -self.c)

    def __sub__(self, other):
        other = _as_quad(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.a - other.a, self.c - other.c)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_quad(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.a * other.a + 2 * self.c * other.c,
                       self.a * other.c + self.c * other.a)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers leave Z[sqrt(2)]; use unit_inverse")
        result, base = QuadInt(1), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conj(self) -> "QuadInt":
        return QuadInt(self.a, -self.c)

    def norm(self) -> int:
        return self.a * self.a - 2 * self.c * self.c

    def is_rational(self) -> bool:
        return self.c == 0

    def unit_inverse(self) -> "QuadInt":
        n = self.norm()
        if n not in (1, -1):
            raise ValueError(f"{self} is not a unit (norm {n})")
        return self.conj() * n

    def div_exact(self, k: int) -> "QuadInt":
        """Divide both coordinates by the integer ``k``; raises if not exact."""
        if self.a % k or self.c % k:
            raise ArithmeticError(f"{self} is not divisible by {k}")
        return QuadInt(self.a // k, self.c // k)

    def __float__(self):
        return self.a + self.c * 2 ** 0.5

    def __str__(self):
        return f"{self.a}{self.c:+}*sqrt2"


def _as_quad(x):
    if isinstance(x, QuadInt):
        return x
    if isinstance(x, int):
        return QuadInt(x, 0)
    return NotImplemented


ALPHA = QuadInt(1, 1)
BETA = QuadInt(1, -1)


@dataclass(frozen=True)
class QuadRat:
    """Element of Q(sqrt 2) stored as ``num / den`` with ``num`` in Z[sqrt 2], ``den > 0``."""

    num: QuadInt
    den: int = 1

    def __post_init__(self):
        if self.den <= 0:
            raise ValueError("denominator must be positive")

    @classmethod
    def of(cls, x) -> "QuadRat":
        if isinstance(x, QuadRat):
            return x
        if isinstance(x, Fraction):
            return cls(QuadInt(x.numerator), x.denominator)
        return cls(_as_quad(x))

    def __add__(self, other) -> "QuadRat":
        other = QuadRat.of(other)
        return QuadRat(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "QuadRat":
        return QuadRat(-self.num, self.den)

    def __sub__(self, other) -> "QuadRat":
        return self + (-QuadRat.of(other))

    def __rsub__(self, other) -> "QuadRat":
        return QuadRat.of(other) - self

    def __mul__(self, other) -> "QuadRat":
        other = QuadRat.of(other)
        return QuadRat(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "QuadRat":
        return self * QuadRat.of(other).inverse()

    def inverse(self) -> "QuadRat":
        n = self.num.norm()
        if n == 0:
            raise ZeroDivisionError("zero has no inverse")
        num = self.num.conj() * self.den
        if n < 0:
            num, n = -num, -n
        return QuadRat(num, n)

    def conj(self) -> "QuadRat":
        return QuadRat(self.num.conj(), self.den)

    def rational_part(self) -> Fraction | None:
        """The value as a Fraction when the sqrt(2) coordinate vanishes, else None."""
        if self.num.c:
            return None
        return Fraction(self.num.a, self.den)

    def __eq__(self, other):
        if not isinstance(other, QuadRat):
            return NotImplemented
        return (self.num.a * other.den == other.num.a * self.den
                and self.num.c * other.den == other.num.c * self.den)

    def __hash__(self):
        f, g = Fraction(self.num.a, self.den), Fraction(self.num.c, self.den)
        return hash((f, g))

    def __float__(self):
        return float(self.num) / self.den


def alpha_power(e: int) -> QuadRat:
    """alpha**e for any integer e (alpha is a unit, so negative powers stay integral)."""
    if e >= 0:
        return QuadRat(ALPHA ** e)
    return QuadRat(ALPHA.unit_inverse() ** (-e))


# -- sequences ---------------------------------------------------------------

def _pell_pair(n: int) -> tuple[int, int]:
    """Return (P_n, P_{n+1}) by fast doubling.

    Uses P_{2k} = P_k Q_k = P_k (2 P_{k+1} - 2 P_k) and P_{2k+1} = P_{k+1}^2 + P_k^2.
    """
    if n == 0:
        return 0, 1
    p, q = _pell_pair(n >> 1)
    even = 2 * p * q - 2 * p * p
    odd = q * q + p * p
    if n & 1:
        return odd, 2 * odd + even
    return even, odd


def pell(n: int) -> int:
    if n < 0:
        raise ValueError("index must be nonnegative")
    return _pell_pair(n)[0]


def pell_lucas(k: int) -> int:
    """Q_k = 2 (P_k + P_{k-1}), evaluated via the fast-doubling pair."""
    if k < 0:
        raise ValueError("index must be nonnegative")
    if k == 0:
        return 2
    prev, cur = _pell_pair(k - 1)
    return 2 * (cur + prev)


def pell_binet_exact(n: int) -> int:
    """Evaluate (alpha^n - beta^n) / (2 sqrt 2) inside Z[sqrt 2]."""
    if n < 0:
        raise ValueError("index must be nonnegative")
    diff = ALPHA ** n - BETA ** n
    if diff.a != 0 or diff.c % 2:
        raise ArithmeticError(f"Binet numerator {diff} is not an even multiple of sqrt 2")
    return diff.c // 2


def pell_lucas_binet_exact(n: int) -> int:
    s = ALPHA ** n + BETA ** n
    if s.c != 0:
        raise ArithmeticError(f"Binet sum {s} is not rational")
    return s.a


def pell_table(n_max: int) -> list[int]:
    out = [0, 1]
    while len(out) <= n_max:
        out.append(2 * out[-1] + out[-2])
    return out[:n_max + 1]


def pell_lucas_table(n_max: int) -> list[int]:
    out = [2, 2]
    while len(out) <= n_max:
        out.append(2 * out[-1] + out[-2])
    return out[:n_max + 1]


def digit_count(N: int, b: int) -> int:
    """Number of base-b digits of N, with the convention digit_count(0, b) == 1.

    Exponential then binary search over exact powers of b; no floating logs.
    """
    if b < 2:
        raise ValueError(f"base must be >= 2, got {b}")
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N < b:
        return 1
    hi = 1
    while b ** hi <= N:
        hi *= 2
    lo = hi // 2  # b**lo <= N < b**hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if b ** mid <= N:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class ConcatCheck:
    holds: bool
    d: int
    lhs: int
    term1: int
    term2: int


def concat_check(eq, b: int, n: int, m: int, k: int) -> ConcatCheck:
    eq = EquationId.parse(eq)
    if b < 2:
        raise ValueError("base must be >= 2")
    if min(n, m, k) < 0:
        raise ValueError("indices must be nonnegative")
    if eq is EquationId.EQ1:
        middle, tail = pell(m), pell_lucas(k)
    else:
        middle, tail = pell_lucas(m), pell(k)
    d = digit_count(tail, b)
    lhs = pell(n)
    term1 = b ** d * middle
    return ConcatCheck(lhs == term1 + tail, d, lhs, term1, tail)
