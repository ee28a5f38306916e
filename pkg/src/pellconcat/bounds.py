"""Heights, the Matveev-type lower bound, the L/(log L)^l inversion, and the
absolute bound chains for both equations.

Stage constants are recomputed from their exact formulas in ball arithmetic.
The published roundings live in ``REFERENCE_CONSTANTS`` and are used only as
comparison targets in reports and tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .hpreal import RealBall, decimal_string, log_alpha, log_nat
from .sequences import EquationId

PREC = 192

REFERENCE_CONSTANTS = {
    EquationId.EQ1: {
        "lambda1_matveev": Fraction("1.0427e10"),
        "gap": Fraction("1.043e10"),
        "lambda2_matveev": Fraction("1.94e12"),
        "C": Fraction("2.8e10"),
        "n_squared_log": Fraction("5.432e22"),
        "n_log_absorbed": Fraction("3.4e23"),
        "H": Fraction("4.42e23"),
        "log_H": Fraction("54.45"),
        "sqrt_log_factor": Fraction(65),
        "final": Fraction("5.746e27"),
    },
    EquationId.EQ2: {
        "gap": Fraction("4.1e12"),
        "lambda2_matveev": Fraction("2e12"),
        "C": Fraction("1.2e13"),
        "n_squared_log": Fraction("2.4e25"),
        "H": Fraction("2.2e26"),
        "log_H": Fraction("60.7"),
        "sqrt_log_factor": Fraction(73),
        "final": Fraction("4.7e30"),
    },
}


# -- heights -----------------------------------------------------------------

def height_rational(p: int, q: int = 1, prec: int = PREC) -> RealBall:
    """h(p/q) = log max(|p|, q) for coprime p, q with q > 0."""
    if q <= 0:
        raise ValueError("denominator must be positive")
    if math.gcd(p, q) != 1:
        raise ValueError(f"{p}/{q} is not in lowest terms")
    return log_nat(max(abs(p), q), prec)


def height_alpha(prec: int = PREC) -> RealBall:
    return log_alpha(prec).scale2(-1)


def height_two_sqrt2(prec: int = PREC) -> RealBall:
    return log_nat(8, prec).scale2(-1)


def height_composite_gamma3(eq, m: int, n_minus_k: int, prec: int = PREC) -> RealBall:
    """Closed-form upper bound on h(gamma_3) for the second linear form.

    EQ1: (3g + 4)/2 log alpha + 5/2 log 2   (needs m >= 1, g = n - k >= 2)
    EQ2: (3g + 8)/2 log alpha + 5/2 log 2   (needs g >= 1)
    """
    eq = EquationId.parse(eq)
    g = n_minus_k
    if eq is EquationId.EQ1:
        if m < 1 or g < 2:
            raise ValueError("EQ1 height bound needs m >= 1 and n - k >= 2")
        shift = 4
    else:
        if m < 0 or g < 1:
            raise ValueError("EQ2 height bound needs m >= 0 and n - k >= 1")
        shift = 8
    la, l2 = log_alpha(prec), log_nat(2, prec)
    return (la * (3 * g + shift) + l2 * 5).scale2(-1)


# -- Matveev -----------------------------------------------------------------

def matveev_constant(s: int, D: int, prec: int = PREC) -> RealBall:
    """1.4 * 30^(s+3) * s^4.5 * D^2 * (1 + log D)."""
    s45 = RealBall.from_int(s ** 4, prec) * RealBall.from_int(s, prec).sqrt()
    c = RealBall.from_fraction(Fraction(7, 5) * 30 ** (s + 3) * D * D, prec) * s45
    return c * (log_nat(D, prec) + 1)


@dataclass(frozen=True)
class MatveevInstance:
    s: int
    D: int
    B: RealBall
    A: tuple[RealBall, ...]

    def __post_init__(self):
        if self.s < 1 or self.D < 1:
            raise ValueError("need s >= 1 and D >= 1")
        if len(self.A) != self.s:
            raise ValueError(f"expected {self.s} A-values, got {len(self.A)}")
        if self.B.certainly_lt(1):
            raise ValueError("B must be >= 1")
        for j, a in enumerate(self.A, 1):
            if a.certainly_lt(Fraction(16, 100)):
                raise ValueError(f"A_{j} below 0.16")

    @classmethod
    def from_heights(cls, D: int, B: RealBall, heights, abs_logs) -> "MatveevInstance":
        """Build with A_j = max(D h_j, |log gamma_j|, 0.16) taken on upper endpoints."""
        A = []
        for h, lg in zip(heights, abs_logs):
            cands = [h * D, abs(lg), RealBall.from_fraction(Fraction(16, 100), h.prec)]
            A.append(max(cands, key=lambda x: x.upper()))
        return cls(len(A), D, B, tuple(A))


def matveev_exponent(inst: MatveevInstance) -> RealBall:
    """E with |Lambda| >= exp(-E) whenever Lambda != 0."""
    prec = inst.B.prec
    e = matveev_constant(inst.s, inst.D, prec) * (inst.B.log() + 1)
    for a in inst.A:
        e = e * a
    return e


def lemma7_solve(l: int, H: RealBall) -> RealBall:
    """Upper bound 2^l H (log H)^l on any L with L/(log L)^l < H, given H > (4l^2)^l."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if not H.certainly_gt((4 * l * l) ** l):
        raise ValueError(f"hypothesis H > (4 l^2)^l = {(4 * l * l) ** l} not certified")
    return (H * H.log() ** l).scale2(l)


def solve_n_log_bound(c: RealBall) -> int:
    """Smallest integer X (up to rounding) such that every n with
    n < c (1 + log(1.3 (n + 1))) satisfies n < X.

    g(n) = n - c(1 + log(1.3(n+1))) is increasing once n + 1 > c, so it is enough
    to certify g(X) >= 0 at one X beyond c - 1.
    """
    cf = float(c.upper())
    x = 2 * cf * (1 + math.log(1.3 * (cf + 1)))
    for _ in range(200):
        nx = cf * (1 + math.log(1.3 * (x + 1)))
        if abs(nx - x) <= 1e-6 * x:
            x = nx
            break
        x = nx
    X = int(x * (1 + 1e-9)) + 2
    prec = c.prec
    while True:
        rhs = c * (RealBall.from_fraction(Fraction(13, 10) * (X + 1), prec).log() + 1)
        if rhs.certainly_lt(X) and c.certainly_lt(X + 1):
            return X
        X = int(X * 1.000001) + 1


def absorption_holds(factor: Fraction, shift: Fraction, offset: int, n0: int,
                     prec: int = PREC) -> bool:
    """Check 1 + log(1.3(n+1)) < factor * log(shift * (n + offset)) at n = n0.

    For factor > 1 and offset <= 1 the right side grows faster than the left,
    so the check at n0 covers every n >= n0.
    """
    if factor <= 1 or offset > 1:
        raise ValueError("need factor > 1 and offset <= 1")
    lhs = RealBall.from_fraction(Fraction(13, 10) * (n0 + 1), prec).log() + 1
    rhs = RealBall.from_fraction(shift * (n0 + offset), prec).log()
    return lhs.certainly_lt(rhs * RealBall.from_fraction(factor, prec))


# -- bound chains --------------------------------------------------------------

@dataclass
class Stage:
    label: str
    value: RealBall
    published: Fraction | None = None
    note: str = ""

    def within_reference(self) -> bool | None:
        if self.published is None:
            return None
        return self.value.upper() <= self.published

    def to_json(self) -> dict:
        d = {
            "label": self.label,
            "upper_bound": self.value.upper_decimal(10),
            "lower_bound": self.value.lower_decimal(10),
        }
        if self.published is not None:
            d["reference_constant"] = _fmt(self.published)
            d["within_reference"] = self.within_reference()
        if self.note:
            d["provenance"] = self.note
        return d


def _fmt(x: Fraction) -> str:
    return decimal_string(x, 12, "up")


@dataclass
class AbsoluteBoundReport:
    equation: EquationId
    b: int
    stages: list[Stage] = field(default_factory=list)
    n_bound: RealBall | None = None
    uniform_constant: RealBall | None = None

    def stage(self, label: str) -> Stage:
        for s in self.stages:
            if s.label == label:
                return s
        raise KeyError(label)

    def reference_final(self) -> Fraction:
        return REFERENCE_CONSTANTS[self.equation]["final"]

    def to_json(self) -> dict:
        return {
            "equation": int(self.equation),
            "b": self.b,
            "stages": [s.to_json() for s in self.stages],
            "n_bound": {"upper_bound": self.n_bound.upper_decimal(10)},
            "uniform_constant": {"upper_bound": self.uniform_constant.upper_decimal(10),
                                 "reference_constant": _fmt(self.reference_final())},
        }


def _chain_constants(eq: EquationId, prec: int = PREC) -> list[Stage]:
    """The b-independent stage constants, worst case b = 2 for absorbed terms."""
    la, l2 = log_alpha(prec), log_nat(2, prec)
    P = REFERENCE_CONSTANTS[eq]
    c3 = matveev_constant(3, 2, prec)

    def frac(x):
        return RealBall.from_fraction(Fraction(x), prec)

    stages = []
    if eq is EquationId.EQ1:
        c2 = matveev_constant(2, 2, prec)
        # |Lambda_1| >= exp(-c2 (1 + log B) 2 log b log alpha)
        lam1 = c2 * 2
        stages.append(Stage("lambda1_matveev", lam1, P["lambda1_matveev"],
                            "s=2, D=2, A=(2 log b, log alpha); coefficient of log b log alpha (1+log B)"))
        # n-k-2 < lam1 log b (1+log B) + log(1.1 b)/log alpha, B = 1.3(n-m+1) >= 2.6
        one_log_b = frac("2.6").log() + 1
        gap = lam1 + (log_nat(22, prec) - log_nat(10, prec)) / (la * l2 * one_log_b)
        stages.append(Stage("gap", gap, P["gap"], "n-k-2 < c log b (1+log B), B=1.3(n-m+1)"))
        # n < c3 (1+log B) 2 log b log alpha A3 / log alpha + log 5.885 / log alpha
        a3_min = la * 10 + l2 * 5
        b_min = frac("3.9").log() + 1
        lam2 = c3 * 2 + frac("5.885").log() / (la * a3_min * l2 * b_min)
        stages.append(Stage("lambda2_matveev", lam2, P["lambda2_matveev"],
                            "s=3, D=2, B=1.3(n+1); n < c (1+log B) A3 log b"))
        # A3 = 3(n-k-2) log alpha + 10 log alpha + 5 log 2
        C = la * 3 * gap + (la * 10 + l2 * 5) / (l2 * b_min)
        stages.append(Stage("C", C, P["C"], "A3 < c (1+log(1.3(n+1))) log b"))
        E = lam2 * C
        stages.append(Stage("n_squared_log", E, P["n_squared_log"],
                            "n < c (1+log(1.3(n+1)))^2 log^2 b"))
        if not absorption_holds(Fraction(5, 2), Fraction(13, 10), 0, 2, prec):
            raise ArithmeticError("1+log(1.3(n+1)) < 2.5 log(1.3n) failed at n = 2")
        F = E * frac("6.25")
        stages.append(Stage("n_log_absorbed", F, P["n_log_absorbed"],
                            "n < c log^2(1.3n) log^2 b for n >= 2"))
        H = F * frac("1.3")
        stages.append(Stage("H", H, P["H"], "L = 1.3 n, l = 2, H = c log^2 b"))
    else:
        # |Lambda_3| >= exp(-c3 (1+log B) 2 log b log 8 log alpha)
        lam3 = c3 * 2 * log_nat(8, prec)
        one_log_b = frac("1.3").log() + 1
        gap = lam3 + log_nat(4, prec) / (la * l2 * one_log_b)
        stages.append(Stage("gap", gap, P["gap"], "n-k-1 < c log b (1+log B), B=1.3(n-m+1)"))
        a3_min = la * 11 + l2 * 5
        b_min = frac("2.6").log() + 1
        lam4 = c3 * 2 + frac("3.42").log() / (la * a3_min * l2 * b_min)
        stages.append(Stage("lambda2_matveev", lam4, P["lambda2_matveev"],
                            "s=3, D=2, B=1.3(n+1); n < c (1+log B) A3 log b"))
        C = la * 3 * gap + (la * 11 + l2 * 5) / (l2 * b_min)
        stages.append(Stage("C", C, P["C"], "A3 < c (1+log(1.3(n+1))) log b"))
        E = lam4 * C
        stages.append(Stage("n_squared_log", E, P["n_squared_log"],
                            "n < c (1+log(1.3(n+1)))^2 log^2 b"))
        if not absorption_holds(Fraction(3), Fraction(1), 1, 1, prec):
            raise ArithmeticError("1+log(1.3(n+1)) < 3 log(n+1) failed")
        H = E * 9 + RealBall.from_int(1, prec) / l2 ** 4
        stages.append(Stage("H", H, P["H"], "L = n + 1, l = 2, H = c log^2 b"))
    return stages


def _uniform_tail(eq: EquationId, H_coef: RealBall, prec: int) -> tuple[list[Stage], RealBall]:
    """Reproduce the (log H)^2 <= K^2 log b simplification, K maximised at b = 2."""
    P = REFERENCE_CONSTANTS[eq]
    l2 = log_nat(2, prec)
    logH = H_coef.log()
    if not logH.certainly_gt(4):
        raise ArithmeticError("K maximisation at b = 2 needs log H > 4")
    K = (logH + l2.log() * 2) / l2.sqrt()
    if eq is EquationId.EQ1:
        final = (H_coef * K * K).scale2(2) / RealBall.from_fraction(Fraction(13, 10), prec)
    else:
        final = (H_coef * K * K).scale2(2)
    return [Stage("log_H", logH, P["log_H"], "log of the b-free part of H"),
            Stage("sqrt_log_factor", K, P["sqrt_log_factor"],
                  "log H + 2 log log b <= K sqrt(log b), worst at b = 2"),
            Stage("final", final, P["final"], "n < c log^3 b")], final


def absolute_bound(eq, b: int, prec: int = PREC) -> AbsoluteBoundReport:
    eq = EquationId.parse(eq)
    if b < 2:
        raise ValueError("base must be >= 2")
    stages = _chain_constants(eq, prec)
    H_coef = stages[-1].value
    tail, uniform = _uniform_tail(eq, H_coef, prec)
    stages.extend(tail)
    lb = log_nat(b, prec)
    H_b = H_coef * lb * lb
    L = lemma7_solve(2, H_b)
    if eq is EquationId.EQ1:
        n_bound = L / RealBall.from_fraction(Fraction(13, 10), prec)
    else:
        n_bound = L - 1
    # the per-base inversion never exceeds the uniform closed form
    closed = uniform * lb ** 3
    if closed.certainly_lt(n_bound):
        n_bound = closed
    return AbsoluteBoundReport(eq, b, stages, n_bound, uniform)


def n_bound_given_gap(eq, b: int, gap_max: int, prec: int = PREC) -> int:
    """Integer X with n < X once n - k <= gap_max is known (second linear form only)."""
    eq = EquationId.parse(eq)
    stages = _chain_constants(eq, prec)
    lam2 = next(s.value for s in stages if s.label == "lambda2_matveev")
    la, l2 = log_alpha(prec), log_nat(2, prec)
    shift = 4 if eq is EquationId.EQ1 else 8
    A3 = la * (3 * gap_max + shift) + l2 * 5
    return solve_n_log_bound(lam2 * A3 * log_nat(b, prec))


def d_bound(n_exclusive: int, m_min: int = 0) -> int:
    """Integer M with d < M, from d < 1.3 (n - m + 1) and n < n_exclusive."""
    top = Fraction(13, 10) * (n_exclusive - m_min)
    return -((-top.numerator) // top.denominator)

