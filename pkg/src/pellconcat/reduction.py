"""Reduction of the huge Baker bounds to searchable ranges.

Two tools are used:

* the Baker-Davenport / Dujella-Petho style lemma: for a convergent p/q of tau
  with q > 6M and eps = ||mu q|| - M ||tau q|| > 0, the inequality
  ``0 < |m tau - n + mu| < A B^-w`` has no solution with m <= M and
  ``w >= log(A q / eps) / log B``;
* Legendre's gap ``|tau - x/y| >= 1/((a(M)+2) y^2)`` for 0 < y < M, which
  handles two-term forms (and the cells where mu is a rational combination of
  tau and 1, so every eps is negative).
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

from .bounds import d_bound, n_bound_given_gap
from .contfrac import cached_expansion, extend, legendre_rational_gap, max_partial_quotient, tau
from .hpreal import (
    DEFAULT_POLICY,
    PrecisionExhausted,
    PrecisionPolicy,
    RealBall,
    alpha,
    decimal_string,
    log_alpha,
    log_nat,
    nearest_int_distance,
    sqrt2,
)
from .sequences import ALPHA, EquationId, QuadInt, QuadRat, alpha_power, concat_check, pell, pell_lucas

Quantity = Union[Fraction, int, Callable[[int], RealBall]]


class NoPositiveEpsilon(RuntimeError):
    pass


class ContradictionFailed(RuntimeError):
    pass


def _ball(x: Quantity, prec: int) -> RealBall:
    if callable(x):
        return x(prec)
    return RealBall.from_fraction(Fraction(x), prec)


def over_log_alpha(c: Fraction) -> Callable[[int], RealBall]:
    """The quantity c / log alpha, as a precision -> ball callable."""
    c = Fraction(c)
    return lambda prec: RealBall.from_fraction(c, prec) / log_alpha(prec)


@dataclass(frozen=True)
class ReductionInstance:
    """``0 < |d tau_b - n + mu| < A B^-w`` with ``d <= M``."""

    b: int
    mu: Callable[[int], RealBall]
    A: Quantity
    B: Quantity
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not _ball(self.A, 64).is_positive():
            raise ValueError("A must be > 0")
        if not _ball(self.B, 64).certainly_gt(1):
            raise ValueError("B must be > 1")


@dataclass(frozen=True)
class ReductionOutcome:
    """No solution has ``w >= w_bound``.  ``t`` is the 0-based convergent index."""

    method: str
    w_bound: int
    t: int | None = None
    q: int | None = None
    epsilon: RealBall | None = None
    detail: dict = field(default_factory=dict)

    @property
    def ref_index(self) -> int | None:
        # published tables count partial quotients from 1
        return None if self.t is None else self.t + 1

    def epsilon_lower(self) -> Fraction | None:
        return None if self.epsilon is None else max(Fraction(0), self.epsilon.lower())

    def to_json(self) -> dict:
        d = {"method": self.method, "w_bound_exclusive": self.w_bound}
        if self.t is not None:
            d.update({"t": self.t, "ref_index": self.ref_index, "q": str(self.q),
                      "epsilon": {"lower_bound": decimal_string(self.epsilon_lower(), 6, "down")}})
        d.update({k: v for k, v in self.detail.items()})
        return d


def _w_bound(A: RealBall, q: int, eps_lo: Fraction, B: RealBall) -> int:
    prec = A.prec
    x = (A * q / RealBall.from_fraction(eps_lo, prec)).log() / B.log()
    hi = x.upper()
    return -((-hi.numerator) // hi.denominator)


def bd_reduce(inst: ReductionInstance, policy: PrecisionPolicy = DEFAULT_POLICY,
              max_convergents: int = 20, candidates: int = 1) -> ReductionOutcome:
    """Scan convergents with q > 6M for certified eps > 0.

    Every such convergent gives a valid bound.  With ``candidates=1`` the first
    one is used; otherwise the smallest bound among the first ``candidates``
    admissible convergents is returned.
    """
    if candidates < 1:
        raise ValueError("candidates must be >= 1")
    M = inst.M
    # room for max_convergents more terms (each multiplies q by at least ~1.6)
    cf = cached_expansion(inst.b, 6 * M * 2 ** (max_convergents + 4), policy)
    t0 = next(t for t, q in enumerate(cf.denominators()) if q > 6 * M)
    tried, found = [], []
    for t in range(t0, t0 + max_convergents):
        if t >= len(cf.convergents):
            cf = extend(cf, terms=t + 1, policy=policy)
        q = cf.q(t)
        start = max(policy.initial_bits, q.bit_length() + M.bit_length() + 48)
        # escalate a few times on ambiguity, then move to the next convergent
        budget = 4
        for prec in policy.ladder(start):
            tb = tau(inst.b, prec)
            dm = nearest_int_distance(inst.mu(prec) * q)
            dt = nearest_int_distance(tb * q)
            if dm.resolved and dt.resolved:
                eps = dm.dist - dt.dist * M
                s = eps.sign()
                if s == 1:
                    A = _ball(inst.A, prec)
                    B = _ball(inst.B, prec)
                    W = _w_bound(A, q, eps.lower(), B)
                    found.append(ReductionOutcome("baker-davenport", W, t, q, eps))
                    break
                if s is not None:
                    tried.append((t, "eps<=0"))
                    break
            budget -= 1
            if budget == 0:
                tried.append((t, "unresolved"))
                break
        if len(found) == candidates:
            break
    if found:
        return min(found, key=lambda o: (o.w_bound, o.t))
    raise NoPositiveEpsilon(f"b={inst.b}, M={M}: no certified eps > 0 among "
                            f"{max_convergents} convergents ({tried[:3]}...)")


# -- dependent shifts ------------------------------------------------------------

def rational_log_relation(gamma: QuadRat, b: int, r_max: int = 12):
    """Find integers (u, r, v) with gamma = b^(u/r) * alpha^v exactly, or None.

    Then log gamma / log alpha = (u/r) tau_b + v.
    """
    ratio = QuadRat(gamma.num * gamma.num, 1) / QuadRat.of(gamma.num.norm())
    fr = abs(float(ratio))
    if fr == 0 or not math.isfinite(fr):
        return None
    v = round(math.log(fr) / (2 * math.log(1 + math.sqrt(2))))
    sign = -1 if v % 2 else 1
    if ratio != QuadRat.of(sign) * alpha_power(2 * v):
        return None
    c0 = (gamma * alpha_power(-v)).rational_part()
    if c0 is None or c0 <= 0:
        return None
    lc, lb = math.log(c0.numerator) - math.log(c0.denominator), math.log(b)
    for r in range(1, r_max + 1):
        u = round(r * lc / lb)
        if c0 ** r == Fraction(b) ** u:
            return u, r, v
    return None


def legendre_two_term(b: int, relation, A: Quantity, B: Quantity, M: int,
                      policy: PrecisionPolicy = DEFAULT_POLICY, prec: int = 192,
                      delta: Fraction = Fraction(0),
                      exceptional_possible: Callable[[int, int], bool] | None = None) -> ReductionOutcome:
    """Bound n in ``|d tau - n + mu| < A B^-n`` (1 <= d < M) when
    ``|mu - (u/r) tau - v| <= delta``.

    With y = r d + u and x = r (n - v):  |y tau - x| < r A B^-n + r delta.
    If y != 0, Legendre gives |y tau - x| >= c/Y with Y = r M + |u| + 1 and
    c = 1/(a(Y)+2), so B^n < r A / (c/Y - r delta).  If y = 0 then either
    x = 0 (n = v) or 1 <= |x|, so B^n < r A / (1 - r delta).

    y = 0 needs d = -u/r, a positive integer.  The single point (d, n) = (-u/r, v)
    is then kept unless ``exceptional_possible(d, v)`` rules it out.
    """
    u, r, v = relation
    delta = Fraction(delta)
    Y = r * M + abs(u) + 1
    c = legendre_rational_gap(cached_expansion(b, Y, policy), Y, policy)
    slack = c / Y - r * delta
    if slack <= 0 or r * delta >= 1:
        raise NoPositiveEpsilon(f"b={b}: shift is not close enough to {relation}")
    Ab, Bb = _ball(A, prec), _ball(B, prec)
    lB = Bb.log()
    w1 = (Ab * r / RealBall.from_fraction(1 - r * delta, prec)).log() / lB
    w2 = (Ab * r / RealBall.from_fraction(slack, prec)).log() / lB
    W = max(_ceil(w1.upper()), _ceil(w2.upper()))
    detail = {"relation": [u, r, v], "Y": str(Y), "gap_constant": f"1/{c.denominator}"}
    if u < 0 and u % r == 0:
        d0 = -u // r
        if exceptional_possible is None or exceptional_possible(d0, v):
            W = max(W, v + 1)
            detail["exceptional"] = {"d": d0, "n": v}
    if delta:
        detail["delta"] = {"upper_bound": decimal_string(delta, 6, "up")}
    return ReductionOutcome("legendre", W, detail=detail)


def near_relation(mu: Callable[[int], RealBall], b: int, M: int,
                  policy: PrecisionPolicy = DEFAULT_POLICY, r_max: int = 6):
    """Find (u, r, v) and a certified delta >= |mu - (u/r) tau - v| small enough
    for :func:`legendre_two_term`, or None.  Small r first."""
    for r in range(1, r_max + 1):
        Y = r * M + 3 * r + 1
        c = legendre_rational_gap(cached_expansion(b, Y, policy), Y, policy)
        target = c / (2 * Y * r)
        prec = max(192, 2 * Y.bit_length() + 64)
        m_b, t_b = mu(prec), tau(b, prec)
        for u in range(-3 * r, 3 * r + 1):
            if u and math.gcd(u, r) != 1 or (not u and r > 1):
                continue
            z = m_b - t_b * Fraction(u, r)
            near = nearest_int_distance(z)
            if near.resolved and near.dist.certainly_lt(target):
                return (u, r, near.nearest), near.dist.upper()
    return None


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


# -- phase 1 ---------------------------------------------------------------------

PUBLISHED_M_EQ1_PHASE1 = 91_200_000_000_000_000_000_000_000_000  # 9.12e28
PUBLISHED_M_EQ2_PHASE1 = 75 * 10 ** 30  # 7.5e31
PUBLISHED_M_EQ1_PHASE2 = 655 * 10 ** 14  # 6.55e16
PUBLISHED_M_EQ2_PHASE2 = 7 * 10 ** 16


@dataclass(frozen=True)
class LegendreCertificate:
    b: int
    M: int
    gap_floor: int
    N: int
    a_of_M: int
    argmax_index: int
    d_lower: RealBall

    def to_json(self) -> dict:
        return {"b": self.b, "M": str(self.M), "gap_floor": self.gap_floor,
                "N": self.N, "ref_index_N": self.N + 1,
                "a_of_M": self.a_of_M, "argmax_index": self.argmax_index,
                "ref_index_argmax": self.argmax_index + 1,
                "d_lower": {"lower_bound": self.d_lower.lower_decimal(6)},
                "contradiction": True}


def legendre_phase1_eq1(b: int, M: int = PUBLISHED_M_EQ1_PHASE1, gap_floor: int = 96,
                        policy: PrecisionPolicy = DEFAULT_POLICY, prec: int = 256) -> LegendreCertificate:
    """Rule out m >= 101 for EQ1: d would have to exceed M.

    With g = n - k - 2 > gap_floor:  |tau - (n-m)/d| < 2.2 b / (log alpha alpha^g d)
    and |tau - x/d| >= 1/((a(M)+2) d^2) force d > log alpha alpha^g / (2.2 b (a(M)+2)).
    """
    la = log_alpha(prec)
    ag = alpha(prec) ** gap_floor
    if not (RealBall.from_fraction(Fraction(11, 10) * b, prec) / ag).certainly_lt(Fraction(1, 2)):
        raise ContradictionFailed(f"b={b}: 1.1 b / alpha^{gap_floor} is not below 1/2")
    if not (la * ag / RealBall.from_fraction(Fraction(44, 10) * b, prec)).certainly_gt(M):
        raise ContradictionFailed(f"b={b}: Legendre's 1/(2 d^2) criterion not met for d < M")
    mq = max_partial_quotient(cached_expansion(b, M, policy), M, policy)
    lower = la * ag / RealBall.from_fraction(Fraction(22, 10) * b * (mq.a_of_M + 2), prec)
    if not lower.certainly_gt(M):
        raise ContradictionFailed(f"b={b}: d lower bound {lower!r} does not exceed M={M}")
    return LegendreCertificate(b, M, gap_floor, mq.N, mq.a_of_M, mq.argmax_index, lower)


def uniform_phase1_eq1_bound(a_max: int, b_max: int = 10, gap_floor: int = 96,
                             prec: int = 256) -> RealBall:
    """log alpha * alpha^gap / (2.2 b_max (a_max + 2)), valid for every b <= b_max."""
    return log_alpha(prec) * alpha(prec) ** gap_floor / RealBall.from_fraction(
        Fraction(22, 10) * b_max * (a_max + 2), prec)


@lru_cache(maxsize=None)
def _mu_eq2_phase1(prec: int) -> RealBall:
    return (log_nat(8, prec).scale2(-1)) / log_alpha(prec)


def phase1_eq2(b: int, M: int = PUBLISHED_M_EQ2_PHASE1, policy: PrecisionPolicy = DEFAULT_POLICY,
               threshold: int = 96) -> ReductionOutcome:
    """Reduce |d tau - (n-m) + log(2 sqrt 2)/log alpha| < (4b/log alpha) alpha^-(n-k-1).

    The returned w_bound W means n - k - 1 < W.  A certificate needs W <= threshold
    (m >= 101 forces n - k - 1 >= 98).
    """
    inst = ReductionInstance(b, _mu_eq2_phase1, over_log_alpha(Fraction(4 * b)),
                             lambda p: alpha(p), M)
    out = bd_reduce(inst, policy)
    if out.w_bound > threshold:
        raise ContradictionFailed(f"b={b}: n-k-1 < {out.w_bound} does not beat {threshold}")
    return out


# -- phase 2 ---------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _inv_alpha_pow(g: int, prec: int) -> RealBall:
    return (sqrt2(prec) - 1) ** g


@lru_cache(maxsize=4096)
def _log_denominator(eq: int, g: int, prec: int) -> RealBall:
    if eq == 1:
        x = sqrt2(prec).scale2(-2) - _inv_alpha_pow(g, prec)
    else:
        x = 1 - _inv_alpha_pow(g, prec)
    return x.log()


def gamma3_exact(eq, m: int, g: int) -> QuadRat:
    """The algebraic number whose log is mu * log alpha in the second linear form."""
    eq = EquationId.parse(eq)
    if eq is EquationId.EQ1:
        den = QuadRat(QuadInt(0, 1), 4) - alpha_power(-g)
        return QuadRat.of(pell(m)) / den
    den = QuadRat.of(1) - alpha_power(-g)
    return QuadRat(QuadInt(0, 2 * pell_lucas(m))) / den


def mu_phase2(eq, m: int, g: int) -> Callable[[int], RealBall]:
    eq = int(EquationId.parse(eq))
    if eq == 1:
        num = pell(m)
        return lambda prec: (log_nat(num, prec) - _log_denominator(1, g, prec)) / log_alpha(prec)
    num = pell_lucas(m)
    # log(2 sqrt 2 Q_m) = log(8 Q_m^2) / 2
    return lambda prec: ((log_nat(8 * num * num, prec).scale2(-1))
                         - _log_denominator(2, g, prec)) / log_alpha(prec)


PHASE2_A = {EquationId.EQ1: Fraction("11.77"), EquationId.EQ2: Fraction("6.84")}


@dataclass(frozen=True)
class Cell:
    m: int
    gap: int
    n_max: int
    outcome: ReductionOutcome


@lru_cache(maxsize=None)
def _legendre_floor(b: int, M: int, A: Fraction, policy: PrecisionPolicy) -> int:
    """No Legendre bound for |d tau - n + mu| < (A/log alpha) alpha^-n can beat this."""
    c = legendre_rational_gap(cached_expansion(b, M + 1, policy), M + 1, policy)
    x = (over_log_alpha(A)(128) * (M + 1) / RealBall.from_fraction(c, 128)).log() / log_alpha(128)
    return x.floor() or 0


def reduce_cell(eq, b: int, m: int, g: int, M: int,
                policy: PrecisionPolicy = DEFAULT_POLICY, candidates: int = 1) -> Cell:
    """Largest n allowed for one (m, n-k) cell; n < 3 is left to the search.

    Both reductions are tried and the smaller valid bound is kept.  The
    Legendre one covers shifts that are (nearly) rational combinations of
    tau and 1, where every eps is negative or tiny.
    """
    eq = EquationId.parse(eq)
    A = over_log_alpha(PHASE2_A[eq])
    B = lambda p: alpha(p)  # noqa: E731
    mu = mu_phase2(eq, m, g)
    inst = ReductionInstance(b, mu, A, B, M)
    outcomes = []
    try:
        outcomes.append(bd_reduce(inst, policy, candidates=candidates))
    except NoPositiveEpsilon:
        pass
    if outcomes and outcomes[0].w_bound <= _legendre_floor(b, M, PHASE2_A[eq], policy):
        return Cell(m, g, max(outcomes[0].w_bound - 1, 2), outcomes[0])
    rel = rational_log_relation(gamma3_exact(eq, m, g), b)
    found = (rel, Fraction(0)) if rel else near_relation(mu, b, M, policy)
    if found:
        def possible(d0, n0):
            k0 = n0 - g
            if k0 < 0:
                return False
            chk = concat_check(eq, b, n0, m, k0)
            return chk.holds and chk.d == d0

        outcomes.append(legendre_two_term(b, found[0], A, B, M, policy, delta=found[1],
                                          exceptional_possible=possible))
    if not outcomes:
        raise NoPositiveEpsilon(f"equation {int(eq)}, b={b}, m={m}, n-k={g}: no reduction applies")
    out = min(outcomes, key=lambda o: o.w_bound)
    return Cell(m, g, max(out.w_bound - 1, 2), out)


@dataclass
class PhaseReport:
    equation: EquationId
    b: int
    phase: int
    M: int
    cells: list[Cell] = field(default_factory=list)
    conclusion: int | None = None
    worst: Cell | None = None
    refined: int = 0

    def aggregate(self) -> None:
        worst = None
        for c in self.cells:
            if worst is None or c.n_max > worst.n_max:
                worst = c
        self.worst = worst
        self.conclusion = None if worst is None else worst.n_max

    def to_json(self) -> dict:
        w = self.worst
        d = {"equation": int(self.equation), "b": self.b, "phase": self.phase,
             "M": str(self.M), "cells": len(self.cells), "n_max": self.conclusion}
        if w is not None:
            d["worst_cell"] = {"m": w.m, "n_minus_k": w.gap, **w.outcome.to_json()}
        methods: dict[str, int] = {}
        for c in self.cells:
            methods[c.outcome.method] = methods.get(c.outcome.method, 0) + 1
        d["cells_by_method"] = dict(sorted(methods.items()))
        d["refined_cells"] = self.refined
        return d

    def table_column(self) -> dict:
        """The worst cell in the layout of the published tables."""
        w = self.worst
        out = w.outcome
        eps = out.epsilon_lower()
        return {"b": self.b, "q_index": "" if out.t is None else f"q_{out.ref_index}",
                "m": w.m, "n_minus_k": w.gap,
                "epsilon_lower_bound": "" if eps is None else decimal_string(eps, 6, "down"),
                "n_bound": w.n_max}


def _cells_worker(args):
    eq, b, ms, gaps, M, policy = args
    return [reduce_cell(eq, b, m, g, M, policy) for m in ms for g in gaps]


def _refine(cells: list[Cell], eq, b: int, M: int, policy: PrecisionPolicy, candidates: int) -> int:
    """Re-reduce the currently worst cells with more convergents until the
    worst cell has been refined.  Returns the number of cells redone."""
    heap = [(-c.n_max, i) for i, c in enumerate(cells)]
    heapq.heapify(heap)
    done: set[int] = set()
    while heap and heap[0][1] not in done:
        _, i = heapq.heappop(heap)
        c = cells[i]
        cells[i] = reduce_cell(eq, b, c.m, c.gap, M, policy, candidates=candidates)
        done.add(i)
        heapq.heappush(heap, (-cells[i].n_max, i))
    return len(done)


def phase2(eq, b: int, m_range=None, gap_range=None, M: int | None = None,
           policy: PrecisionPolicy = DEFAULT_POLICY, jobs: int = 1,
           candidates: int = 6) -> PhaseReport:
    """Reduce every (m, n-k) cell and keep the largest surviving n.

    Defaults: EQ1 uses 1 <= m <= 100 and 2 <= n-k <= derive_gap_bound;
    EQ2 uses 0 <= m <= 100 and 1 <= n-k <= derive_gap_bound.

    Each cell is first reduced with its first admissible convergent; the cells
    that end up on top are then redone with up to ``candidates`` convergents.
    """
    eq = EquationId.parse(eq)
    if m_range is None:
        m_range = range(1, 101) if eq is EquationId.EQ1 else range(0, 101)
    if gap_range is None:
        lo = 2 if eq is EquationId.EQ1 else 1
        gap_range = range(lo, derive_gap_bound(eq, b, max(m_range)) + 1)
    if M is None:
        M = phase2_M(eq, b, max(gap_range))
    ms, gaps = list(m_range), list(gap_range)
    if eq is EquationId.EQ1 and ms and min(ms) < 1:
        raise ValueError("EQ1 phase 2 needs m >= 1 (m = 0 is the degenerate family)")
    cached_expansion(b, 6 * M, policy)
    if jobs > 1 and len(ms) > 1:
        chunks = [ms[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_cells_worker, [(eq, b, c, gaps, M, policy) for c in chunks if c]))
        cells = sorted((c for part in parts for c in part), key=lambda c: (c.m, c.gap))
    else:
        cells = _cells_worker((eq, b, ms, gaps, M, policy))
    refined = _refine(cells, eq, b, M, policy, candidates) if candidates > 1 else 0
    rep = PhaseReport(eq, b, 2, M, cells, refined=refined)
    rep.aggregate()
    return rep


def derive_gap_bound(eq, b: int, m_max: int, prec: int = 128) -> int:
    """Integer bound on n - k given m <= m_max.

    EQ1: n - k < m + 2 + log(b+1)/log alpha  (strict, so take ceil - 1)
    EQ2: n - k <= m + 3 + log(b+1)/log alpha (rounded up as in the bound chain)
    """
    eq = EquationId.parse(eq)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    x = log_nat(b + 1, prec) / log_alpha(prec)
    if eq is EquationId.EQ1:
        return _ceil((x + m_max + 2).upper()) - 1
    return _ceil((x + m_max + 3).upper())


def phase2_M(eq, b: int, gap_max: int) -> int:
    """d bound for phase 2: d < 1.3 (n + 1) with n bounded via the second linear form."""
    X = n_bound_given_gap(eq, b, gap_max)
    return d_bound(X + 1)


def phase1_M(eq, b: int) -> int:
    """d bound for phase 1 from the absolute bound on n."""
    from .bounds import absolute_bound
    eq = EquationId.parse(eq)
    nb = absolute_bound(eq, b).n_bound.upper()
    n_excl = nb.numerator // nb.denominator + 1
    if eq is EquationId.EQ1:
        # d < 1.3 (n - m + 1) with m >= 101
        return d_bound(n_excl, 100)
    return d_bound(n_excl + 1)


__all__ = [
    "ReductionInstance", "ReductionOutcome", "NoPositiveEpsilon", "ContradictionFailed",
    "bd_reduce", "legendre_two_term", "rational_log_relation", "legendre_phase1_eq1",
    "phase1_eq2", "phase2", "reduce_cell", "derive_gap_bound", "PhaseReport", "Cell",
    "PrecisionExhausted", "ALPHA",
]
