"""Certified continued fractions of tau_b = log b / log alpha.

Partial quotients are read off an enclosure ``[lo, hi]`` of the current complete
quotient: a term is kept only while both exact rational endpoints have the same
floor, so it is the true term of every real in the interval.  Each new term must
also reappear when the enclosure is recomputed at twice the precision.

An expansion can be resumed: the complete quotient after term ``n`` is the
Moebius image ``(p_{n-1} - q_{n-1} tau) / (q_n tau - p_n)`` of a fresh,
tighter enclosure of tau, so no earlier term is recomputed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

from .hpreal import (
    DEFAULT_POLICY,
    PrecisionExhausted,
    PrecisionPolicy,
    RealBall,
    log_alpha,
    log_nat,
)


def tau(b: int, prec: int = 128) -> RealBall:
    """Enclosure of log b / log alpha."""
    if b < 2:
        raise ValueError("base must be >= 2")
    return log_nat(b, prec) / log_alpha(prec)


@dataclass(frozen=True)
class CFExpansion:
    b: int
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    precision: int = 0
    checked_precision: int = 0

    @property
    def certified_through(self) -> int:
        return len(self.partial_quotients) - 1

    def q(self, t: int) -> int:
        return self.convergents[t][1]

    def p(self, t: int) -> int:
        return self.convergents[t][0]

    def denominators(self) -> list[int]:
        return [q for _, q in self.convergents]

    def truncated(self, n_terms: int) -> "CFExpansion":
        return CFExpansion(self.b, self.partial_quotients[:n_terms],
                           self.convergents[:n_terms], self.precision,
                           self.checked_precision)

    def to_json(self) -> dict:
        return {
            "b": self.b,
            "partial_quotients": [str(a) for a in self.partial_quotients],
            "convergents": [{"t": t, "p": str(p), "q": str(q)}
                            for t, (p, q) in enumerate(self.convergents)],
        }


def _tail_terms(lo: Fraction, hi: Fraction) -> list[int]:
    """Partial quotients shared by every real in ``[lo, hi]`` (lo, hi > 0 here)."""
    out = []
    while True:
        a = lo.numerator // lo.denominator
        if a != hi.numerator // hi.denominator:
            return out
        if lo == a or hi == a:
            return out
        out.append(a)
        lo, hi = 1 / (hi - a), 1 / (lo - a)


def _complete_quotient(t_lo: Fraction, t_hi: Fraction, pq, pq_prev):
    """Enclosure of the next complete quotient given the last two convergents."""
    p, q = pq
    pp, qp = pq_prev
    den_lo, den_hi = q * t_lo - p, q * t_hi - p
    if den_lo == 0 or den_hi == 0 or (den_lo > 0) != (den_hi > 0):
        return None
    x1 = (pp - qp * t_lo) / den_lo
    x2 = (pp - qp * t_hi) / den_hi
    lo, hi = min(x1, x2), max(x1, x2)
    if lo <= 0:
        return None
    return lo, hi


def _new_terms(b: int, prec: int, conv: list[tuple[int, int]]) -> list[int]:
    t = tau(b, prec)
    pq = conv[-1] if conv else (1, 0)
    pq_prev = conv[-2] if len(conv) >= 2 else ((1, 0) if conv else (0, 1))
    cq = _complete_quotient(t.lower(), t.upper(), pq, pq_prev)
    if cq is None:
        return []
    return _tail_terms(*cq)


def _append(conv: list[tuple[int, int]], a: int) -> None:
    if not conv:
        conv.append((a, 1))
    elif len(conv) == 1:
        p0, q0 = conv[0]
        conv.append((a * p0 + 1, a * q0))
    else:
        (p1, q1), (p2, q2) = conv[-2], conv[-1]
        conv.append((a * p2 + p1, a * q2 + q1))


def _bits_for(until_q: int | None, terms: int | None) -> int:
    if until_q is not None:
        return 2 * max(1, int(until_q).bit_length()) + 64
    if terms is not None:
        # partial quotients of these numbers average ~ 3.4 bits of q each
        return 4 * terms + 64
    return 128


def extend(cf: CFExpansion, *, terms: int | None = None, until_q: int | None = None,
           policy: PrecisionPolicy = DEFAULT_POLICY) -> CFExpansion:
    """Return an expansion with ``terms`` quotients, or up to the first denominator
    exceeding ``until_q`` (exactly one rule must be given).
    """
    if (terms is None) == (until_q is None):
        raise ValueError("give exactly one stopping rule: terms or until_q")

    def done(conv):
        if terms is not None:
            return len(conv) >= terms
        return any(q > until_q for _, q in conv)

    def cut(conv):
        if terms is not None:
            return terms
        return next(i for i, (_, q) in enumerate(conv) if q > until_q) + 1

    pqs = list(cf.partial_quotients)
    conv = list(cf.convergents)
    if done(conv):
        return cf.truncated(cut(conv))
    prec_used, checked = cf.precision, cf.checked_precision
    # every term is re-derived at twice the working precision, so work below max/2
    cap = policy.max_bits // 2
    if cap < 1:
        raise ValueError("max_bits too small")
    work = PrecisionPolicy(min(policy.initial_bits, cap), cap, policy.escalation_factor)
    start = min(max(_bits_for(until_q, terms), cf.precision), cap)
    for prec in work.ladder(start):
        first = _new_terms(cf.b, prec, conv)
        second = _new_terms(cf.b, 2 * prec, conv)
        agreed = []
        for x, y in zip(first, second):
            if x != y:
                break
            agreed.append(x)
        if len(second) >= len(first) and second[:len(first)] != first:
            raise ArithmeticError(f"continued fraction of tau_{cf.b} unstable at {prec} bits")
        for a in agreed:
            pqs.append(a)
            _append(conv, a)
        if agreed:
            prec_used, checked = prec, 2 * prec
        if done(conv):
            n = cut(conv)
            return CFExpansion(cf.b, tuple(pqs[:n]), tuple(conv[:n]), prec_used, checked)
    raise PrecisionExhausted(
        f"continued fraction of log {cf.b}/log alpha: stopping rule not met at "
        f"{policy.max_bits} bits", last=CFExpansion(cf.b, tuple(pqs), tuple(conv)),
        bits=policy.max_bits)


def expand(b: int, *, terms: int | None = None, until_q: int | None = None,
           policy: PrecisionPolicy = DEFAULT_POLICY) -> CFExpansion:
    if b < 2:
        raise ValueError("base must be >= 2")
    return extend(CFExpansion(b, (), ()), terms=terms, until_q=until_q, policy=policy)


_cache: dict[int, CFExpansion] = {}
_cache_lock = threading.Lock()


def cached_expansion(b: int, until_q: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> CFExpansion:
    """Expansion of tau_b reaching a denominator > ``until_q``, shared per process.

    The returned expansion may be longer than needed; slice it by index.
    """
    with _cache_lock:
        cf = _cache.get(b)
    if cf is not None and any(q > until_q for q in cf.denominators()):
        return cf
    cf = extend(cf or CFExpansion(b, (), ()), until_q=until_q, policy=policy)
    with _cache_lock:
        old = _cache.get(b)
        if old is None or len(old.convergents) < len(cf.convergents):
            _cache[b] = cf
    return cf


def first_denominator_exceeding(cf: CFExpansion, M: int,
                                policy: PrecisionPolicy = DEFAULT_POLICY) -> tuple[int, int]:
    """Minimal ``t`` with ``q_t > M``; extends the expansion when needed."""
    if not any(q > M for q in cf.denominators()):
        cf = extend(cf, until_q=M, policy=policy)
    for t, (_, q) in enumerate(cf.convergents):
        if q > M:
            return t, q
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class MaxQuotient:
    N: int
    q_N: int
    a_of_M: int
    argmax_index: int


def max_partial_quotient(cf: CFExpansion, M: int,
                         policy: PrecisionPolicy = DEFAULT_POLICY) -> MaxQuotient:
    """a(M) = max{a_0..a_N} for the minimal N with q_N > M (first index on ties)."""
    if not any(q > M for q in cf.denominators()):
        cf = extend(cf, until_q=M, policy=policy)
    N, qN = first_denominator_exceeding(cf, M)
    window = cf.partial_quotients[:N + 1]
    a = max(window)
    return MaxQuotient(N, qN, a, window.index(a))


def legendre_rational_gap(cf: CFExpansion, M: int,
                          policy: PrecisionPolicy = DEFAULT_POLICY) -> Fraction:
    """The constant c = 1/(a(M)+2) with |tau - x/y| >= c / y^2 for all 0 < y < M."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return Fraction(1, max_partial_quotient(cf, M, policy).a_of_M + 2)

