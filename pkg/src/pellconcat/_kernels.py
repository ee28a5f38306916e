"""Residue filter for the brute-force search.

A tuple (n, m, k) can only satisfy ``lhs[n] == mult[k] * mid[m] + tail[k]`` over
the integers if it does so modulo every prime.  The kernels test the congruence
for one 31-bit prime over the whole box and return the survivors, which the
caller re-checks exactly.  Products of two residues stay below 2**62.

The numpy implementation is the default.  Set ``PELLCONCAT_USE_NUMBA=1`` to use
the compiled loop instead (needs the optional ``numba`` package); on the boxes
this package searches it is not faster, see ``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

import numpy as np

FILTER_PRIMES = (2147483647, 2147483629)


def _use_numba() -> bool:
    return os.environ.get("PELLCONCAT_USE_NUMBA", "").strip() not in ("", "0")


_jitted = None


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _scan_jit():
    """The compiled loop, built on first use and cached on disk by numba."""
    global _jitted
    if _jitted is None:
        try:
            from numba import njit
        except ImportError:
            raise RuntimeError("backend 'numba' requested but numba is not installed") from None
        _jitted = njit(cache=True)(_scan_loops)
    return _jitted


def residues(values, p: int) -> np.ndarray:
    return np.array([v % p for v in values], dtype=np.int64)


def _scan_numpy(lhs, mid, mult, tail, p, n_lo, n_hi, m_lo, m_hi, min_gap, k_cap, n_above_m):
    out = []
    ms = np.arange(m_lo, m_hi + 1)
    for n in range(n_lo, n_hi + 1):
        k_hi = min(k_cap, n - min_gap)
        if k_hi < 0:
            continue
        m_top = min(m_hi, n - 1) if n_above_m else m_hi
        if m_top < m_lo:
            continue
        sel = ms[: m_top - m_lo + 1]
        ks = np.arange(k_hi + 1)
        rhs = (mult[ks][None, :] * mid[sel][:, None] + tail[ks][None, :]) % p
        hit_m, hit_k = np.nonzero(rhs == lhs[n])
        for i, j in zip(hit_m, hit_k):
            out.append((n, int(sel[i]), int(ks[j])))
    if not out:
        return np.empty((0, 3), dtype=np.int64)
    return np.array(out, dtype=np.int64)


def _scan_loops(lhs, mid, mult, tail, p, n_lo, n_hi, m_lo, m_hi, min_gap, k_cap, n_above_m):
    cap = 1024
    buf = np.empty((cap, 3), dtype=np.int64)
    cnt = 0
    for n in range(n_lo, n_hi + 1):
        k_hi = min(k_cap, n - min_gap)
        m_top = min(m_hi, n - 1) if n_above_m else m_hi
        target = lhs[n]
        for m in range(m_lo, m_top + 1):
            pm = mid[m]
            for k in range(k_hi + 1):
                if (mult[k] * pm + tail[k]) % p == target:
                    if cnt == cap:
                        bigger = np.empty((2 * cap, 3), dtype=np.int64)
                        bigger[:cap] = buf
                        buf = bigger
                        cap *= 2
                    buf[cnt, 0] = n
                    buf[cnt, 1] = m
                    buf[cnt, 2] = k
                    cnt += 1
    return buf[:cnt].copy()


def congruence_scan(lhs, mid, mult, tail, p, *, n_lo, n_hi, m_lo, m_hi, min_gap, k_cap,
                    n_above_m, backend: str | None = None) -> np.ndarray:
    """Rows (n, m, k) in the box with ``lhs[n] == mult[k]*mid[m] + tail[k] (mod p)``.

    Arrays are int64 residues indexed by n, m and k directly.
    """
    if backend is None:
        backend = "numba" if _use_numba() else "numpy"
    args = (lhs, mid, mult, tail, np.int64(p), n_lo, n_hi, m_lo, m_hi, min_gap, k_cap, bool(n_above_m))
    if backend == "numba":
        return _scan_jit()(*args)
    if backend == "numpy":
        return _scan_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}")
