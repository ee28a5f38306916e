import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pellconcat import _kernels
from pellconcat.search import (
    CSV_COLUMNS,
    THEOREM_TUPLES,
    SearchConfig,
    Solution,
    brute_force,
    degenerate_scan_eq1,
    run_pipeline,
)
from pellconcat.sequences import EquationId

from .oracles import brute_force_naive


def _keys(sols):
    return [s.key for s in sols]


@pytest.mark.parametrize("eq", [1, 2])
def test_matches_naive_oracle_up_to_30(eq):
    if eq == 1:
        cfg = SearchConfig(1, 2, 10, 30, 30, m_min=1, min_gap=2, n_above_m=True)
        naive = brute_force_naive(1, range(2, 11), 30, 1, 30, 2, True)
    else:
        cfg = SearchConfig(2, 2, 10, 30, 30, m_min=0, min_gap=1)
        naive = brute_force_naive(2, range(2, 11), 30, 0, 30, 1, False)
    assert _keys(brute_force(cfg)) == naive


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([1, 2]), st.integers(2, 16), st.integers(0, 22), st.integers(0, 22),
       st.integers(0, 3), st.booleans())
def test_random_boxes_against_oracle(eq, b, n_max, m_hi, min_gap, above):
    cfg = SearchConfig(eq, b, b, n_max, m_hi, min_gap=min_gap, n_above_m=above)
    expect = brute_force_naive(eq, [b], n_max, 0, m_hi, min_gap, above)
    assert _keys(brute_force(cfg, backend="numpy")) == expect


@pytest.mark.skipif(not _kernels.numba_available(), reason="numba not installed")
@pytest.mark.parametrize("eq", [1, 2])
def test_numba_and_numpy_backends_agree(eq):
    cfg = SearchConfig.for_equation(eq, 2, 10, 70, 70)
    assert brute_force(cfg, backend="numba") == brute_force(cfg, backend="numpy")


def test_scan_kernels_agree_on_raw_rows():
    rng = np.random.default_rng(7)
    p = 101
    lhs, mid, mult, tail = (rng.integers(0, p, 40).astype(np.int64) for _ in range(4))
    box = dict(n_lo=3, n_hi=39, m_lo=1, m_hi=39, min_gap=2, k_cap=37, n_above_m=True)
    a = _kernels.congruence_scan(lhs, mid, mult, tail, p, backend="numpy", **box)
    rows = sorted(map(tuple, a.tolist()))
    expect = sorted((n, m, k) for n in range(3, 40) for m in range(1, 40) if m < n
                    for k in range(0, min(37, n - 2) + 1)
                    if lhs[n] == (mult[k] * mid[m] + tail[k]) % p)
    assert rows == expect
    if _kernels.numba_available():
        b = _kernels.congruence_scan(lhs, mid, mult, tail, p, backend="numba", **box)
        assert sorted(map(tuple, b.tolist())) == expect


def test_env_flag_selects_backend(monkeypatch):
    monkeypatch.delenv("PELLCONCAT_USE_NUMBA", raising=False)
    assert not _kernels._use_numba()
    monkeypatch.setenv("PELLCONCAT_USE_NUMBA", "0")
    assert not _kernels._use_numba()
    monkeypatch.setenv("PELLCONCAT_USE_NUMBA", "1")
    assert _kernels._use_numba()
    with pytest.raises(ValueError):
        _kernels.congruence_scan(*(np.zeros(2, np.int64),) * 4, 3, n_lo=0, n_hi=1, m_lo=0, m_hi=1,
                                 min_gap=0, k_cap=1, n_above_m=False, backend="gpu")


@pytest.mark.parametrize("eq", [1, 2])
def test_theorem_tuples_in_default_box(eq):
    n_max = 64 if eq == 1 else 60
    got = brute_force(SearchConfig.for_equation(eq, 2, 10, n_max))
    assert tuple(_keys(got)) == THEOREM_TUPLES[EquationId(eq)]
    assert all(not s.degenerate for s in got)


def test_degenerate_family():
    sols = degenerate_scan_eq1(2, 10, 64)
    assert _keys(sols) == [(b, 2, 0, k) for b in range(2, 11) for k in (0, 1)]
    assert all(s.degenerate and s.lhs == 2 and s.term1 == 0 for s in sols)


def test_solution_json_shape():
    s = Solution.from_check(1, 6, 6, 1, 4)
    assert s.to_json() == {"equation": 1, "b": 6, "d": 2, "n": 6, "m": 1, "k": 4,
                           "lhs": "70", "term1": "36", "term2": "34"}
    assert json.dumps(s.to_json()) == json.dumps(Solution.from_check(1, 6, 6, 1, 4).to_json())
    assert tuple(s.to_json()) == CSV_COLUMNS
    assert Solution.from_check(1, 6, 6, 1, 3) is None


def test_empty_and_invalid_boxes():
    assert brute_force(SearchConfig(1, 2, 10, 1, 5, min_gap=2)) == []
    assert brute_force(SearchConfig(2, 5, 4, 30, 30)) == []
    with pytest.raises(ValueError):
        SearchConfig(1, 1, 3, 10, 10)
    with pytest.raises(ValueError):
        SearchConfig(1, 2, 3, -1, 10)


def test_parallel_matches_serial():
    cfg = SearchConfig.for_equation(2, 2, 10, 40, 40)
    assert brute_force(cfg, jobs=2) == brute_force(cfg)


@pytest.mark.slow
@pytest.mark.parametrize("eq,b", [(2, 2), (1, 6), (1, 2)])
def test_pipeline_single_base(eq, b):
    rep = run_pipeline(eq, b)
    expect = [t for t in THEOREM_TUPLES[EquationId(eq)] if t[0] == b]
    assert _keys(rep.solutions) == expect
    assert rep.phase2.conclusion <= 70 and rep.complete
    js = rep.to_json()
    assert js["phase1"]["M"] == str(rep.phase1_M)
    assert json.dumps(js, sort_keys=False) == json.dumps(rep.to_json(), sort_keys=False)
    if eq == 1:
        assert _keys(rep.degenerate) == [(b, 2, 0, 0), (b, 2, 0, 1)]
