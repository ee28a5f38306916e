"""Certified search for Pell numbers that concatenate a Pell (or Pell-Lucas) number
with a Pell-Lucas (or Pell) number in a base b."""

from .sequences import EquationId, concat_check, digit_count, pell, pell_lucas
from .hpreal import PrecisionExhausted, PrecisionPolicy, RealBall
from .contfrac import CFExpansion, expand
from .bounds import absolute_bound
from .reduction import ReductionInstance, ReductionOutcome, bd_reduce, phase2
from .search import SearchConfig, Solution, brute_force, run_pipeline, verify_paper_tables

__version__ = "0.1.0"

__all__ = [
    "EquationId", "concat_check", "digit_count", "pell", "pell_lucas",
    "PrecisionExhausted", "PrecisionPolicy", "RealBall", "CFExpansion", "expand",
    "absolute_bound", "ReductionInstance", "ReductionOutcome", "bd_reduce", "phase2",
    "SearchConfig", "Solution", "brute_force", "run_pipeline", "verify_paper_tables",
]
