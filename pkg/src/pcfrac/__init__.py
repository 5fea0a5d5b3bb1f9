"""p-continued fractions for L^p quasinorms with 0 < p < 1."""

__version__ = "0.1.0"

from .alpha import IrrationalSpec, parse, reduce
from .engine import PcfExpansion, expand
from .mordell import MordellConstants, constants
from .numerics import PrecisionPolicy, Real, UndecidableComparison
from .oracle import brute_admissible, brute_best_approximations
from .one_periodic import pm_asymptotic, solve_pm, theorem13_check
from .regular_cf import RegularExpansion, expand_regular

__all__ = [
    "IrrationalSpec", "MordellConstants", "PcfExpansion", "PrecisionPolicy", "Real",
    "RegularExpansion", "UndecidableComparison", "brute_admissible", "brute_best_approximations",
    "constants", "expand", "expand_regular", "parse", "pm_asymptotic", "reduce", "solve_pm",
    "theorem13_check",
]
