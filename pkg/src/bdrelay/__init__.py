"""Power allocation and lattice coding for two-phase bi-directional relaying."""

__version__ = "0.1.0"

from .channel import ChannelRealization, FadingEnsemble, kappa_sq, sample_rayleigh
from .rates import capacity_c, highsnr_c, lattice_rate_d, uce_breakpoints
from .closed_form import (AllocationTriple, allocate_ach_highsnr, allocate_ub_highsnr,
                          gap_sweep, highsnr_exchange_rate)
from .upper_bound import (ConvergenceError, PowerAllocation, SolveResult, SolverConfig,
                          evaluate_upper_objective, solve_upper_bound)
from .achievable import (AchievableConfig, amplify_forward_rate, af_allocation,
                         evaluate_achievable_objective, solve_achievable)

__all__ = [
    "ChannelRealization", "FadingEnsemble", "kappa_sq", "sample_rayleigh",
    "capacity_c", "highsnr_c", "lattice_rate_d", "uce_breakpoints",
    "AllocationTriple", "allocate_ach_highsnr", "allocate_ub_highsnr", "gap_sweep",
    "highsnr_exchange_rate", "ConvergenceError", "PowerAllocation", "SolveResult",
    "SolverConfig", "evaluate_upper_objective", "solve_upper_bound", "AchievableConfig",
    "amplify_forward_rate", "af_allocation", "evaluate_achievable_objective",
    "solve_achievable",
]
