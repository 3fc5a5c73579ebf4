"""Age-of-information scheduling solvers.

Sources are numbered from 0 in this API. Policy strings use the config
grammar, where cycle entries are 1-based.
"""

from ._errors import AoiError
from ._aoi import (
    Cost,
    DpSolution,
    SimulationResult,
    System,
    __version__,
    certify_theorem3,
    check_strong_switch,
    config_hash,
    detect_cycle,
    dp_cycle,
    is_bounded_cost,
    optimal_threshold,
    run_config,
    simulate,
    solve_decoupled,
    solve_dp,
    threshold_average_cost,
    whittle_index,
)

__all__ = [
    "AoiError",
    "Cost",
    "DpSolution",
    "SimulationResult",
    "System",
    "__version__",
    "certify_theorem3",
    "check_strong_switch",
    "config_hash",
    "detect_cycle",
    "dp_cycle",
    "is_bounded_cost",
    "optimal_threshold",
    "run_config",
    "simulate",
    "solve_decoupled",
    "solve_dp",
    "threshold_average_cost",
    "whittle_index",
]
