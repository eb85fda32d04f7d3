"""Escape rates, hitting times and invariant measures for Misiurewicz-Thurston unimodal maps."""

from .errors import InputError, MTError, NumericalError
from .maps import (
    CriticalOrbitData,
    UnimodalMap,
    classify_point,
    critical_orbit,
    find_mt_parameter,
    find_periodic_points,
)
from .measure import (
    InvariantDensity,
    MeasureEvaluator,
    UlamOperator,
    build_ulam,
    hole_measures,
    invariant_density,
    mu_interval,
)
from .open_system import (
    escape_rate_mc,
    escape_rate_spectral,
    induced_escape_check,
    local_escape_sweep,
    split_eps,
)
from .hts import estimate_L, extremal_index, hts_sweep, sample_hitting_times
from .symbolic import (
    build_inducing_domain,
    build_partition,
    first_return_map,
    identify_chains,
    induced_hole,
)

__all__ = [
    "MTError", "InputError", "NumericalError",
    "UnimodalMap", "CriticalOrbitData", "critical_orbit", "find_mt_parameter",
    "find_periodic_points", "classify_point",
    "build_partition", "build_inducing_domain", "first_return_map", "identify_chains",
    "induced_hole",
    "UlamOperator", "InvariantDensity", "MeasureEvaluator", "build_ulam", "invariant_density",
    "mu_interval", "hole_measures",
    "escape_rate_spectral", "escape_rate_mc", "local_escape_sweep", "split_eps",
    "induced_escape_check",
    "sample_hitting_times", "estimate_L", "extremal_index", "hts_sweep",
]
