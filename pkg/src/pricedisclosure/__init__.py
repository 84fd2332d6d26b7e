"""Selective price disclosure toolkit.

Estimate price densities, compute a sequential searcher's critical query
cost, pick disclosure subsets that minimize it, and simulate market
outcomes at any queue position.
"""

from .data import (
    BUILTIN_MANIFESTS,
    DatasetManifest,
    PriceEntry,
    PriceList,
    builtin_dataset,
    load_prices,
    write_prices,
)
from .density import (
    ESTIMATORS,
    FAMILIES,
    Density,
    FitCandidate,
    FitReport,
    KernelDensity,
    ParametricDensity,
    UniformDensity,
    equal_mass_prices,
    fit_estimator,
    fit_kde,
    fit_parametric,
    quantile_array,
    silverman_bandwidth,
)
from .disclosure import (
    BRUTE_FORCE_GUARD,
    METHODS,
    DisclosureConstraints,
    DisclosureResult,
    brute_force_disclose,
    clear_evaluation_cache,
    disclose,
    evaluate_subset,
    evaluate_subset_uncached,
    full_disclose,
    interval_disclose,
    minimal_disclose,
    monte_carlo_disclose,
)
from .errors import (
    DatasetNotFoundError,
    FitError,
    GenerationError,
    InfeasibleError,
    NumericalError,
    ParseError,
    PriceDisclosureError,
    ValidationError,
)
from .quadrature import adaptive_simpson
from .search import (
    CriticalCost,
    Decision,
    SearcherState,
    critical_cost,
    decide,
    expected_new_prices,
    improvement_upper_bound,
    interval_subset_count,
    min_order_cdf,
    min_order_pdf,
    minimal_subset_count,
    subset_count,
)
from .simulator import (
    DETERMINISTIC_METHODS,
    MarketConfig,
    SimulationReport,
    SizeEffectRow,
    draw_csa_listing,
    generate_initial_prices,
    simulate_first_position,
    simulate_kth_position,
    size_effect_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_MANIFESTS",
    "BRUTE_FORCE_GUARD",
    "DETERMINISTIC_METHODS",
    "ESTIMATORS",
    "FAMILIES",
    "METHODS",
    "CriticalCost",
    "DatasetManifest",
    "DatasetNotFoundError",
    "Decision",
    "Density",
    "DisclosureConstraints",
    "DisclosureResult",
    "FitCandidate",
    "FitError",
    "FitReport",
    "GenerationError",
    "InfeasibleError",
    "KernelDensity",
    "MarketConfig",
    "NumericalError",
    "ParametricDensity",
    "ParseError",
    "PriceDisclosureError",
    "PriceEntry",
    "PriceList",
    "SearcherState",
    "SimulationReport",
    "SizeEffectRow",
    "UniformDensity",
    "ValidationError",
    "adaptive_simpson",
    "brute_force_disclose",
    "builtin_dataset",
    "clear_evaluation_cache",
    "critical_cost",
    "decide",
    "disclose",
    "draw_csa_listing",
    "equal_mass_prices",
    "evaluate_subset",
    "evaluate_subset_uncached",
    "expected_new_prices",
    "fit_estimator",
    "fit_kde",
    "fit_parametric",
    "full_disclose",
    "generate_initial_prices",
    "improvement_upper_bound",
    "interval_disclose",
    "interval_subset_count",
    "load_prices",
    "min_order_cdf",
    "min_order_pdf",
    "minimal_disclose",
    "minimal_subset_count",
    "monte_carlo_disclose",
    "quantile_array",
    "silverman_bandwidth",
    "simulate_first_position",
    "simulate_kth_position",
    "size_effect_experiment",
    "subset_count",
    "write_prices",
]
