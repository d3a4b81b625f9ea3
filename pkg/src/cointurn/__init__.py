"""cointurn: coin-turning processes, their exact laws, and their limits.

Start from a fair coin and, instead of tossing it again, turn it over at
step n with a prescribed probability p_n.  This package simulates such
processes, computes their exact finite-horizon distributions and
correlation sums, evaluates the limiting laws of the scaled sums (a
symmetric beta family including the uniform, arcsine, and semicircle laws;
Gaussian limits; and a degenerate two-point limit), classifies schedules
into regimes, and verifies the convergence claims with exact oracles and
reproducible Monte Carlo statistics.
"""

__version__ = "0.1.0"

from .schedules import (
    Constant,
    CorrelationAccumulator,
    CorrelationBoundsError,
    PowerLaw,
    Schedule,
    ScheduleDomainError,
    ScheduleError,
    ScheduleParseError,
    Summable,
    Table,
    correlation_bounds,
    first_turn_probability_above_half,
    load_table,
    pair_correlation,
    parse_schedule,
    turn_probability,
)
from .exact import (
    BRUTE_FORCE_MAX_N,
    EXACT_LAW_MAX_N,
    ExactLaw,
    HorizonCapError,
    TurnCountLaw,
    appendix_q_ratio,
    appendix_q_ratios,
    brute_force_law,
    e_moment_profile,
    e_moment_sum,
    exact_law,
    exact_moment,
    pair_product_prefix,
    pair_product_sum,
    turn_count_cf,
    turn_count_pmf,
    variance_of_sum,
    variance_profile,
)
from .limits import (
    DEFAULT_SIGMA2_CONVENTION,
    SIGMA2_CONVENTIONS,
    ConventionResolution,
    DegeneratePair,
    GaussianLimit,
    LimitLaw,
    SymmetricBeta,
    bessel_i,
    beta_mgf,
    constant_regime_sigma2,
    density_grid,
    gaussian_moment,
    parse_limit_law,
    resolve_sigma2_convention,
    sample_limit,
    subcritical_sigma2,
    symmetric_beta_cdf,
    symmetric_beta_density,
    symmetric_beta_moment,
)
from .classify import (
    LLNEvidence,
    Regime,
    RegimeReport,
    SeriesEvidence,
    TrendEvidence,
    carleman_check,
    classify_analytic,
    classify_empirical,
    fit_growth_exponent,
    lln_conditions,
)
from .montecarlo import (
    DEFAULT_SAMPLE_CAP,
    PATH_BLOCK,
    SimulationSummary,
    VerificationReport,
    auto_target,
    kolmogorov_pvalue,
    ks_statistic,
    simulate_paths,
    verify,
)
from .reports import SCHEMA_VERSION, render_csv, render_json

__all__ = [
    "__version__",
    # schedules
    "Schedule",
    "Constant",
    "PowerLaw",
    "Summable",
    "Table",
    "ScheduleError",
    "ScheduleParseError",
    "ScheduleDomainError",
    "CorrelationBoundsError",
    "CorrelationAccumulator",
    "parse_schedule",
    "load_table",
    "turn_probability",
    "pair_correlation",
    "correlation_bounds",
    "first_turn_probability_above_half",
    # exact engine
    "EXACT_LAW_MAX_N",
    "BRUTE_FORCE_MAX_N",
    "HorizonCapError",
    "ExactLaw",
    "TurnCountLaw",
    "exact_law",
    "brute_force_law",
    "exact_moment",
    "pair_product_sum",
    "pair_product_prefix",
    "e_moment_sum",
    "e_moment_profile",
    "variance_of_sum",
    "variance_profile",
    "turn_count_pmf",
    "turn_count_cf",
    "appendix_q_ratio",
    "appendix_q_ratios",
    # limit laws
    "DegeneratePair",
    "SymmetricBeta",
    "GaussianLimit",
    "LimitLaw",
    "ConventionResolution",
    "SIGMA2_CONVENTIONS",
    "DEFAULT_SIGMA2_CONVENTION",
    "bessel_i",
    "symmetric_beta_density",
    "symmetric_beta_moment",
    "symmetric_beta_cdf",
    "beta_mgf",
    "subcritical_sigma2",
    "resolve_sigma2_convention",
    "constant_regime_sigma2",
    "gaussian_moment",
    "sample_limit",
    "parse_limit_law",
    "density_grid",
    # classifier
    "Regime",
    "RegimeReport",
    "SeriesEvidence",
    "TrendEvidence",
    "LLNEvidence",
    "classify_analytic",
    "classify_empirical",
    "lln_conditions",
    "carleman_check",
    "fit_growth_exponent",
    # monte carlo
    "PATH_BLOCK",
    "DEFAULT_SAMPLE_CAP",
    "SimulationSummary",
    "VerificationReport",
    "simulate_paths",
    "ks_statistic",
    "kolmogorov_pvalue",
    "verify",
    "auto_target",
    # reports
    "SCHEMA_VERSION",
    "render_json",
    "render_csv",
]
