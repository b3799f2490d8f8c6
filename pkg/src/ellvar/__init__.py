"""Analytic VaR and expected shortfall for linear portfolios under elliptic laws."""

from .elliptic import (
    DensityGenerator,
    EllipticModel,
    big_g,
    clear_quantile_cache,
    expected_shortfall,
    marginal_tail,
    marginal_tail_expectation,
    quantile_multiplier,
    solve_quantile,
    var,
)
from .errors import (
    BracketError,
    DimensionError,
    DivergentTailError,
    DomainError,
    EllvarError,
    NotPositiveDefiniteError,
    NumericalError,
    QuadratureError,
    UnsupportedGeneratorError,
)
from .linalg import cholesky, estimate_moments, quadratic_form, validate_symmetric
from .mc import (
    EmpiricalEstimate,
    SimulationSpec,
    ValidationRow,
    empirical_var_es,
    simulate_pnl,
    validate_model,
)
from .mixture import MixtureModel, mixture_expected_shortfall, mixture_var
from .portfolio import (
    IncrementalVar,
    Position,
    RiskReport,
    business_unit_deltas,
    delta_equivalents,
    equity_deltas,
    incremental_var,
    risk_report,
)
from .specfun import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    beta,
    hyp2f1,
    hyp2f1_log,
    integrate_semi_infinite,
    log_gamma,
    reg_inc_beta,
)
from .student import (
    StudentParams,
    dispersion_from_covariance,
    gaussian_generator,
    student_big_g,
    student_es_multiplier,
    student_expected_shortfall,
    student_generator,
    student_quantile,
    student_tail_expectation,
    student_var,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "DEFAULT_QUADRATURE",
    "DensityGenerator",
    "DimensionError",
    "DivergentTailError",
    "DomainError",
    "EllipticModel",
    "EllvarError",
    "EmpiricalEstimate",
    "IncrementalVar",
    "MixtureModel",
    "NotPositiveDefiniteError",
    "NumericalError",
    "Position",
    "QuadratureError",
    "QuadratureSpec",
    "RiskReport",
    "SimulationSpec",
    "StudentParams",
    "UnsupportedGeneratorError",
    "ValidationRow",
    "beta",
    "big_g",
    "business_unit_deltas",
    "cholesky",
    "clear_quantile_cache",
    "delta_equivalents",
    "dispersion_from_covariance",
    "empirical_var_es",
    "equity_deltas",
    "estimate_moments",
    "expected_shortfall",
    "gaussian_generator",
    "hyp2f1",
    "hyp2f1_log",
    "incremental_var",
    "integrate_semi_infinite",
    "log_gamma",
    "marginal_tail",
    "marginal_tail_expectation",
    "mixture_expected_shortfall",
    "mixture_var",
    "quadratic_form",
    "quantile_multiplier",
    "reg_inc_beta",
    "risk_report",
    "simulate_pnl",
    "solve_quantile",
    "student_big_g",
    "student_es_multiplier",
    "student_expected_shortfall",
    "student_generator",
    "student_quantile",
    "student_tail_expectation",
    "student_var",
    "validate_model",
    "validate_symmetric",
    "var",
]
