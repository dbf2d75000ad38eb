"""Penalized empirical-likelihood inference for two-sample density ratio models.

Two samples are linked by g1(x) = exp(alpha + beta' h(x)) g2(x); the
package fits (alpha, beta) by penalized empirical likelihood, estimates
both distribution functions, tests their equality with a covariance that
accounts for the penalty, and ships the population-level asymptotics plus
a seeded simulation study with a CLI front end.
"""

from . import backend
from .asymptotics import (
    DistSpec,
    PopulationMatrices,
    asymptotic_bias,
    g2_process_cov,
    lognormal_true_theta,
    population_matrices,
)
from .data import (
    DesignData,
    HTransform,
    TwoSampleData,
    apply_h,
    load_two_sample_csv,
    write_two_sample_csv,
)
from .errors import (
    DimensionError,
    DomainError,
    EmptyGroupError,
    IntegrationError,
    InvalidArgument,
    InvalidBoundsError,
    NonexistenceError,
    ParseError,
    PendrmError,
    SingularHessianError,
    SingularityError,
    UnsupportedPenaltyError,
)
from .inference import (
    CdfEstimate,
    CovarianceEstimate,
    JumpWeights,
    WaldTest,
    cdf_estimates,
    efficiency,
    estimate_A_V,
    jump_weights,
    ridge_path_approximation,
    sandwich_sigma,
    wald_test,
)
from .likelihood import (
    PenaltySpec,
    PenaltyTerms,
    Theta,
    empirical_loglik,
    hessian,
    penalized_hessian,
    penalized_loglik,
    penalized_score,
    penalty_terms,
    score,
)
from .montecarlo import (
    CurvePoint,
    RngStream,
    SimCell,
    SimRow,
    chi_square_cdf,
    chi_square_quantile,
    mse_efficiency_curve,
    null_wald_sample,
    run_table_cell,
    sample_lognormal,
    sim_rows_csv,
)
from .solver import (
    FitOptions,
    FitResult,
    SeparationDiagnosis,
    detect_separation,
    fit,
    grid_oracle,
)

__version__ = "0.1.0"
