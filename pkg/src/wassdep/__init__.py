"""
Wasserstein-based dependence coefficients between two groups of variables.

The coefficients ``d1`` and ``d2`` measure how far a covariance matrix is from
the independence coupling of its diagonal blocks, relative to the maximally
dependent coupling ``sigma_m``. The package also provides plug-in estimators
with analytic standard errors, eigenvalue shrinkage and Monte Carlo tools.
"""

__version__ = "0.1.0"

from .coefficients import (
    CoefficientKind,
    CoefficientResult,
    all_coefficients,
    coefficient,
    cov_to_corr,
    d1,
    d2,
    rv,
    rv_adjusted,
)
from .coupling import BlockPartition, majorizes, random_coupling, sigma_m, von_neumann_entropy
from .derivatives import DerivativePack, asymptotic_variance, correlation_adjust, m1_matrix, m2_matrix
from .errors import *  # noqa: F401,F403
from .estimation import (
    EstimateReport,
    Estimator,
    Shrinkage,
    empirical_correlation,
    estimate_with_ci,
    normal_scores_correlation,
    qnorm,
    shrink_ds1,
    shrink_ds2,
    two_sample_difference_ci,
)
from .linalg import EigenSystem, bures_wasserstein_sq, frechet_bures, frechet_sqrt, sqrt_psd, sym_eigen
from .simulation import SETTINGS, CoverageReport, PPReport, SimSetting, run_coverage, run_pp, run_two_sample, sample_gaussian
