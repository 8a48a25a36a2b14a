"""Prediction bounds, predictive distributions and coverage studies.

Submodules
----------
dist          distribution kernels (cdf, quantile, sampling)
fit           maximum likelihood fits, complete or Type-II censored
boot          parametric bootstrap with order-independent seeding
predict_core  plug-in, calibration and direct bootstrap bounds and cdfs
predict_ls    GPQ bootstrap and the Student-t bound for normal data
predict_fid   fiducial predictive distributions for gamma and inverse Gaussian data
predict_disc  binomial and Poisson prediction bounds
npar          order-statistic intervals and conformal regions
coverage      Monte Carlo and exact coverage probabilities
cli           command-line front end
"""

__version__ = "0.1.0"

from . import dist
from ._kernels import BACKEND
from .boot import BootstrapBatch, RngPolicy, calibration_u_values, parametric_bootstrap
from .coverage import (
    CoverageReport,
    ExactCoverage,
    MethodConfig,
    estimate_coverage,
    estimate_coverage_many,
    exact_discrete_coverage,
)
from .dist import Kernel, ModelSpec
from .errors import (
    DegenerateSampleError,
    EmptyBatchError,
    ExcessiveFailureError,
    InvalidParameterError,
    InvalidProbabilityError,
    NonConvergenceError,
    PredintError,
    RootNotBracketedError,
    TruncationError,
    UnsupportedFamilyError,
)
from .fit import FitResult, Sample, SampleShape, fit_ml, fit_ml_batch, loglik
from .npar import (
    MEAN_DEVIATION,
    MEDIAN_DEVIATION,
    ConformalRegion,
    NonconformityMeasure,
    OrderStatInterval,
    conformal_region,
    order_stat_interval,
)
from .predict_core import (
    MixturePredictiveCdf,
    PredictionBound,
    PredictionInterval,
    PredictiveCdf,
    calibration_bootstrap_bound,
    calibration_predictive_cdf,
    direct_bootstrap_bound,
    direct_bootstrap_cdf,
    plugin_bound,
    plugin_cdf,
)
from .predict_disc import DiscreteBound, DiscretePredictionProblem, binom_bounds, pois_bounds
from .predict_fid import (
    fiducial_bound,
    fiducial_predictive_cdf,
    gamma_fiducial_draws,
    invgauss_fiducial_draws,
)
from .predict_ls import gpq_bootstrap_bound, gpq_predictive_cdf, gpq_transform, normal_exact_bound
