"""Tilted prior classes for approximate Bayesian computation.

An ABC tolerance on the data can be traded for a class of exponentially
tilted priors around the original one. This package builds those classes,
checks their ordering properties, calibrates their width through the
Kolmogorov distance and samples the induced posteriors.
"""

__version__ = "0.1.0"

from .classes import (
    ExpFamSpec,
    PriorClass,
    SuffStatModel,
    TiltedPrior,
    TiltFn,
    ab_class,
    abc_class,
    abc_e_class,
    abc_g_class,
    class_contains,
    conjugate_duality_log_ratio,
    conjugate_shift,
    make_member,
    member_log_pdf,
    natural_tilt,
    taylor_duality_log_ratio,
    tilt_from_expfam,
    tilt_from_likelihood,
    tilt_from_likelihood_ratio,
    tilt_from_suffstat,
)
from .core import (
    Density,
    GridSpec,
    RngSeed,
    WeightedSample,
    ess,
    log_quadrature,
    log_sum_exp,
    normalize,
    quadrature_expectation,
)
from .densities import (
    bivariate_normal_density,
    gamma_density,
    independent_normal_density,
    mvnormal_density,
    normal_density,
    student_t_density,
)
from .estimators import ABCClassPosterior, RejectionABC
from .exceptions import (
    AbcPriorError,
    ConfigError,
    EmptyMassError,
    GridTooNarrowError,
    MembershipError,
    NoAcceptanceError,
    NonMonotoneError,
    NotComparableError,
    NumericalError,
    PropertyViolation,
)
from .kolmogorov import (
    DistanceCurve,
    distance_curve,
    elicit_epsilon,
    elicit_epsilon_vector,
    kolmogorov_distance,
    marginal_kolmogorov_distances,
)
from .models import (
    NormalKnownVar,
    PoissonGamma,
    PoissonRegression,
    StudentTLocation,
    load_synthetic_regression,
    normal_class_E,
    normal_truth,
    poisson_class_E,
    poisson_regression_class,
    posterior_robustness,
)
from .ordering import OrderingVerdict, class_order_chain, lr_order, mtp2_check, tilt_band
from .samplers import (
    AbcConfig,
    ks_two_sample,
    rejection_abc,
    sample_posterior_x0,
    sample_posterior_xprime,
    sample_prior_member,
    systematic_resample,
)

__all__ = [
    "ABCClassPosterior",
    "AbcConfig",
    "AbcPriorError",
    "ConfigError",
    "Density",
    "DistanceCurve",
    "EmptyMassError",
    "ExpFamSpec",
    "GridSpec",
    "GridTooNarrowError",
    "MembershipError",
    "NoAcceptanceError",
    "NonMonotoneError",
    "NormalKnownVar",
    "NotComparableError",
    "NumericalError",
    "OrderingVerdict",
    "PoissonGamma",
    "PoissonRegression",
    "PriorClass",
    "PropertyViolation",
    "RejectionABC",
    "RngSeed",
    "StudentTLocation",
    "SuffStatModel",
    "TiltFn",
    "TiltedPrior",
    "WeightedSample",
    "ab_class",
    "abc_class",
    "abc_e_class",
    "abc_g_class",
    "bivariate_normal_density",
    "class_contains",
    "class_order_chain",
    "conjugate_duality_log_ratio",
    "conjugate_shift",
    "distance_curve",
    "elicit_epsilon",
    "elicit_epsilon_vector",
    "ess",
    "gamma_density",
    "independent_normal_density",
    "kolmogorov_distance",
    "ks_two_sample",
    "load_synthetic_regression",
    "log_quadrature",
    "log_sum_exp",
    "lr_order",
    "make_member",
    "marginal_kolmogorov_distances",
    "member_log_pdf",
    "mtp2_check",
    "mvnormal_density",
    "natural_tilt",
    "normal_class_E",
    "normal_density",
    "normal_truth",
    "normalize",
    "poisson_class_E",
    "poisson_regression_class",
    "posterior_robustness",
    "quadrature_expectation",
    "rejection_abc",
    "sample_posterior_x0",
    "sample_posterior_xprime",
    "sample_prior_member",
    "student_t_density",
    "systematic_resample",
    "taylor_duality_log_ratio",
    "tilt_band",
    "tilt_from_expfam",
    "tilt_from_likelihood",
    "tilt_from_likelihood_ratio",
    "tilt_from_suffstat",
]
