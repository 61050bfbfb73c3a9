"""Bayesian bivariate meta-analysis of diagnostic test studies.

Exact binomial likelihoods with a bivariate Gaussian random effect on the
link scale, penalised-complexity and classical priors, and a deterministic
Laplace-grid posterior approximation (no MCMC in the main path).
"""

from .data import (
    Dataset,
    DataError,
    DesignBundle,
    IngestOptions,
    ModelSpec,
    StudyRecord,
    ValidationReport,
    build_design,
    parse_dataset,
    validate_dataset,
)
from .inference import (
    FitOptions,
    FitResult,
    GaussianApprox,
    HyperGrid,
    HyperPoint,
    Marginal,
    NumericError,
    PosteriorSamples,
    explore_hyper_grid,
    fit,
    latent_conditional_mode,
    log_posterior_theta,
    marginal_loglik,
    sample_posterior,
)
from .priors import (
    CalibratedCorPrior,
    CorrelationPrior,
    PriorConfig,
    PriorError,
    VariancePrior,
    WishartPrior,
    calibrate_pc_variance,
    pc_correlation_distance,
    tabulate_prior,
    wishart_logdensity,
)
from .accuracy import (
    ACCURACY_TYPES,
    StudyAccuracyTable,
    fitted_study_measures,
    measure_from_pair,
    summary_points,
)
from .plots import (
    CurveGeometry,
    ForestGeometry,
    PlotError,
    crosshair_layout,
    ellipse_region,
    forest_layout,
    sroc_curve,
    sroc_plot_geometry,
    walter_sroc,
)
from .report import fit_to_json, fit_to_json_dict, format_summary
from .svg import render_svg

__version__ = "0.1.0"

__all__ = [
    "ACCURACY_TYPES",
    "CalibratedCorPrior",
    "CorrelationPrior",
    "CurveGeometry",
    "DataError",
    "Dataset",
    "DesignBundle",
    "FitOptions",
    "FitResult",
    "ForestGeometry",
    "GaussianApprox",
    "HyperGrid",
    "HyperPoint",
    "IngestOptions",
    "Marginal",
    "ModelSpec",
    "NumericError",
    "PlotError",
    "PosteriorSamples",
    "PriorConfig",
    "PriorError",
    "StudyAccuracyTable",
    "StudyRecord",
    "ValidationReport",
    "VariancePrior",
    "WishartPrior",
    "build_design",
    "calibrate_pc_variance",
    "crosshair_layout",
    "ellipse_region",
    "explore_hyper_grid",
    "fit",
    "fit_to_json",
    "fit_to_json_dict",
    "fitted_study_measures",
    "forest_layout",
    "format_summary",
    "latent_conditional_mode",
    "log_posterior_theta",
    "marginal_loglik",
    "measure_from_pair",
    "parse_dataset",
    "pc_correlation_distance",
    "render_svg",
    "sample_posterior",
    "sroc_curve",
    "sroc_plot_geometry",
    "summary_points",
    "tabulate_prior",
    "validate_dataset",
    "walter_sroc",
    "wishart_logdensity",
]
