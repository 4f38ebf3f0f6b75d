"""Optimal measures and rare-event diagnostics for minima of Gaussian processes.

The package computes the probability measure nu* minimizing the covariance
double integral over an interval (whose value sigma*^2 governs the Gaussian
decay of P(min X > u)), both in closed form for the families with known
solutions and numerically on dyadic grids with optimality certificates.  On
top of the optimal measure it provides exact path sampling and change-of-
measure Monte Carlo estimators for the tail of the minimum, its sub-Gaussian
correction exponent, small-ball probabilities, and the conditional law of the
argmin location.
"""

from .exceptions import (
    CertificateError,
    ClosedFormError,
    ConfigError,
    DomainError,
    EstimationError,
    FactorizationError,
    GaussminError,
    GridMismatchError,
    NotPositiveSemidefiniteError,
    OptimizerError,
)
from .grids import MAX_LEVEL, DyadicGrid, PointGrid, as_points, require_same_grid, same_grid
from .kernels import (
    ExplicitGram,
    Kernel,
    ModulatedBrownian,
    OrnsteinUhlenbeck,
    PowerExponential,
    PowerScale,
    ScaleFunction,
    ShiftedRootScale,
    TabulatedScale,
    constant_scale,
)
from .measure import (
    DensityPart,
    GridMeasure,
    MixedMeasure,
    NegGGForm,
    PowerForm,
    TabulatedForm,
    UniformForm,
    density_floor,
    discretize,
    energy,
    mean_function,
    normalize,
    tv_distance,
    wasserstein1,
)
from .optimizer import (
    CertificateReport,
    OptimalSolution,
    RefinementEntry,
    RefinementTrace,
    certify,
    refine,
    solve_simplex_qp,
    solve_theta,
)
from .closedform import (
    TbmResult,
    ou_measure,
    ou_sigma_star_sq,
    power_law_measure,
    sigma_star_from_mu,
    tbm_measure,
)
from .gauss_sim import (
    Factorization,
    PathBatch,
    PathFunctionals,
    SamplerConfig,
    factorize,
    functionals,
    iter_batches,
    sample,
    standard_normals,
)
from .estimators import (
    CorrectionDiagnostic,
    Estimate,
    argmin_conditional,
    correction_diagnostic,
    fit_correction_exponent,
    mx_conditional,
    small_ball,
    tail_crude,
    tail_is,
)

__version__ = "1.0.0"

__all__ = [
    "CertificateError",
    "CertificateReport",
    "ClosedFormError",
    "ConfigError",
    "CorrectionDiagnostic",
    "DensityPart",
    "DomainError",
    "DyadicGrid",
    "Estimate",
    "EstimationError",
    "ExplicitGram",
    "Factorization",
    "FactorizationError",
    "GaussminError",
    "GridMeasure",
    "GridMismatchError",
    "Kernel",
    "MAX_LEVEL",
    "MixedMeasure",
    "ModulatedBrownian",
    "NegGGForm",
    "NotPositiveSemidefiniteError",
    "OptimalSolution",
    "OptimizerError",
    "OrnsteinUhlenbeck",
    "PathBatch",
    "PathFunctionals",
    "PointGrid",
    "PowerExponential",
    "PowerForm",
    "PowerScale",
    "RefinementEntry",
    "RefinementTrace",
    "SamplerConfig",
    "ScaleFunction",
    "ShiftedRootScale",
    "TabulatedForm",
    "TabulatedScale",
    "TbmResult",
    "UniformForm",
    "argmin_conditional",
    "as_points",
    "certify",
    "constant_scale",
    "correction_diagnostic",
    "density_floor",
    "discretize",
    "energy",
    "factorize",
    "fit_correction_exponent",
    "functionals",
    "iter_batches",
    "mean_function",
    "mx_conditional",
    "normalize",
    "ou_measure",
    "ou_sigma_star_sq",
    "power_law_measure",
    "refine",
    "require_same_grid",
    "same_grid",
    "sample",
    "sigma_star_from_mu",
    "small_ball",
    "solve_simplex_qp",
    "solve_theta",
    "standard_normals",
    "tail_crude",
    "tail_is",
    "tbm_measure",
    "tv_distance",
    "wasserstein1",
]
