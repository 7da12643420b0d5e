"""Physics-informed linear models on cubic B-spline bases.

Solutions of linear ODEs/PDEs are represented as spline expansions whose
residual penalties integrate exactly, giving closed-form penalized
least-squares fits, profile-likelihood coefficient estimation, and
marginal-likelihood regularization selection, with a geodetic strain-rate
application on top.
"""

from .bayes import (
    HybridSurface,
    MarginalLikelihoodResult,
    abic,
    hybrid_surface,
    ll_curve,
    log_marginal_likelihood,
    optimize_alpha,
)
from .errors import (
    InsufficientDataError,
    PilmError,
    StationFileError,
    UnderdeterminedSystemError,
)
from .inverse import (
    ProfilePoint,
    ProfileProblem,
    diffusion_profile_problem,
    oscillator_profile_problem,
    profile_curve,
    profile_minimum,
)
from .penalties import (
    PenaltyMatrix,
    ResidualTerm,
    assemble_penalty,
    combine,
    diffusion_penalty,
    elasticity_penalty,
    ode_penalty,
    smoothness_penalty,
)
from .solver import (
    ObservationSystem,
    PilmFit,
    evaluate,
    evaluate_expansion,
    ic_system,
    point_system,
    solve,
)
from .splines import BSplineBasis1D, IntegralMatrixSet, eval_reference
from .strain import (
    Region,
    StationSet,
    StrainRateGrid,
    build_problem,
    load_stations,
    strain_rates,
)
from .synthetic import (
    damped_oscillator_solution,
    diffusion_dataset,
    diffusion_reference,
    oscillator_measurements,
    synthetic_velocity_field,
    write_synthetic_station_table,
)

__version__ = "0.1.0"

__all__ = [
    "BSplineBasis1D",
    "HybridSurface",
    "InsufficientDataError",
    "IntegralMatrixSet",
    "MarginalLikelihoodResult",
    "ObservationSystem",
    "PenaltyMatrix",
    "PilmError",
    "PilmFit",
    "ProfilePoint",
    "ProfileProblem",
    "Region",
    "ResidualTerm",
    "StationFileError",
    "StationSet",
    "StrainRateGrid",
    "UnderdeterminedSystemError",
    "abic",
    "assemble_penalty",
    "build_problem",
    "combine",
    "damped_oscillator_solution",
    "diffusion_dataset",
    "diffusion_penalty",
    "diffusion_profile_problem",
    "diffusion_reference",
    "elasticity_penalty",
    "eval_reference",
    "evaluate",
    "evaluate_expansion",
    "hybrid_surface",
    "ic_system",
    "ll_curve",
    "load_stations",
    "log_marginal_likelihood",
    "ode_penalty",
    "optimize_alpha",
    "oscillator_measurements",
    "oscillator_profile_problem",
    "point_system",
    "profile_curve",
    "profile_minimum",
    "smoothness_penalty",
    "solve",
    "strain_rates",
    "synthetic_velocity_field",
    "write_synthetic_station_table",
]
