"""Open quantum random walks: channel structure, asymptotics, simulation."""

from .asymptotics import (
    GaussianComponent,
    MixtureModel,
    RateEvaluation,
    clt_mixture,
    diffusion,
    drift,
    empirical_mean_limit,
    lambda_derivatives,
    lambda_split_check,
    legendre,
    log_lambda,
    poisson_solve,
    rate_function,
)
from .channel import ChannelView, PerronData, WalkModel, apply, apply_dual, perron, to_matrix, validate
from .empirics import (
    DistanceReport,
    EmpiricalLaw1D,
    histogram,
    ldp_estimate,
    mixture_cdf,
    rescale,
    w1_distance,
)
from .linalg import (
    Projector,
    Subspace,
    eig_dominant,
    eig_hermitian,
    orthonormal_complement,
    solve_linear,
    support_projection,
)
from .simulate import (
    SimConfig,
    TrajectoryEnsemble,
    TrajectoryState,
    classify_absorption,
    martingale_check,
    run,
    sample_initial,
    step,
)
from .structure import (
    AbsorptionOperator,
    Block,
    DiagonalState,
    SpaceDecomposition,
    absorption,
    decompose,
    invariant_operators,
    reachable_space,
    recurrent_space,
    weights,
)

__all__ = [
    "AbsorptionOperator",
    "Block",
    "ChannelView",
    "DiagonalState",
    "DistanceReport",
    "EmpiricalLaw1D",
    "GaussianComponent",
    "MixtureModel",
    "PerronData",
    "Projector",
    "RateEvaluation",
    "SimConfig",
    "SpaceDecomposition",
    "Subspace",
    "TrajectoryEnsemble",
    "TrajectoryState",
    "WalkModel",
    "absorption",
    "apply",
    "apply_dual",
    "classify_absorption",
    "clt_mixture",
    "decompose",
    "diffusion",
    "drift",
    "eig_dominant",
    "eig_hermitian",
    "empirical_mean_limit",
    "histogram",
    "invariant_operators",
    "lambda_derivatives",
    "lambda_split_check",
    "ldp_estimate",
    "legendre",
    "log_lambda",
    "martingale_check",
    "mixture_cdf",
    "orthonormal_complement",
    "perron",
    "poisson_solve",
    "rate_function",
    "reachable_space",
    "recurrent_space",
    "rescale",
    "run",
    "sample_initial",
    "solve_linear",
    "step",
    "support_projection",
    "to_matrix",
    "validate",
    "w1_distance",
    "weights",
]

__version__ = "0.1.0"
