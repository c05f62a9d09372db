"""Anti-concentration toolkit: concentration functions of weighted sums,
arithmetic-progression coverage functionals, least common denominators, and
the bound evaluators that tie them together."""

from .bounds import (
    BoundReport,
    ConstantsConfig,
    InversePrincipleReport,
    build_bound_report,
    inverse_principle_report,
    verify_pointwise_chain,
)
from .concentration import (
    ConcentrationEstimate,
    WeightVector,
    esseen_upper_q,
    exact_q_1d,
    exact_q_multid,
    mc_q,
    regularity_check,
    weighted_sum_distribution,
)
from .distributions import (
    CompoundPoisson,
    DiscreteDistribution,
    RngSeed,
    lambda_d,
    spectral_measure,
    symmetrize,
    tail_mass,
    truncated_second_moment,
)
from .errors import (
    AnticoncError,
    CapacityError,
    ChainViolationError,
    ClassCapError,
    DomainError,
    InputError,
    NumericsError,
)
from .lcd import LcdParams, LcdResult, compute_lcd
from .progressions import Cgap, ConvexBody, Gap, beta_rm, gamma_rs, uncovered_mass

__version__ = "0.1.0"

__all__ = [
    "AnticoncError",
    "BoundReport",
    "CapacityError",
    "Cgap",
    "ChainViolationError",
    "ClassCapError",
    "CompoundPoisson",
    "ConcentrationEstimate",
    "ConstantsConfig",
    "ConvexBody",
    "DiscreteDistribution",
    "DomainError",
    "Gap",
    "InputError",
    "InversePrincipleReport",
    "LcdParams",
    "LcdResult",
    "NumericsError",
    "RngSeed",
    "WeightVector",
    "beta_rm",
    "build_bound_report",
    "compute_lcd",
    "esseen_upper_q",
    "exact_q_1d",
    "exact_q_multid",
    "gamma_rs",
    "inverse_principle_report",
    "lambda_d",
    "mc_q",
    "regularity_check",
    "spectral_measure",
    "symmetrize",
    "tail_mass",
    "truncated_second_moment",
    "uncovered_mass",
    "verify_pointwise_chain",
    "weighted_sum_distribution",
    "__version__",
]
