"""Mean-field simulation and inequality verification for 1D log-gases."""

__version__ = "0.1.0"

from .constants import (
    BetaStarEqResult,
    RateConstants,
    beta_star,
    beta_star_eq,
    certified_rate,
    lambda_rate,
    moment_bound_general,
    moment_bound_quartic,
    nonconfining_support_bound,
)
from .dynamics import (
    NearCollisionError,
    SimulationConfig,
    SupportEscapeError,
    Trajectory,
    simulate,
    step,
    velocity_field,
)
from .equilibrium import (
    EquilibriumDensity,
    cauchy_transform,
    confining_equilibrium,
    nonconfining_equilibrium,
)
from .functionals import (
    FunctionalReport,
    entropy_density,
    entropy_discrete,
    fisher_discrete,
    hilbert_density,
    hilbert_discrete,
    hilbert_discrete_all,
    relative_entropy,
)
from .measures import (
    ParticleEnsemble,
    QuantileFunction,
    ensemble_from_unsorted,
    moment,
    symmetrize,
    w2,
    w2_to_density,
)
from .potentials import (
    PerturbedPotential,
    Potential,
    convexity_profile,
    evaluate,
    general_even,
    perturbation_norm,
    quartic_confining,
    quartic_nonconfining,
)
from .verifier import (
    CheckRecord,
    VerificationReport,
    check_hwi,
    check_logsob,
    check_transport,
    fit_exponential_rate,
    verify_convergence,
)
