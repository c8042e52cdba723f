"""Certified one-shot work extraction and formation when the equilibrium state is uncertain."""

__version__ = "0.1.0"

from .asymptotics import exponent_and_rates, irreversibility_example, optimal_error_at_rate  # noqa: E402
from .channels import ChannelSpec, verify_channel  # noqa: E402
from .divergences import (  # noqa: E402
    DivergenceResult,
    d_max,
    d_max_pair,
    d_max_segment,
    d_min,
    d_min_constrained,
    hoeffding,
    umegaki,
)
from .errors import (  # noqa: E402
    UncertainThermoError,
    OperatorError,
    NotSquare,
    NotHermitian,
    NotPSD,
    TraceMismatch,
    DimMismatch,
    DimTooLarge,
    DomainError,
    BadParameter,
    GridTooCoarse,
    SolverFailure,
    IllConditioned,
    MaxIter,
    BackendUnavailable,
    VerificationFailed,
    SchemaError,
)
from .gibbs import battery_gibbs, gibbs_from_hamiltonian  # noqa: E402
from .operators import DensityOperator, HermitianOperator, make_density, trace_distance  # noqa: E402
from .reporting import JobConfig, load_config, run_job, run_sweep  # noqa: E402
from .sets import Hull, Sampler, StateSet, conv_aff_intersection  # noqa: E402
from .solver import SdpProblem, SolveCertificate, record_certificates, solve_lp  # noqa: E402
from .tasks import (  # noqa: E402
    Battery,
    Verdict,
    dirty_truncation_nogo,
    extractable_work,
    formation_cost,
    formation_lower_bound,
    nogo_purification,
    truncation,
)

__all__ = [
    "__version__",
    "exponent_and_rates",
    "irreversibility_example",
    "optimal_error_at_rate",
    "ChannelSpec",
    "verify_channel",
    "DivergenceResult",
    "d_max",
    "d_max_pair",
    "d_max_segment",
    "d_min",
    "d_min_constrained",
    "hoeffding",
    "umegaki",
    "UncertainThermoError",
    "OperatorError",
    "NotSquare",
    "NotHermitian",
    "NotPSD",
    "TraceMismatch",
    "DimMismatch",
    "DimTooLarge",
    "DomainError",
    "BadParameter",
    "GridTooCoarse",
    "SolverFailure",
    "IllConditioned",
    "MaxIter",
    "BackendUnavailable",
    "VerificationFailed",
    "SchemaError",
    "battery_gibbs",
    "gibbs_from_hamiltonian",
    "DensityOperator",
    "HermitianOperator",
    "make_density",
    "trace_distance",
    "JobConfig",
    "load_config",
    "run_job",
    "run_sweep",
    "Hull",
    "Sampler",
    "StateSet",
    "conv_aff_intersection",
    "SdpProblem",
    "SolveCertificate",
    "record_certificates",
    "solve_lp",
    "Battery",
    "Verdict",
    "dirty_truncation_nogo",
    "extractable_work",
    "formation_cost",
    "formation_lower_bound",
    "nogo_purification",
    "truncation",
]
