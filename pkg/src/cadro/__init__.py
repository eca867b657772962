"""Cost-aware distributionally robust optimization over finite supports."""

from .ambiguity import (
    CadroSet,
    EmptyAmbiguitySetError,
    FullSimplex,
    KlBall,
    TvBall,
    WBall,
    contains,
    kl_radius,
    tv_radius,
    w_radius,
    worst_case,
)
from .bounds import BoundKind, GammaMode, MeanBoundSpec, mean_bound
from .core import (
    AffineCostModel,
    CostModel,
    Dataset,
    ProbVector,
    RngStream,
    RunResult,
    empirical_distribution,
    expected_cost,
    sample_dataset,
    split_dataset,
)
from .facility import FacilityInstance, FacilityModel, generate_instance
from .pipeline import (
    Method,
    PipelineConfig,
    cadro_run,
    d_dro_run,
    robust_run,
    saa_certified_run,
    tau,
)
from .solver import (
    SolverConfig,
    minimize_cadro_joint,
    minimize_dro,
    minimize_expected,
    minimize_robust,
)

__version__ = "0.1.0"
