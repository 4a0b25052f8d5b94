"""robagg — robust aggregation of beliefs and tastes on finite state spaces.

A planner facing several advisors, each with a reference probability model
and a statistical neighborhood of it, wants one number per act: the
worst-case penalized value. This package provides the pieces: finite
simplex primitives, divergence families (KL, phi, Renyi-type rho,
Bregman), credence balls and their intersections (witness points, Chernoff
centers), penalized worst-case criteria (multiplier, constraint,
variational), act-dependent belief aggregation with recovered mixture
weights, and end-to-end worked applications behind a scenario-file CLI.

Everything is deterministic; randomness appears only in the demo commands
through explicit seeds.
"""

from .errors import (
    AbsoluteContinuityFailure,
    AllZero,
    BracketFailure,
    DimensionMismatch,
    DomainError,
    EmptyIntersection,
    EmptyList,
    InconsistentInputs,
    InfeasibleError,
    InputError,
    NegativeMass,
    NoConvergence,
    NoFosdOrder,
    NonConcaveDetected,
    NoRoot,
    RhoOutOfRange,
    RobaggError,
    SchemaError,
    SolverDiverged,
    SolverError,
    TargetOutOfRange,
    TooFewSignals,
    UnknownAct,
    UnknownOutcome,
    WeightSumError,
)
from .simplex import (
    Dist,
    FosdOrder,
    StateSpace,
    StateVector,
    convex_combine,
    expectation,
    fosd_compare,
    normalize,
    shannon_entropy,
)
from .divergences import (
    BUILTIN_GENERATORS,
    BUILTIN_PHI_SPECS,
    CHI2_PHI,
    HALF_SQNORM,
    KL_PHI,
    NEG_ENTROPY,
    BregmanGenerator,
    PhiSpec,
    bregman,
    kl,
    phi_divergence,
    rho_divergence,
)
from .balls import (
    Ball,
    ChernoffResult,
    Rho,
    WitnessResult,
    ball_contains,
    chernoff_point,
    hull_witness,
    intersection_contains,
)
from .criteria import (
    BallIntersection,
    FiniteSet,
    HullOfFinite,
    Planner,
    Singleton,
    StructuredSet,
    certainty_equivalent_exponential,
    entropic_value,
    mba_value,
    meu_value,
    multiplier_value,
    phi_lambda,
    phi_lambda_inv,
    variational_phi_value,
    worst_case_tilt,
)
from .aggregation import (
    ActFamily,
    Agent,
    PolicyResult,
    Profile,
    SocialBeliefResult,
    TruthProjection,
    barycenter,
    fit_gap,
    kl_project_to_intersection,
    optimal_policy,
    pythagorean_gap,
    rho_aggregate,
    social_belief_for_act,
    social_utility,
    weight_sensitivity,
    welfare_dominant_belief,
)
from .scenarios import (
    COMMANDS,
    SCENARIO_VERSION,
    AsdfResult,
    DictatorReport,
    EllsbergReport,
    EstimateResult,
    EstimationInput,
    InvarianceReport,
    ScenarioFile,
    asdf,
    demo_dictator,
    demo_invariance,
    ellsberg_run,
    estimate_parameters,
    estimation_forward_model,
    james_stein_wle,
    load_scenario,
    sdf_project,
    treatment_solve,
)

__version__ = "0.1.0"

__all__ = [
    # errors
    "RobaggError", "InputError", "SolverError", "InfeasibleError",
    "SchemaError", "DimensionMismatch", "AllZero", "NegativeMass",
    "WeightSumError", "EmptyList", "RhoOutOfRange", "DomainError",
    "UnknownAct", "UnknownOutcome", "TooFewSignals", "InconsistentInputs",
    "SolverDiverged", "NoConvergence", "BracketFailure", "NoRoot",
    "NonConcaveDetected", "EmptyIntersection", "AbsoluteContinuityFailure",
    "NoFosdOrder", "TargetOutOfRange",
    # simplex
    "StateSpace", "Dist", "StateVector", "FosdOrder", "normalize",
    "expectation", "shannon_entropy", "fosd_compare", "convex_combine",
    # divergences
    "PhiSpec", "BregmanGenerator", "KL_PHI", "CHI2_PHI", "NEG_ENTROPY",
    "HALF_SQNORM", "kl", "phi_divergence", "rho_divergence", "bregman",
    "BUILTIN_PHI_SPECS", "BUILTIN_GENERATORS", "SCENARIO_VERSION", "COMMANDS",
    # balls
    "Rho", "Ball", "WitnessResult", "ChernoffResult", "ball_contains",
    "intersection_contains", "hull_witness", "chernoff_point",
    # criteria
    "phi_lambda", "phi_lambda_inv", "multiplier_value", "worst_case_tilt",
    "certainty_equivalent_exponential", "StructuredSet", "Singleton",
    "FiniteSet", "HullOfFinite", "BallIntersection", "meu_value",
    "entropic_value", "variational_phi_value", "mba_value", "Planner",
    # aggregation
    "Agent", "Profile", "social_utility", "SocialBeliefResult",
    "social_belief_for_act", "TruthProjection", "kl_project_to_intersection",
    "pythagorean_gap", "barycenter", "fit_gap", "weight_sensitivity",
    "welfare_dominant_belief", "rho_aggregate", "ActFamily", "PolicyResult",
    "optimal_policy",
    # scenarios
    "ScenarioFile", "load_scenario", "treatment_solve", "EllsbergReport",
    "ellsberg_run", "EstimationInput", "EstimateResult",
    "estimate_parameters", "estimation_forward_model", "AsdfResult", "asdf",
    "sdf_project", "james_stein_wle", "InvarianceReport", "demo_invariance",
    "DictatorReport", "demo_dictator",
]
