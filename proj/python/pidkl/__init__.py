"""Two-stage Bayesian inference of linear PDE coefficients with a
physics-informed deep-kernel GP surrogate."""

from ._core import (
    Domain,
    FeatureMap,
    MarginalSummary,
    ObservationSet,
    PredictiveField,
    PretrainReport,
    ProblemSpec,
    SampleChain,
    bma_predict,
    decomposed_loglik,
    generate_observations,
    identity_feature_map,
    joint_nlml,
    make_problem,
    marginal_stats,
    run_experiment,
    run_hmc,
    run_pretraining,
    sample_interior,
)

__all__ = [
    "Domain",
    "FeatureMap",
    "MarginalSummary",
    "ObservationSet",
    "PredictiveField",
    "PretrainReport",
    "ProblemSpec",
    "SampleChain",
    "bma_predict",
    "decomposed_loglik",
    "generate_observations",
    "identity_feature_map",
    "joint_nlml",
    "make_problem",
    "marginal_stats",
    "run_experiment",
    "run_hmc",
    "run_pretraining",
    "sample_interior",
]
