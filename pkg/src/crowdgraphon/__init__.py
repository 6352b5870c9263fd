"""Crowdsourced label aggregation simulators, the two-stage cluster-then-vote
estimator, closed-form minimax lower bounds, and the reduction of response
matrices to symmetric latent-variable matrix estimation."""

from .assignment import (
    Assignment,
    InsufficientClusterError,
    TwoStageDesign,
    queries_per_task,
    stage1_assignment,
    stage2_assignment,
    uniform_assignment,
)
from .estimators import (
    ClusterPartition,
    cluster_workers,
    error_rate,
    majority_vote,
    majority_vote_all,
    ml_oracle,
    plugin_column_sum,
    plugin_max_entry,
    two_stage_estimate,
    two_stage_estimate_all,
    zero_imputed_matrix,
)
from .experiments import (
    ExperimentConfig,
    TrialRecord,
    run_clustering_recovery_experiment,
    run_tradeoff_experiment,
)
from .graphon import (
    EigenSystem,
    GraphonSample,
    GraphonSpec,
    build_graphon,
    eigensystem,
    embed_crowd_matrix,
    eval_f,
    mse,
    sample_graphon_matrix,
    verify_spectral,
)
from .model import (
    CrowdModel,
    DawidSkene,
    Difficulty,
    DType,
    Monotone,
    ResponseMatrix,
    SpammerHammer,
    TrueAnswers,
    bernoulli_answers,
    bernoulli_hammers,
    expected_response,
    sample_responses,
    skill,
    uniform_types,
)
from .theory import (
    BoundReport,
    TwoStageSchedule,
    spammer_hammer_lower_bounds,
    mv_chernoff_bound,
    mv_queries_needed,
    same_type_match_prob,
    two_stage_schedule,
    amplitude_lower_bounds,
    eigenvalue_lower_bounds,
)

__version__ = "0.1.0"
