"""Generative simulation and collapsed Gibbs inference for text-bearing
information cascades on a social graph, with a hidden Markov chain over the
topics along each diffusion path."""

from .core import (
    SPONTANEOUS,
    Dataset,
    EdgeGroupKey,
    EdgeGrouping,
    Event,
    Hyperparameters,
    ModelParameters,
    Network,
    ObservationWindow,
    Violation,
    edge_group_key,
    exp_kernel,
    impulse_response,
    validate_dataset,
)
from .generator import (
    GeneratorConfig,
    SemiSynthRecipe,
    build_circular_network,
    estimate_semisynth_parameters,
    fit_semisynth_model,
    generate_cascades,
    generate_documents,
    heuristic_parent_assignment,
    sample_children,
    sample_model_parameters,
    sample_spontaneous_events,
)
from .sampler import (
    CountStatistics,
    InferenceResult,
    Mode,
    SamplerConfig,
    SamplerState,
    counts_consistent,
    estimate_parameters,
    gibbs_sweep,
    initialize_state,
    parent_candidates,
    parent_conditional,
    recount,
    run_gibbs,
    state_from_assignments,
    topic_conditional,
    update_base_rates,
    update_edge_strengths,
)
from .likelihood import (
    LikelihoodReport,
    assignments_from_dataset,
    heldout_log_likelihood,
    joint_log_likelihood,
)
from .evaluation import (
    EvalReport,
    children_counts,
    evaluate,
    network_error,
    parent_metrics,
    resolve_edge_strengths,
    topic_pair_metrics,
)
from .topic_analysis import (
    TopicGraph,
    asymmetric_pairs,
    gini_coefficient,
    hits_scores,
    personalized_pagerank,
    ppr_distribution,
    top_words_per_topic,
)

__version__ = "0.1.0"
