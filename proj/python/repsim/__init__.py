"""Representational similarity for neural-network activations.

Thin Python surface over the C++ core: CCA, projection-weighted CCA
(PWCCA), SVCCA preprocessing, Bartlett significance testing, cosine and
Euclidean baselines, toy generators and clustering.

Activation matrices are 2-D float64 numpy arrays with one row per neuron
and one column per datapoint.
"""

from repsim._repsim import (
    CcaResult,
    RepsimError,
    agglomerative_cluster,
    bartlett_cca_distance,
    bartlett_statistic,
    cca,
    chi_squared_sf,
    cosine_distance,
    estimate_significant_correlations,
    euclidean_distance,
    group_by_sequence_step,
    load_activations,
    make_dataset,
    make_signal_noise_pair,
    mean_cca_distance,
    pairwise_distance_matrix,
    pearson_correlation,
    projection_weights,
    pwcca_distance,
    random_rotation,
    save_activations,
    simulate_blended_rnn,
    simulate_rotation_rnn,
    subsample_rows,
    svcca_preprocess,
    timestep_distance_profile,
    train_mlp,
)

__all__ = [
    "CcaResult",
    "RepsimError",
    "agglomerative_cluster",
    "bartlett_cca_distance",
    "bartlett_statistic",
    "cca",
    "chi_squared_sf",
    "cosine_distance",
    "estimate_significant_correlations",
    "euclidean_distance",
    "group_by_sequence_step",
    "load_activations",
    "make_dataset",
    "make_signal_noise_pair",
    "mean_cca_distance",
    "pairwise_distance_matrix",
    "pearson_correlation",
    "projection_weights",
    "pwcca_distance",
    "random_rotation",
    "save_activations",
    "simulate_blended_rnn",
    "simulate_rotation_rnn",
    "subsample_rows",
    "svcca_preprocess",
    "timestep_distance_profile",
    "train_mlp",
]
