"""Two-stage user stance labeling.

Stage one propagates clamped hashtag side values through a user-hashtag
bipartite graph to produce seed users. Stage two trains a two-layer
graph convolutional classifier on the user-user interaction graph with
those seeds, and a dual-threshold grid search turns probabilities into
pro / anti / undecided labels.
"""

from .bipartite import (
    BipartiteGraph,
    BipartiteLabelPropagation,
    PropagationResult,
    build_bipartite,
    load_seed_hashtags,
    propagate,
    select_seed_users,
)
from .features import (
    HashedTextVectorizer,
    concatenated_texts,
    extract_features,
    hash_text,
    read_external_embeddings,
)
from .gcn import (
    GcnModel,
    GcnStanceClassifier,
    TrainTrace,
    gcn_forward,
    gcn_loss_and_grads,
    gcn_train,
    normalize_adjacency,
    read_model,
    split_seeds,
    write_model,
)
from .thresholds import (
    ANTI,
    PRO,
    UNDECIDED,
    StanceAssignment,
    ThresholdCalibrator,
    ThresholdPair,
    assign_stances,
    calibrate_thresholds,
    classify_probability,
    macro_f1,
    read_stances,
    stance_map,
    write_stances,
)

__all__ = [
    "ANTI",
    "PRO",
    "UNDECIDED",
    "BipartiteGraph",
    "BipartiteLabelPropagation",
    "GcnModel",
    "GcnStanceClassifier",
    "HashedTextVectorizer",
    "PropagationResult",
    "StanceAssignment",
    "ThresholdCalibrator",
    "ThresholdPair",
    "TrainTrace",
    "assign_stances",
    "build_bipartite",
    "calibrate_thresholds",
    "classify_probability",
    "concatenated_texts",
    "extract_features",
    "gcn_forward",
    "gcn_loss_and_grads",
    "gcn_train",
    "hash_text",
    "load_seed_hashtags",
    "macro_f1",
    "normalize_adjacency",
    "propagate",
    "read_external_embeddings",
    "read_model",
    "read_stances",
    "select_seed_users",
    "split_seeds",
    "stance_map",
    "write_model",
    "write_stances",
]
