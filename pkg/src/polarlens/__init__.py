"""polarlens: directional E/I-index polarization analysis of conversation
corpora, with two-stage stance labeling and counterfactual
conversation-removal effects."""

from .corpus import (
    Conversation,
    InfluencerRecord,
    Tweet,
    assemble_conversations,
    filter_conversations,
    parse_corpus,
    rank_influencers,
)
from .counterfactual import (
    CounterfactualResult,
    InfluencerImpactSummary,
    batch_effects,
    conversation_effect,
    summarize_influencer,
    summarize_stance_group,
)
from .graph import (
    InteractionEdge,
    InteractionGraph,
    build_graph,
    daily_slice,
    influencer_subgraph,
    remove_conversation,
)
from .polarization import PolarizationScore, both_directions, daily_timeline, ei_index
from .sentiment import (
    Lexicon,
    SentimentRecord,
    classify_valence,
    default_lexicon,
    merge_external_scores,
    score_text,
)
from .synth import SynthConfig, generate_corpus, oracle_delta, oracle_ei

__version__ = "0.1.0"

__all__ = [
    "Conversation",
    "CounterfactualResult",
    "InfluencerImpactSummary",
    "InfluencerRecord",
    "InteractionEdge",
    "InteractionGraph",
    "Lexicon",
    "PolarizationScore",
    "SentimentRecord",
    "SynthConfig",
    "Tweet",
    "assemble_conversations",
    "batch_effects",
    "both_directions",
    "build_graph",
    "classify_valence",
    "conversation_effect",
    "daily_slice",
    "daily_timeline",
    "default_lexicon",
    "ei_index",
    "filter_conversations",
    "generate_corpus",
    "influencer_subgraph",
    "merge_external_scores",
    "oracle_delta",
    "oracle_ei",
    "parse_corpus",
    "rank_influencers",
    "remove_conversation",
    "score_text",
    "summarize_influencer",
    "summarize_stance_group",
]
