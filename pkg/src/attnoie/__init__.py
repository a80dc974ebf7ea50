"""Zero-shot open information extraction from transformer attention matrices."""

__version__ = "0.1.0"

from .model import (
    L2R,
    R2L,
    ChunkSpan,
    Extraction,
    ExtractionConfig,
    SentenceBundle,
    WordAttentionMatrix,
    validate_bundle,
)
from .beam_search import association, beam_search_pair, extract_sentence
from .filters import check_contiguity, filter_by_frequency, normalize_predicate
from .metrics import (
    GoldTriple,
    MatchReport,
    PRPoint,
    auc_and_best_f1,
    exact_match,
    lexical_match,
    score_corpus,
    tuple_match,
)
from .mapping import (
    CooccurrenceTable,
    PredicateMapping,
    accumulate_cooccurrence,
    bootstrap_mapping,
    pmi2,
)
from .kg_align import KGStore, MentionDictionary, align_distant, link_mentions

__all__ = [
    "L2R",
    "R2L",
    "ChunkSpan",
    "CooccurrenceTable",
    "Extraction",
    "ExtractionConfig",
    "GoldTriple",
    "KGStore",
    "MatchReport",
    "MentionDictionary",
    "PRPoint",
    "PredicateMapping",
    "SentenceBundle",
    "WordAttentionMatrix",
    "accumulate_cooccurrence",
    "align_distant",
    "association",
    "auc_and_best_f1",
    "beam_search_pair",
    "bootstrap_mapping",
    "check_contiguity",
    "exact_match",
    "extract_sentence",
    "filter_by_frequency",
    "lexical_match",
    "link_mentions",
    "normalize_predicate",
    "pmi2",
    "score_corpus",
    "tuple_match",
    "validate_bundle",
]
