"""Summary scoring that blends n-gram recall with graph-walk semantics."""

from .graph import (
    Dictionary,
    ParseError,
    SemanticGraph,
    SenseId,
    load_dictionary,
    load_graph,
    senses_of,
)
from .ppr import (
    PprConfig,
    PprEngine,
    PprVector,
    SeedSet,
    compute_ppr,
    ppr_for_sense,
    ppr_for_sense_set,
)
from .similarity import RankedVector, insert_oov, sim_sem, to_ranked, weighted_overlap
from .disambiguation import (
    SenseAssignment,
    WordType,
    align_disambiguate,
    build_word_types,
    disambiguate_pair,
)
from .text import SummaryText, stem, stopwords, tokenize
from .rouge import (
    BOS_MARKER,
    MatchState,
    NGram,
    NGramMultiset,
    count_match,
    extract_ngrams,
    extract_su4,
    rouge_score,
)
from .scorer import (
    ALL_VARIANTS,
    GrougeConfig,
    ScoreParts,
    ScoreReport,
    gram_signature,
    grouge_parts,
    grouge_score,
    peer_signature,
    score_batch,
    sim_ls,
)
from .stats import (
    CorrelationReport,
    JudgmentTable,
    WilliamsResult,
    bootstrap_ci,
    correlate,
    kendall,
    pearson,
    spearman,
    williams_test,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_VARIANTS",
    "BOS_MARKER",
    "CorrelationReport",
    "Dictionary",
    "GrougeConfig",
    "JudgmentTable",
    "MatchState",
    "NGram",
    "NGramMultiset",
    "ParseError",
    "PprConfig",
    "PprEngine",
    "PprVector",
    "RankedVector",
    "ScoreParts",
    "ScoreReport",
    "SeedSet",
    "SemanticGraph",
    "SenseAssignment",
    "SenseId",
    "SummaryText",
    "WilliamsResult",
    "WordType",
    "align_disambiguate",
    "bootstrap_ci",
    "build_word_types",
    "compute_ppr",
    "correlate",
    "count_match",
    "disambiguate_pair",
    "extract_ngrams",
    "extract_su4",
    "gram_signature",
    "grouge_parts",
    "grouge_score",
    "insert_oov",
    "kendall",
    "load_dictionary",
    "load_graph",
    "pearson",
    "peer_signature",
    "ppr_for_sense",
    "ppr_for_sense_set",
    "rouge_score",
    "score_batch",
    "senses_of",
    "sim_ls",
    "sim_sem",
    "spearman",
    "stem",
    "stopwords",
    "to_ranked",
    "tokenize",
    "weighted_overlap",
    "williams_test",
]
