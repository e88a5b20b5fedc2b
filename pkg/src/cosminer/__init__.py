"""cosminer: zero-shot outcome taxonomy classification and core-outcome mining.

Pipeline: normalize free-text trial outcomes, tokenize them with a greedy
longest-match word-piece vocabulary, embed via a TSV vector store or a
deterministic seeded reference embedder, rank taxonomy labels by cosine
similarity (exactly one assignment per outcome), analyze per-class
clusters, and mine recurring near-identical outcomes per class with
Jaccard grouping.
"""

from .classify import (
    CorpusClassification,
    CosineTaxonomyClassifier,
    LabelEmbeddingSet,
    RankedClassification,
    UntrainedSoftmaxHead,
    assign,
    build_label_embeddings,
    classify_corpus,
    cosine,
    rank_labels,
    softmax_head,
)
from .cluster import (
    AttentionProfile,
    ClusterStats,
    PowerIterationPCA,
    attention_cls_profile,
    cluster_stats,
    euclidean,
    outlier_scores,
    pca_project,
)
from .corpus import (
    CORE5_LABELS,
    SMITH15_LABELS,
    OutcomeRecord,
    RejectedRow,
    TaxonomyDef,
    load_outcomes,
    load_taxonomy,
    normalize_text,
)
from .embedding import (
    DEFAULT_DIM,
    EmbeddingStore,
    ReferenceEmbedder,
    embed_text,
    load_store,
    pool,
    reference_embed,
    save_store,
)
from .mining import (
    CoreOutcomeCandidate,
    jaccard,
    mine_candidates,
    pairwise_jaccard,
    token_set,
)
from .wordpiece import (
    FragmentationReport,
    TokenSequence,
    Vocabulary,
    fragmentation_report,
    load_vocab,
    tokenize,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "AttentionProfile",
    "ClusterStats",
    "CORE5_LABELS",
    "CoreOutcomeCandidate",
    "CorpusClassification",
    "CosineTaxonomyClassifier",
    "DEFAULT_DIM",
    "EmbeddingStore",
    "FragmentationReport",
    "LabelEmbeddingSet",
    "OutcomeRecord",
    "PowerIterationPCA",
    "RankedClassification",
    "ReferenceEmbedder",
    "RejectedRow",
    "SMITH15_LABELS",
    "TaxonomyDef",
    "TokenSequence",
    "UntrainedSoftmaxHead",
    "Vocabulary",
    "assign",
    "attention_cls_profile",
    "build_label_embeddings",
    "classify_corpus",
    "cluster_stats",
    "cosine",
    "embed_text",
    "errors",
    "euclidean",
    "fragmentation_report",
    "jaccard",
    "load_outcomes",
    "load_store",
    "load_taxonomy",
    "load_vocab",
    "mine_candidates",
    "normalize_text",
    "outlier_scores",
    "pairwise_jaccard",
    "pca_project",
    "pool",
    "rank_labels",
    "reference_embed",
    "save_store",
    "softmax_head",
    "token_set",
    "tokenize",
]
