"""Cosine ranking of taxonomy labels per outcome, and the softmax baseline.

Every outcome receives exactly one label: the taxonomy label whose
embedding has the highest cosine similarity to the outcome's pooled
embedding (one-vs-rest argmax). Exact similarity ties resolve to the
earlier taxonomy label. Assignments whose top-two similarity margin falls
below a review threshold are flagged for expert review instead of being
silently trusted.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import OutcomeRecord, TaxonomyDef, load_taxonomy, normalize_text
from .embedding import embed_text
from .errors import (
    CosminerError,
    DimensionError,
    EmptyCorpusError,
    ZeroVectorError,
)
from .validation import as_float_matrix, as_float_vector, check_same_dim
from .wordpiece import Vocabulary

DEFAULT_REVIEW_MARGIN = 0.005


def cosine(u, v) -> float:
    """Cosine similarity (u.v)/(|u||v|), clamped to [-1, 1] against rounding."""
    u = as_float_vector(u, "u")
    v = as_float_vector(v, "v")
    check_same_dim(u, v)
    nu = float(np.sqrt(np.sum(u * u)))
    nv = float(np.sqrt(np.sum(v * v)))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine is undefined for zero-norm vectors")
    s = float(np.sum(u * v)) / (nu * nv)
    if s > 1.0:
        return 1.0
    if s < -1.0:
        return -1.0
    return s


@dataclass(frozen=True)
class LabelEmbeddingSet:
    """One embedding per taxonomy label, with precomputed norms."""

    taxonomy: TaxonomyDef
    vectors: tuple[np.ndarray, ...]
    norms: tuple[float, ...]

    @property
    def dim(self) -> int:
        return self.vectors[0].shape[0]


def build_label_embeddings(
    taxonomy: TaxonomyDef,
    vocab: Vocabulary,
    provider,
    method: str = "median",
) -> LabelEmbeddingSet:
    """Embed every taxonomy label once; zero-norm label vectors are fatal."""
    vectors = []
    norms = []
    for label in taxonomy.labels:
        vec = embed_text(label, vocab, provider, method=method)
        norm = float(np.sqrt(np.sum(vec * vec)))
        if norm == 0.0:
            raise ZeroVectorError(f"label {label!r} embedded to a zero vector")
        vectors.append(vec)
        norms.append(norm)
    dims = {v.shape[0] for v in vectors}
    if len(dims) != 1:
        raise DimensionError(f"label vectors have mixed dims: {sorted(dims)}")
    return LabelEmbeddingSet(taxonomy=taxonomy, vectors=tuple(vectors), norms=tuple(norms))


def _similarity_row(vec: np.ndarray, vec_norm: float, label_set: LabelEmbeddingSet) -> np.ndarray:
    """Clamped cosine of one outcome vector against every label, taxonomy order."""
    sims = np.empty(len(label_set.vectors), dtype=np.float64)
    for j, lv in enumerate(label_set.vectors):
        sims[j] = float(np.sum(vec * lv)) / (vec_norm * label_set.norms[j])
    np.clip(sims, -1.0, 1.0, out=sims)
    return sims


def rank_labels(outcome_vec, label_set: LabelEmbeddingSet) -> tuple[tuple[str, float], ...]:
    """Rank every label by descending similarity; ties keep taxonomy order."""
    vec = as_float_vector(outcome_vec, "outcome vector")
    if vec.shape[0] != label_set.dim:
        raise DimensionError(
            f"outcome dim {vec.shape[0]} does not match label dim {label_set.dim}"
        )
    norm = float(np.sqrt(np.sum(vec * vec)))
    if norm == 0.0:
        raise ZeroVectorError("cannot rank a zero-norm outcome vector")
    sims = _similarity_row(vec, norm, label_set)
    order = np.argsort(-sims, kind="stable")
    labels = label_set.taxonomy.labels
    return tuple((labels[j], float(sims[j])) for j in order)


@dataclass(frozen=True)
class RankedClassification:
    """Full descending label ranking for one outcome plus the assignment."""

    outcome_id: str
    ranked: tuple[tuple[str, float], ...]
    assigned: str
    margin: float
    needs_review: bool


def assign(
    ranked,
    review_margin: float = DEFAULT_REVIEW_MARGIN,
    outcome_id: str = "",
) -> RankedClassification:
    """Turn a ranking into an assignment with the low-margin review flag."""
    ranked = tuple(ranked)
    if len(ranked) < 2:
        raise ValueError("assignment needs a ranking over at least two labels")
    if review_margin < 0:
        raise ValueError("review_margin must be non-negative")
    margin = ranked[0][1] - ranked[1][1]
    return RankedClassification(
        outcome_id=outcome_id,
        ranked=ranked,
        assigned=ranked[0][0],
        margin=margin,
        needs_review=margin < review_margin,
    )


def softmax_head(pooled_vec, weights, bias) -> np.ndarray:
    """Numerically stable softmax over z = W^T v + b."""
    v = as_float_vector(pooled_vec, "pooled vector")
    w = as_float_matrix(weights, "weights")
    b = as_float_vector(bias, "bias")
    if w.shape[0] != v.shape[0] or w.shape[1] != b.shape[0]:
        raise DimensionError(
            f"inconsistent shapes: vec {v.shape[0]}, weights {w.shape}, bias {b.shape[0]}"
        )
    z = np.sum(w * v[:, None], axis=0) + b
    z -= np.max(z)
    e = np.exp(z)
    return e / np.sum(e)


@dataclass(frozen=True)
class ClassificationReject:
    """An outcome that could not be embedded, with the provider's reason."""

    record: OutcomeRecord
    reason: str


@dataclass
class CorpusClassification:
    classifications: list[RankedClassification]
    counts: dict[str, int]
    rejects: list[ClassificationReject]


def classify_corpus(
    records,
    taxonomy,
    vocab: Vocabulary,
    provider,
    method: str = "median",
    review_margin: float = DEFAULT_REVIEW_MARGIN,
) -> CorpusClassification:
    """Classify every record; embedding failures become rejects, never drops.

    Label counts plus rejects always add up to the corpus size. Embeddings
    are cached by normalized text, and the similarity computation per label
    is a single vectorized pass that reproduces rank_labels bit for bit.
    """
    records = list(records)
    if not records:
        raise EmptyCorpusError("no outcomes")
    if isinstance(taxonomy, TaxonomyDef):
        tax = taxonomy
    else:
        tax = load_taxonomy(taxonomy)
    label_set = build_label_embeddings(tax, vocab, provider, method=method)

    cache: dict[str, tuple] = {}
    kept: list[OutcomeRecord] = []
    vectors: list[np.ndarray] = []
    rejects: list[ClassificationReject] = []
    for rec in records:
        entry = cache.get(rec.normalized_text)
        if entry is None:
            try:
                entry = (embed_text(rec.normalized_text, vocab, provider, method=method), None)
            except CosminerError as exc:
                entry = (None, str(exc))
            cache[rec.normalized_text] = entry
        vec, reason = entry
        if reason is not None:
            rejects.append(ClassificationReject(rec, reason))
        else:
            kept.append(rec)
            vectors.append(vec)

    labels = tax.labels
    classifications: list[RankedClassification] = []
    if kept:
        outcome_matrix = np.asarray(vectors)
        outcome_norms = np.sqrt(np.sum(outcome_matrix * outcome_matrix, axis=1))
        if np.any(outcome_norms == 0.0):
            nonzero = outcome_norms != 0.0
            for i in np.nonzero(~nonzero)[0]:
                rejects.append(
                    ClassificationReject(kept[i], "outcome embedded to a zero vector")
                )
            kept = [kept[i] for i in np.nonzero(nonzero)[0]]
            outcome_matrix = outcome_matrix[nonzero]
            outcome_norms = outcome_norms[nonzero]
    if kept:
        # chunked so the elementwise product stays cache-resident; per-row
        # sums are unchanged, so this matches rank_labels bit for bit
        n = len(kept)
        sims = np.empty((n, len(labels)), dtype=np.float64)
        chunk = 1024
        buf = np.empty((min(chunk, n), outcome_matrix.shape[1]), dtype=np.float64)
        for start in range(0, n, chunk):
            stop = min(start + chunk, n)
            block = outcome_matrix[start:stop]
            block_buf = buf[: stop - start]
            block_norms = outcome_norms[start:stop]
            for j, lv in enumerate(label_set.vectors):
                np.multiply(block, lv, out=block_buf)
                sims[start:stop, j] = np.sum(block_buf, axis=1) / (
                    block_norms * label_set.norms[j]
                )
        np.clip(sims, -1.0, 1.0, out=sims)
        orders = np.argsort(-sims, axis=1, kind="stable").tolist()
        rows = sims.tolist()
        for rec, row, order in zip(kept, rows, orders):
            ranked = tuple((labels[j], row[j]) for j in order)
            classifications.append(assign(ranked, review_margin, outcome_id=rec.id))

    counts = {label: 0 for label in labels}
    for c in classifications:
        counts[c.assigned] += 1
    return CorpusClassification(classifications, counts, rejects)


def as_assignments(classifications) -> list[tuple[str, str]]:
    """Normalize RankedClassification objects or (id, label) pairs."""
    out = []
    for item in classifications:
        if isinstance(item, RankedClassification):
            out.append((item.outcome_id, item.assigned))
        else:
            outcome_id, label = item
            out.append((str(outcome_id), str(label)))
    return out


class CosineTaxonomyClassifier(BaseEstimator, ClassifierMixin):
    """Zero-shot nearest-label classifier over text, sklearn style.

    fit() embeds the taxonomy labels through the configured provider;
    predict() maps each input text to the label with the highest cosine
    similarity. decision_function() exposes the raw similarity matrix in
    taxonomy label order.

    Parameters
    ----------
    taxonomy : str | TaxonomyDef
        Built-in name ("smith15", "core5"), path to a label file, or a
        TaxonomyDef.
    vocab : Vocabulary
        Word-piece vocabulary used to compose text embeddings.
    provider : EmbeddingStore | ReferenceEmbedder
        Vector source for pieces / full texts.
    pooling : str
        "median" (default) or "mean" token pooling.
    review_margin : float
        Top-two similarity margin below which assignments are flagged.
    """

    def __init__(
        self,
        taxonomy="smith15",
        vocab=None,
        provider=None,
        pooling="median",
        review_margin=DEFAULT_REVIEW_MARGIN,
    ):
        self.taxonomy = taxonomy
        self.vocab = vocab
        self.provider = provider
        self.pooling = pooling
        self.review_margin = review_margin

    def fit(self, X=None, y=None):
        """Embed the taxonomy labels. X and y are ignored (zero-shot)."""
        if self.vocab is None or self.provider is None:
            raise ValueError("vocab and provider are required to fit")
        if isinstance(self.taxonomy, TaxonomyDef):
            tax = self.taxonomy
        else:
            tax = load_taxonomy(self.taxonomy)
        self.label_set_ = build_label_embeddings(
            tax, self.vocab, self.provider, method=self.pooling
        )
        self.classes_ = np.asarray(tax.labels, dtype=object)
        return self

    def _embed(self, text: str) -> np.ndarray:
        normalized = normalize_text(str(text))
        return embed_text(normalized, self.vocab, self.provider, method=self.pooling)

    def decision_function(self, X) -> np.ndarray:
        """Similarity matrix (n_texts, n_labels) in taxonomy label order."""
        check_is_fitted(self, "label_set_")
        rows = []
        for text in X:
            vec = self._embed(text)
            norm = float(np.sqrt(np.sum(vec * vec)))
            if norm == 0.0:
                raise ZeroVectorError(f"text {text!r} embedded to a zero vector")
            rows.append(_similarity_row(vec, norm, self.label_set_))
        return np.asarray(rows)

    def predict(self, X) -> np.ndarray:
        """Highest-similarity label per text; ties keep taxonomy order."""
        sims = self.decision_function(X)
        return self.classes_[np.argmax(sims, axis=1)]

    def rank(self, X, ids=None) -> list[RankedClassification]:
        """Full ranked classification per text, flagged per review_margin."""
        check_is_fitted(self, "label_set_")
        texts = list(X)
        ids = [str(i) for i in (ids if ids is not None else range(len(texts)))]
        if len(ids) != len(texts):
            raise ValueError("ids and X must have equal length")
        out = []
        for outcome_id, text in zip(ids, texts):
            ranked = rank_labels(self._embed(text), self.label_set_)
            out.append(assign(ranked, self.review_margin, outcome_id=outcome_id))
        return out


class UntrainedSoftmaxHead(BaseEstimator):
    """Softmax classification head with seeded random, untrained parameters.

    Serves as the degenerate baseline a freshly initialized head produces.
    The per-label offset drawn at offset_scale stands in for the large
    input-independent logit component that the strongly anisotropic pooled
    features of an untrained encoder contribute, so with the default scales
    predictions collapse onto very few labels regardless of the input.
    """

    def __init__(self, labels=None, seed=0, weight_scale=0.1, offset_scale=1.0):
        self.labels = labels
        self.seed = seed
        self.weight_scale = weight_scale
        self.offset_scale = offset_scale

    def fit(self, X, y=None):
        """Draw weights and offsets for the feature dim of X."""
        if self.labels is None or len(self.labels) < 2:
            raise ValueError("labels must list at least two label names")
        X = as_float_matrix(X, "X")
        rng = np.random.default_rng(self.seed)
        n_labels = len(self.labels)
        self.weights_ = rng.normal(0.0, self.weight_scale, size=(X.shape[1], n_labels))
        self.bias_ = rng.normal(0.0, self.offset_scale, size=n_labels)
        self.classes_ = np.asarray(list(self.labels), dtype=object)
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "weights_")
        X = as_float_matrix(X, "X")
        return np.asarray([softmax_head(row, self.weights_, self.bias_) for row in X])

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return self.classes_[np.argmax(probs, axis=1)]
