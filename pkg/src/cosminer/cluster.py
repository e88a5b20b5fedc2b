"""Per-class cluster statistics, PCA projection export, attention diagnostics.

Cluster centers are arithmetic means; distances are Euclidean. The 2D/3D
projection uses deterministic power iteration with deflation instead of a
stochastic embedding so exported coordinates are reproducible bit for bit.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .classify import LabelEmbeddingSet, as_assignments
from .errors import (
    AttentionFormatError,
    DimensionError,
    InsufficientDataError,
    ZeroVectorError,
)
from .validation import as_float_matrix, as_float_vector, check_same_dim
from .wordpiece import CLS_TOKEN, SEP_TOKEN


def euclidean(u, v) -> float:
    """Euclidean distance between two same-dim vectors."""
    u = as_float_vector(u, "u")
    v = as_float_vector(v, "v")
    check_same_dim(u, v)
    diff = u - v
    return float(np.sqrt(np.sum(diff * diff)))


@dataclass(frozen=True)
class ClusterStats:
    """Mean embedding of one label's members and its distance to the label."""

    label: str
    member_count: int
    mean_vec: np.ndarray | None
    dist_mean_to_label: float | None


def cluster_stats(classifications, embeddings, label_set: LabelEmbeddingSet) -> list[ClusterStats]:
    """Per-label mean vectors and mean-to-label distances, taxonomy order.

    embeddings maps outcome_id to its vector. Labels without members are
    reported with count 0 and no mean/distance.
    """
    members: dict[str, list[np.ndarray]] = {label: [] for label in label_set.taxonomy.labels}
    for outcome_id, label in as_assignments(classifications):
        if label not in members:
            raise KeyError(f"assigned label {label!r} is not in the taxonomy")
        vec = as_float_vector(embeddings[outcome_id], f"embedding for {outcome_id!r}")
        if vec.shape[0] != label_set.dim:
            raise DimensionError(
                f"embedding for {outcome_id!r} has dim {vec.shape[0]}, "
                f"labels have dim {label_set.dim}"
            )
        members[label].append(vec)

    out = []
    for j, label in enumerate(label_set.taxonomy.labels):
        vecs = members[label]
        if not vecs:
            out.append(ClusterStats(label, 0, None, None))
            continue
        mean = np.mean(np.asarray(vecs), axis=0)
        out.append(
            ClusterStats(label, len(vecs), mean, euclidean(mean, label_set.vectors[j]))
        )
    return out


def outlier_scores(members, mean_vec) -> list[tuple[str, float]]:
    """(outcome_id, distance-to-mean) for every member, farthest first.

    Equal distances order by outcome id.
    """
    members = list(members)
    if not members:
        raise ValueError("outlier scoring requires a non-empty cluster")
    mean = as_float_vector(mean_vec, "mean vector")
    scored = [(str(i), euclidean(v, mean)) for i, v in members]
    return sorted(scored, key=lambda item: (-item[1], item[0]))


def _orthogonalize(w: np.ndarray, components) -> np.ndarray:
    for c in components:
        w = w - float(np.sum(w * c)) * c
    return w


def _orthogonal_completion(components, d: int) -> np.ndarray:
    """First standard basis vector with a usable part outside span(components)."""
    for i in range(d):
        cand = np.zeros(d)
        cand[i] = 1.0
        cand = _orthogonalize(cand, components)
        norm = float(np.sqrt(np.sum(cand * cand)))
        if norm > 1e-6:
            return cand / norm
    raise ZeroVectorError("no orthogonal direction left to complete the basis")


class PowerIterationPCA(BaseEstimator, TransformerMixin):
    """Deterministic PCA via power iteration with deflation.

    Each component starts from the normalized all-ones vector and iterates
    v <- X^T X v / |X^T X v| on the (deflated) centered data until the
    change drops below tol or max_iter is hit. Iterates are re-orthogonalized
    against accepted components so deflation residue cannot re-converge to an
    already-extracted direction; when the remaining subspace carries no
    variance the component falls back to a deterministic orthogonal basis
    direction. Components are sign-fixed so their first nonzero coordinate is
    positive, which together with the fixed start vector makes fitted results
    a pure function of the input.
    """

    def __init__(self, n_components: int = 2, max_iter: int = 1000, tol: float = 1e-10):
        self.n_components = n_components
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        X = as_float_matrix(X, "X")
        n, d = X.shape
        k = self.n_components
        if k < 1:
            raise ValueError("n_components must be >= 1")
        if d < k:
            raise DimensionError(f"need dim >= {k}, got {d}")
        if n < k + 1:
            raise InsufficientDataError(f"need at least {k + 1} items, got {n}")

        self.mean_ = np.mean(X, axis=0)
        residual = X - self.mean_
        components = []
        variances = []
        for _ in range(k):
            v = _orthogonalize(np.ones(d) / np.sqrt(d), components)
            start_norm = float(np.sqrt(np.sum(v * v)))
            if start_norm < 1e-12:
                v = _orthogonal_completion(components, d)
            else:
                v = v / start_norm
            for _ in range(self.max_iter):
                scores = np.sum(residual * v, axis=1)
                raw = np.sum(residual * scores[:, None], axis=0)
                raw_norm = float(np.sqrt(np.sum(raw * raw)))
                w = _orthogonalize(raw, components)
                norm = float(np.sqrt(np.sum(w * w)))
                # a vector that orthogonalization all but annihilates is pure
                # deflation residue: the remaining subspace has no variance
                if norm == 0.0 or norm <= raw_norm * 1e-10:
                    break
                w = w / norm
                delta = w - v
                v = w
                if float(np.sqrt(np.sum(delta * delta))) < self.tol:
                    break
            nonzero = np.nonzero(v)[0]
            if nonzero.size and v[nonzero[0]] < 0:
                v = -v
            scores = np.sum(residual * v, axis=1)
            variances.append(float(np.sum(scores * scores)) / (n - 1))
            components.append(v)
            residual = residual - scores[:, None] * v[None, :]

        order = sorted(range(k), key=lambda j: -variances[j])
        self.components_ = np.asarray([components[j] for j in order])
        self.explained_variance_ = np.asarray([variances[j] for j in order])
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "components_")
        X = as_float_matrix(X, "X")
        if X.shape[1] != self.components_.shape[1]:
            raise DimensionError(
                f"X has dim {X.shape[1]}, fitted on dim {self.components_.shape[1]}"
            )
        centered = X - self.mean_
        cols = [np.sum(centered * comp, axis=1) for comp in self.components_]
        return np.stack(cols, axis=1)


def pca_project(embeddings, k: int) -> np.ndarray:
    """Project items onto the top-k principal directions (export helper)."""
    return PowerIterationPCA(n_components=k).fit_transform(embeddings)


@dataclass(frozen=True)
class AttentionProfile:
    """Head-averaged attention the [CLS] query places on each token."""

    tokens: tuple[str, ...]
    weights: np.ndarray
    sep_share: float
    noop_flag: bool


def attention_cls_profile(attention, tokens, noop_threshold: float = 0.5) -> AttentionProfile:
    """Average the [CLS] query row over heads and measure [SEP] dominance.

    The input tensor is heads x seq x seq with every row of every head a
    probability distribution (sum 1 within 1e-6, non-negative). A profile
    whose [SEP] mass exceeds noop_threshold is flagged as a no-op: the
    sequence offered nothing worth attending to.
    """
    try:
        tensor = np.asarray(attention, dtype=np.float64)
    except (ValueError, TypeError):
        raise AttentionFormatError("attention tensor is ragged or non-numeric")
    if tensor.ndim != 3:
        raise AttentionFormatError(f"expected heads x seq x seq, got shape {tensor.shape}")
    heads, rows, cols = tensor.shape
    if rows != cols:
        raise AttentionFormatError(f"attention rows must be square, got {rows}x{cols}")
    tokens = tuple(str(t) for t in tokens)
    if len(tokens) != rows:
        raise DimensionError(f"{len(tokens)} tokens for sequence length {rows}")
    if tokens[0] != CLS_TOKEN:
        raise AttentionFormatError(f"first token must be {CLS_TOKEN}, got {tokens[0]!r}")
    if not np.all(np.isfinite(tensor)):
        raise AttentionFormatError("attention tensor contains non-finite values")
    if np.any(tensor < 0):
        raise AttentionFormatError("attention weights must be non-negative")
    sums = np.sum(tensor, axis=2)
    bad = np.abs(sums - 1.0) > 1e-6
    if np.any(bad):
        h, r = np.argwhere(bad)[0]
        raise AttentionFormatError(f"head {h} row {r} sums to {sums[h, r]!r}, expected 1")

    weights = np.mean(tensor[:, 0, :], axis=0)
    sep_mask = np.asarray([t == SEP_TOKEN for t in tokens])
    sep_share = float(np.sum(weights[sep_mask]))
    return AttentionProfile(
        tokens=tokens,
        weights=weights,
        sep_share=sep_share,
        noop_flag=sep_share > noop_threshold,
    )
