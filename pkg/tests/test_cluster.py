import numpy as np
import pytest

from cosminer import (
    EmbeddingStore,
    PowerIterationPCA,
    TaxonomyDef,
    Vocabulary,
    attention_cls_profile,
    build_label_embeddings,
    cluster_stats,
    euclidean,
    outlier_scores,
    pca_project,
)
from cosminer.errors import (
    AttentionFormatError,
    DimensionError,
    InsufficientDataError,
)

MINI_VOCAB = Vocabulary(["[UNK]"])


def two_label_set():
    store = EmbeddingStore(2, {"alpha": [1.0, 1.0], "beta": [0.0, 1.0]})
    tax = TaxonomyDef(name="t", labels=("alpha", "beta"))
    return build_label_embeddings(tax, MINI_VOCAB, store)


class TestEuclidean:
    def test_identical(self):
        assert euclidean([1.5, -2.0], [1.5, -2.0]) == 0.0

    def test_three_four_five(self):
        assert euclidean([0, 0], [3, 4]) == 5.0

    def test_dim_mismatch(self):
        with pytest.raises(DimensionError):
            euclidean([1], [1, 2])

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(6)
        for _ in range(300):
            a, b, c = rng.normal(size=(3, 5))
            assert euclidean(a, b) == pytest.approx(euclidean(b, a), abs=1e-9)
            assert euclidean(a, c) <= euclidean(a, b) + euclidean(b, c) + 1e-9


class TestClusterStats:
    def test_member_equal_to_label(self):
        ls = two_label_set()
        stats = cluster_stats([("o1", "alpha")], {"o1": np.array([1.0, 1.0])}, ls)
        assert stats[0].member_count == 1
        assert stats[0].dist_mean_to_label == 0.0

    def test_hand_mean_and_distance(self):
        ls = two_label_set()
        embeddings = {"o1": np.array([0.0, 0.0]), "o2": np.array([2.0, 0.0])}
        stats = cluster_stats([("o1", "alpha"), ("o2", "alpha")], embeddings, ls)
        np.testing.assert_array_equal(stats[0].mean_vec, [1.0, 0.0])
        assert stats[0].dist_mean_to_label == 1.0

    def test_empty_label_flagged(self):
        ls = two_label_set()
        stats = cluster_stats([("o1", "alpha")], {"o1": np.array([1.0, 1.0])}, ls)
        assert stats[1].label == "beta"
        assert stats[1].member_count == 0
        assert stats[1].mean_vec is None
        assert stats[1].dist_mean_to_label is None

    def test_mean_minimizes_squared_distances(self):
        rng = np.random.default_rng(7)
        members = rng.normal(size=(12, 4))
        mean = np.mean(members, axis=0)
        base = float(np.sum((members - mean) ** 2))
        for _ in range(100):
            delta = rng.normal(scale=0.1, size=4)
            perturbed = float(np.sum((members - (mean + delta)) ** 2))
            assert perturbed >= base - 1e-12

    def test_unknown_label_rejected(self):
        ls = two_label_set()
        with pytest.raises(KeyError):
            cluster_stats([("o1", "gamma")], {"o1": np.array([1.0, 1.0])}, ls)

    def test_dim_mismatch_rejected(self):
        ls = two_label_set()
        with pytest.raises(DimensionError):
            cluster_stats([("o1", "alpha")], {"o1": np.array([1.0, 1.0, 1.0])}, ls)


class TestOutlierScores:
    def test_single_member(self):
        out = outlier_scores([("o1", np.array([3.0, 4.0]))], np.array([3.0, 4.0]))
        assert out == [("o1", 0.0)]

    def test_tied_distances_sort_by_id(self):
        members = [("b", np.array([4.0, 0.0])), ("a", np.array([0.0, 0.0]))]
        out = outlier_scores(members, np.array([2.0, 0.0]))
        assert out == [("a", 2.0), ("b", 2.0)]

    def test_descending_distance(self):
        members = [
            ("a", np.array([0.0])),
            ("b", np.array([1.0])),
            ("c", np.array([5.0])),
        ]
        out = outlier_scores(members, np.array([2.0]))
        assert out[0] == ("c", 3.0)
        assert [i for i, _ in out] == ["c", "a", "b"]

    def test_empty_cluster_rejected(self):
        with pytest.raises(ValueError):
            outlier_scores([], np.array([0.0]))


class TestPowerIterationPCA:
    def test_collinear_points_have_flat_second_axis(self):
        pts = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]
        coords = pca_project(pts, k=2)
        assert np.all(np.abs(coords[:, 1]) <= 1e-8)

    def test_projection_is_centered(self):
        rng = np.random.default_rng(8)
        coords = pca_project(rng.normal(size=(30, 6)) + 5.0, k=3)
        np.testing.assert_allclose(coords.mean(axis=0), 0.0, atol=1e-9)

    def test_variance_descends(self):
        rng = np.random.default_rng(9)
        coords = pca_project(rng.normal(size=(50, 8)), k=3)
        variances = coords.var(axis=0, ddof=1)
        assert variances[0] >= variances[1] >= variances[2]

    def test_deterministic_bit_for_bit(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(20, 5))
        a = pca_project(X, k=2)
        b = pca_project(X.copy(), k=2)
        assert a.tobytes() == b.tobytes()

    def test_insufficient_items(self):
        with pytest.raises(InsufficientDataError):
            pca_project([[1.0, 2.0], [3.0, 4.0]], k=2)

    def test_dim_smaller_than_k(self):
        with pytest.raises(DimensionError):
            pca_project([[1.0], [2.0], [3.0], [4.0]], k=2)

    def test_matches_svd_subspace_and_variance(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(40, 6)) @ np.diag([5.0, 3.0, 1.0, 0.5, 0.2, 0.1])
        pca = PowerIterationPCA(n_components=2).fit(X)
        centered = X - X.mean(axis=0)
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        for j in range(2):
            alignment = abs(float(np.dot(pca.components_[j], vt[j])))
            assert alignment == pytest.approx(1.0, abs=1e-6)
            assert pca.explained_variance_[j] == pytest.approx(
                s[j] ** 2 / (len(X) - 1), rel=1e-6
            )

    def test_sign_convention_first_nonzero_positive(self):
        rng = np.random.default_rng(12)
        pca = PowerIterationPCA(n_components=3).fit(rng.normal(size=(25, 5)))
        for comp in pca.components_:
            nonzero = comp[np.nonzero(comp)[0]]
            assert nonzero[0] > 0

    def test_estimator_params(self):
        pca = PowerIterationPCA(n_components=3, tol=1e-8)
        assert pca.get_params()["n_components"] == 3
        assert pca.get_params()["tol"] == 1e-8


class TestAttentionProfile:
    def test_uniform_single_head(self):
        tokens = ["[CLS]", "mortality", "rate", "[SEP]"]
        attention = [[[0.25] * 4] * 4]
        profile = attention_cls_profile(attention, tokens)
        assert profile.sep_share == pytest.approx(0.25, abs=1e-12)
        assert profile.noop_flag is False
        np.testing.assert_allclose(profile.weights, 0.25, atol=1e-12)

    def test_two_head_average(self):
        tokens = ["[CLS]", "mortality", "[SEP]"]
        attention = [
            [[0.1, 0.2, 0.7], [0.3, 0.3, 0.4], [0.2, 0.2, 0.6]],
            [[0.1, 0.4, 0.5], [0.25, 0.5, 0.25], [0.3, 0.3, 0.4]],
        ]
        profile = attention_cls_profile(attention, tokens)
        np.testing.assert_allclose(profile.weights, [0.1, 0.3, 0.6], atol=1e-12)
        assert profile.sep_share == pytest.approx(0.6, abs=1e-12)
        assert profile.noop_flag is True

    def test_weights_are_convex_combination(self):
        tokens = ["[CLS]", "a", "b", "[SEP]"]
        rng = np.random.default_rng(13)
        raw = rng.uniform(size=(3, 4, 4))
        attention = raw / raw.sum(axis=2, keepdims=True)
        profile = attention_cls_profile(attention, tokens)
        assert np.all(profile.weights >= 0)
        assert abs(float(np.sum(profile.weights)) - 1.0) <= 1e-6

    def test_row_sum_violation_rejected(self):
        tokens = ["[CLS]", "x", "[SEP]"]
        attention = [[[0.334, 0.333, 0.334], [0.4, 0.3, 0.3], [0.2, 0.4, 0.4]]]
        with pytest.raises(AttentionFormatError):
            attention_cls_profile(attention, tokens)

    def test_negative_weight_rejected(self):
        tokens = ["[CLS]", "x", "[SEP]"]
        attention = [[[1.2, -0.2, 0.0], [0.4, 0.3, 0.3], [0.2, 0.4, 0.4]]]
        with pytest.raises(AttentionFormatError):
            attention_cls_profile(attention, tokens)

    def test_token_count_mismatch(self):
        attention = [[[0.5, 0.5], [0.5, 0.5]]]
        with pytest.raises(DimensionError):
            attention_cls_profile(attention, ["[CLS]", "x", "[SEP]"])

    def test_ragged_tensor_rejected(self):
        with pytest.raises(AttentionFormatError):
            attention_cls_profile([[[0.5, 0.5], [1.0]]], ["[CLS]", "x"])

    def test_first_token_must_be_cls(self):
        attention = [[[0.5, 0.5], [0.5, 0.5]]]
        with pytest.raises(AttentionFormatError):
            attention_cls_profile(attention, ["mortality", "[SEP]"])

    def test_threshold_is_strict(self):
        tokens = ["[CLS]", "[SEP]"]
        attention = [[[0.5, 0.5], [0.5, 0.5]]]
        profile = attention_cls_profile(attention, tokens, noop_threshold=0.5)
        assert profile.sep_share == 0.5
        assert profile.noop_flag is False
