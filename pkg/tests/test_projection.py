"""2-D projection: PCA, exact t-SNE, and the CSV/SVG renderers."""

import numpy as np
import pytest

from termspace import PCA2D, TSNE2D, ValidationError, pca_2d, tsne_2d
from termspace.projection import (
    ProjectedPoint,
    binary_search_row,
    joint_probabilities,
    pairwise_sq_distances,
    scatter_svg,
    tag_points,
    write_projection_csv,
)


def quantized(rng, shape, scale=1.0):
    """Random matrix whose entries are exact multiples of 2**-20.

    Adding a modest constant to such values is exact in float64, which makes
    translation invariance checkable at the bit level.
    """
    return np.round(rng.normal(size=shape) * scale * 2**20) / 2**20


class TestPairwiseSqDistances:
    @pytest.mark.parametrize("d", [2, 5])
    def test_matches_expanded_norms_identity(self, d):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(20, d))
        D = pairwise_sq_distances(X)
        sq = (X * X).sum(axis=1)
        expanded = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        np.testing.assert_allclose(D, expanded, atol=1e-9)
        assert np.all(np.diag(D) == 0.0)

    @pytest.mark.parametrize("d", [2, 5])
    def test_translation_leaves_every_bit_unchanged(self, d):
        X = quantized(np.random.default_rng(7), (15, d))
        assert np.array_equal(pairwise_sq_distances(X), pairwise_sq_distances(X + 3.5))


class TestPCA2D:
    def test_rank_one_data_collapses_the_second_axis(self):
        rng = np.random.default_rng(0)
        direction = np.array([1.0, 2.0, -1.0, 0.5])
        X = rng.normal(size=(30, 1)) * direction
        Y = PCA2D().fit_transform(X)
        assert np.max(np.abs(Y[:, 1])) <= 1e-6
        assert np.std(Y[:, 0]) > 0.1

    def test_planar_data_keeps_pairwise_distances(self):
        rng = np.random.default_rng(5)
        flat = rng.normal(size=(25, 2))
        X = np.hstack([flat, np.zeros((25, 8))])
        Y = PCA2D().fit_transform(X)
        np.testing.assert_allclose(
            pairwise_sq_distances(Y), pairwise_sq_distances(flat), atol=1e-9
        )

    def test_repeated_fits_are_bitwise_identical(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(40, 6))
        a = PCA2D().fit(X)
        b = PCA2D().fit(X)
        assert np.array_equal(a.components_, b.components_)
        assert np.array_equal(a.transform(X), b.transform(X))

    def test_sign_convention(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(30, 4))
        for component in PCA2D().fit(X).components_:
            first = next(v for v in component if abs(v) > 1e-12)
            assert first > 0

    def test_validation(self):
        with pytest.raises(ValidationError, match="at least 2"):
            PCA2D().fit([[1.0, 2.0]])
        with pytest.raises(ValidationError, match="dimension"):
            PCA2D().fit([[1.0], [2.0]])
        with pytest.raises(ValidationError, match="rank 0"):
            PCA2D().fit([[3.0, 4.0], [3.0, 4.0], [3.0, 4.0]])
        with pytest.raises(ValidationError, match="fitted"):
            PCA2D().transform([[1.0, 2.0]])


class TestJointProbabilities:
    CLOUD = np.random.default_rng(42).normal(size=(40, 6))

    def test_exactly_symmetric_and_normalized(self):
        P, _ = joint_probabilities(self.CLOUD, perplexity=12)
        assert np.array_equal(P, P.T)
        assert abs(P.sum() - 1.0) <= 1e-9
        assert np.all(np.diag(P) == 0.0)
        assert np.all(P >= 0.0)

    def test_every_row_hits_the_requested_perplexity(self):
        _, achieved = joint_probabilities(self.CLOUD, perplexity=12)
        assert np.max(np.abs(achieved - 12.0)) <= 1e-3

    def test_uniform_distance_row(self):
        row = np.full(9, 4.0)
        p, entropy = binary_search_row(row, target_perplexity=5.0)
        np.testing.assert_allclose(p, np.full(9, 1.0 / 9.0), atol=1e-12)
        assert entropy == pytest.approx(np.log(9.0), abs=1e-12)

    def test_binary_search_matches_target_entropy(self):
        rng = np.random.default_rng(8)
        row = rng.uniform(0.1, 5.0, size=30)
        p, entropy = binary_search_row(row, target_perplexity=10.0)
        assert abs(entropy - np.log(10.0)) <= 1e-5
        assert abs(p.sum() - 1.0) <= 1e-12


def two_blobs(seed):
    """Two tight 8-D blobs, 20 points each, 10 units apart."""
    rng = np.random.default_rng(100 + seed)
    a = rng.normal(0.0, 0.01, size=(20, 8))
    b = rng.normal(0.0, 0.01, size=(20, 8))
    b[:, 0] += 10.0
    return np.vstack([a, b])


class TestTSNE2D:
    def test_bitwise_deterministic(self):
        X = np.random.default_rng(1).normal(size=(12, 4))
        a = TSNE2D(perplexity=3, n_iter=60, seed=5).fit_transform(X)
        b = TSNE2D(perplexity=3, n_iter=60, seed=5).fit_transform(X)
        assert np.array_equal(a, b)

    def test_translation_leaves_every_bit_unchanged(self):
        X = quantized(np.random.default_rng(4), (12, 4))
        a = TSNE2D(perplexity=3, n_iter=60, seed=1).fit_transform(X)
        b = TSNE2D(perplexity=3, n_iter=60, seed=1).fit_transform(X + 3.5)
        assert np.array_equal(a, b)

    def test_perplexity_is_clamped_to_a_third_of_neighbors(self):
        X = np.random.default_rng(2).normal(size=(10, 3))
        model = TSNE2D(perplexity=30, n_iter=5)
        model.fit_transform(X)
        assert model.effective_perplexity_ == pytest.approx((10 - 1) / 3.0)

    def test_calibration_reported_per_point(self):
        X = np.random.default_rng(3).normal(size=(30, 5))
        model = TSNE2D(perplexity=8, n_iter=5)
        model.fit_transform(X)
        assert model.calibration_.shape == (30,)
        assert np.max(np.abs(model.calibration_ - 8.0)) <= 1e-3

    def test_validation(self):
        tiny = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
        with pytest.raises(ValidationError, match="at least 4"):
            TSNE2D().fit_transform(tiny)
        square = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
        with pytest.raises(ValidationError, match="perplexity"):
            TSNE2D(perplexity=0.5).fit_transform(square)
        with pytest.raises(ValidationError, match="n_iter"):
            TSNE2D(n_iter=0).fit_transform(square)

    def test_kl_history_shrinks(self):
        X = two_blobs(0)
        model = TSNE2D(perplexity=10, seed=0)
        model.fit_transform(X)
        assert len(model.kl_history_) == model.n_iter
        assert model.kl_history_[-1] < model.kl_history_[0]
        # improvement continues after the early-exaggeration phase ends
        assert model.kl_history_[-1] < model.kl_history_[299]

    def test_separates_two_distant_blobs(self):
        Y = TSNE2D(perplexity=10, seed=0).fit_transform(two_blobs(0))
        a, b = Y[:20], Y[20:]
        intra = max(
            np.sqrt(pairwise_sq_distances(a)).max(),
            np.sqrt(pairwise_sq_distances(b)).max(),
        )
        inter = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)).min()
        assert inter > intra


class TestPointHelpers:
    VECTORS = np.random.default_rng(6).normal(size=(8, 3))

    def test_pca_points_default_ids(self):
        points = pca_2d(self.VECTORS)
        assert [p.term_id for p in points] == [str(i) for i in range(8)]

    def test_tsne_points_custom_ids(self):
        ids = [f"t{i}" for i in range(8)]
        points = tsne_2d(self.VECTORS, perplexity=2, iterations=5, ids=ids)
        assert [p.term_id for p in points] == ids

    def test_id_count_mismatch(self):
        with pytest.raises(ValidationError, match="ids"):
            pca_2d(self.VECTORS, ids=["only-one"])

    def test_tag_points(self):
        points = [ProjectedPoint(term_id="a", x=0.0, y=1.0)]
        tagged = tag_points(points, clusters={"a": 3}, labels={"a": "organ"})
        assert tagged[0].cluster == 3
        assert tagged[0].label == "organ"
        untouched = tag_points(points)
        assert untouched[0].cluster is None and untouched[0].label is None


class TestWriteProjectionCsv:
    POINTS = [
        ProjectedPoint(term_id="a", x=0.1, y=-2.5),
        ProjectedPoint(term_id="b", x=1.0 / 3.0, y=0.0),
    ]

    def test_plain_golden(self):
        content = write_projection_csv(self.POINTS, texts={"a": "alpha"})
        assert content == (
            "term_id,term_text,x,y\n"
            "a,alpha,0.1,-2.5\n"
            f"b,,{1.0 / 3.0!r},0.0\n"
        )

    def test_repr_floats_round_trip(self):
        content = write_projection_csv(self.POINTS)
        row = content.strip().split("\n")[2].split(",")
        assert float(row[2]) == 1.0 / 3.0  # bit-exact through text

    def test_optional_columns(self):
        tagged = tag_points(self.POINTS, clusters={"a": 0, "b": 1}, labels={"a": "L"})
        content = write_projection_csv(tagged)
        lines = content.strip().split("\n")
        assert lines[0] == "term_id,term_text,x,y,cluster,label"
        assert lines[1].endswith(",0,L")
        assert lines[2].endswith(",1,")


class TestScatterSvg:
    POINTS = [
        ProjectedPoint(term_id="a", x=0.0, y=0.0, cluster=0, label="one"),
        ProjectedPoint(term_id="b", x=1.0, y=1.0, cluster=1, label="<R&D>"),
        ProjectedPoint(term_id="c", x=0.5, y=0.25, cluster=1),
    ]

    def test_deterministic(self):
        assert scatter_svg(self.POINTS) == scatter_svg(self.POINTS)

    def test_one_circle_per_point(self):
        svg = scatter_svg(self.POINTS)
        assert svg.count("<circle") == 3
        assert svg.startswith("<svg ")
        assert svg.rstrip().endswith("</svg>")

    def test_cluster_colors_follow_the_palette(self):
        svg = scatter_svg(self.POINTS)
        assert 'fill="#4c78a8"' in svg  # cluster 0
        assert svg.count('fill="#f58518"') == 2  # cluster 1, twice

    def test_labels_are_xml_escaped(self):
        svg = scatter_svg(self.POINTS, show_labels=True)
        assert "&lt;R&amp;D&gt;" in svg
        assert "<R&D>" not in svg
        assert svg.count("<text") == 3  # unlabeled point falls back to its id
        assert ">c</text>" in svg

    def test_empty_input_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            scatter_svg([])
