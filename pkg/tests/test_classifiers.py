import math

import numpy as np
import pytest

from ontoexplain.classifiers import (
    KNNModel,
    LRModel,
    knn_predict,
    knn_train,
    log_likelihood,
    log_likelihood_grad,
    lr_boundary_distance,
    lr_predict,
    lr_train,
    sigmoid,
)
from ontoexplain.data_model import Dataset, Feature, FeatureSchema, standardize
from ontoexplain.errors import TrainingError
from oracles import hyperplane_distance_bruteforce


def toy(points, labels):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    s = FeatureSchema(tuple(Feature(f"x{j}") for j in range(pts.shape[1])), "y", ("0", "1"), "1")
    return Dataset(s, pts, np.asarray(labels), tuple({} for _ in pts))


class TestSigmoid:
    def test_ln3(self):
        assert sigmoid(math.log(3)) == pytest.approx(0.75, abs=1e-15)

    def test_extremes_finite(self):
        out = sigmoid(np.array([-1000.0, 1000.0]))
        assert out.tolist() == [0.0, 1.0]


class TestLogistic:
    def test_separable_sign(self):
        ds = toy([-2, -1.5, -1, -0.5, 0.5, 1, 1.5, 2], [0, 0, 0, 0, 1, 1, 1, 1])
        m = lr_train(ds, iterations=500, ridge=0.01)
        assert m.weights[1] > 0

    def test_single_class(self):
        with pytest.raises(TrainingError, match="single-class training set"):
            lr_train(toy([1, 2, 3], [1, 1, 1]))

    def test_haberman_beats_majority(self, haberman):
        z, sc = standardize(haberman)
        m = lr_train(z, scaler=sc)
        acc = float((m.predict_labels(z.points) == z.labels).mean())
        baseline = max(np.bincount(z.labels)) / z.m
        assert baseline == pytest.approx(225 / 306)
        assert acc > baseline

    def test_zero_weights_half(self):
        m = LRModel(np.zeros(3))
        p, label = lr_predict(m, np.array([4.0, -2.0]))
        assert (p, label) == (0.5, 1)

    def test_logit_ln3(self):
        m = LRModel(np.array([math.log(3), 0.0]))
        p, label = lr_predict(m, np.array([7.0]))
        assert p == pytest.approx(0.75) and label == 1

    def test_monotone_in_positive_weight(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            w = rng.standard_normal(4)
            x = rng.standard_normal(3)
            j = int(np.argmax(w[1:]))
            if w[1 + j] <= 0:
                continue
            m = LRModel(w)
            x2 = x.copy()
            x2[j] += abs(rng.standard_normal()) + 0.1
            assert lr_predict(m, x2)[0] >= lr_predict(m, x)[0]

    def test_probability_label_consistent(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            m = LRModel(rng.standard_normal(3) * 3)
            p, label = lr_predict(m, rng.standard_normal(2) * 3)
            assert 0 < p < 1
            assert (p >= 0.5) == (label == 1)

    def test_scaling_keeps_labels(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((200, 3))
        for c in (0.1, 2.0, 50.0):
            w = rng.standard_normal(4)
            assert np.array_equal(LRModel(w).predict_labels(X), LRModel(c * w).predict_labels(X))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            lr_predict(LRModel(np.zeros(3)), np.zeros(3))

    def test_gradient_finite_differences(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((60, 3))
        y = (rng.random(60) < 0.4).astype(float)
        for _ in range(5):
            w = rng.standard_normal(4)
            g = log_likelihood_grad(w, X, y, ridge=0.1)
            num = np.array([
                (log_likelihood(w + h, X, y, 0.1) - log_likelihood(w - h, X, y, 0.1)) / 2e-6
                for h in np.eye(4) * 1e-6
            ])
            assert np.linalg.norm(g - num) <= 1e-5 * np.linalg.norm(num)


class TestBoundaryDistance:
    def test_closed_form(self):
        m = LRModel(np.array([0.0, 3.0, 4.0]))
        assert lr_boundary_distance(m, np.array([3.0, 4.0])) == pytest.approx(5.0)

    def test_on_plane(self):
        m = LRModel(np.array([-1.0, 1.0, 1.0]))
        assert lr_boundary_distance(m, np.array([0.25, 0.75])) == 0.0

    def test_zero_weights_rejected(self):
        with pytest.raises(TrainingError):
            lr_boundary_distance(LRModel(np.array([1.0, 0.0])), np.array([2.0]))

    def test_matches_projection_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            n = int(rng.integers(1, 6))
            w = rng.standard_normal(n + 1)
            x = rng.standard_normal(n) * 3
            ref = hyperplane_distance_bruteforce(w, x)
            assert lr_boundary_distance(LRModel(w), x) == pytest.approx(ref, rel=1e-6, abs=1e-12)


class TestKNN:
    def model(self, k):
        pts = np.array([[0.0], [1.0], [2.0], [10.0]])
        return KNNModel(k, pts, np.array([1, 1, 0, 0]))

    def test_k1_nearest(self):
        assert knn_predict(self.model(1), [1.9]) == 0
        assert knn_predict(self.model(1), [0.2]) == 1

    def test_k3_majority(self):
        assert knn_predict(self.model(3), [0.9]) == 1

    def test_k2_tie_goes_to_zero(self):
        # neighbours of 1.4 are rows 1 (label 1) and 2 (label 0)
        assert knn_predict(self.model(2), [1.4]) == 0

    def test_distance_tie_lowest_index(self):
        m = KNNModel(1, np.array([[1.0], [-1.0]]), np.array([0, 1]))
        assert knn_predict(m, [0.0]) == 0

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            KNNModel(5, np.zeros((3, 1)), np.zeros(3, dtype=int))

    def test_permutation_invariance_without_ties(self):
        rng = np.random.default_rng(7)
        X = rng.standard_normal((80, 3))
        y = (X[:, 0] + 0.3 * rng.standard_normal(80) > 0).astype(int)
        perm = rng.permutation(80)
        a = knn_train(toy(X, y), 5)
        b = knn_train(toy(X[perm], y[perm]), 5)
        Q = rng.standard_normal((40, 3))
        assert np.array_equal(a.predict_labels(Q), b.predict_labels(Q))
