"""
Tests de la régression logistique un-contre-tous et de la règle t-sur-T
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import minimize

from bifb.classify import (
    DecisionRule, OvaModel, TrainConfig, augment, cost, decide, gradient, gradient_descent,
    predict_candidate, sigmoid, train_ova,
)
from bifb.errors import DimensionMismatch, InvalidDecisionRule, MissingClass, NonPositiveParameter


def _random_instance(rng, m=12, n=4):
    X_aug = augment(rng.standard_normal((m, n)))
    y = (rng.random(m) > 0.5).astype(float)
    theta = rng.standard_normal(n + 1)
    return theta, X_aug, y


def _blobs(rng, centers, per_class=20, spread=0.3):
    X = np.vstack([c + spread * rng.standard_normal((per_class, len(c))) for c in centers])
    labels = np.repeat(np.arange(len(centers)), per_class)
    return X, labels


def _model(thetas):
    thetas = np.asarray(thetas, dtype=float)
    n = thetas.shape[1] - 1
    return OvaModel(thetas=thetas, lam=0.0, class_frequencies_hz=tuple(8.0 + 2 * k for k in range(len(thetas))),
                    feature_mean=np.zeros(n), feature_scale=np.ones(n))


class TestSigmoid:

    def test_zero(self):
        assert sigmoid(0.0) == 0.5

    def test_symmetry(self):
        z = np.random.default_rng(0).uniform(-50, 50, 1000)
        np.testing.assert_allclose(sigmoid(z) + sigmoid(-z), 1.0, atol=1e-12)

    def test_large_negative_is_stable(self):
        value = sigmoid(-1000.0)
        assert not math.isnan(value)
        assert 0.0 <= value <= 1e-300


class TestCost:

    def test_zero_weights_cost_ln2(self):
        X_aug = augment(np.random.default_rng(0).standard_normal((10, 3)))
        y = np.array([0.0, 1.0] * 5)
        assert cost(np.zeros(4), X_aug, y, 0.0) == pytest.approx(math.log(2))
        assert cost(np.zeros(4), X_aug, y, 5.0) == pytest.approx(math.log(2))

    def test_separated_cost_vanishes(self):
        X_aug = augment(np.array([[1.0]]))
        y = np.array([1.0])
        costs = [cost(np.array([0.0, s]), X_aug, y, 0.0) for s in (1.0, 5.0, 20.0, 100.0)]
        assert all(b < a for a, b in zip(costs, costs[1:]))
        assert costs[-1] < 1e-40

    def test_bias_not_penalized(self):
        X_aug = augment(np.zeros((4, 2)))
        y = np.ones(4)
        theta = np.array([3.0, 0.0, 0.0])
        assert cost(theta, X_aug, y, 0.0) == cost(theta, X_aug, y, 100.0)

    def test_convexity(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            theta1, X_aug, y = _random_instance(rng)
            theta2 = rng.standard_normal(theta1.shape)
            lam, alpha = rng.uniform(0, 2), rng.uniform()
            mixed = cost(alpha * theta1 + (1 - alpha) * theta2, X_aug, y, lam)
            bound = alpha * cost(theta1, X_aug, y, lam) + (1 - alpha) * cost(theta2, X_aug, y, lam)
            assert mixed <= bound + 1e-9


class TestGradient:

    def test_zero_weights_positive_labels(self):
        X_aug = np.array([[1.0, 0.0, 0.0]] * 3)
        np.testing.assert_allclose(gradient(np.zeros(3), X_aug, np.ones(3), 0.0), [-0.5, 0.0, 0.0])

    def test_finite_differences(self):
        rng = np.random.default_rng(7)
        step = 1e-5
        for _ in range(50):
            theta, X_aug, y = _random_instance(rng)
            lam = rng.uniform(0, 2)
            numeric = np.array([
                (cost(theta + step * e, X_aug, y, lam) - cost(theta - step * e, X_aug, y, lam)) / (2 * step)
                for e in np.eye(theta.size)
            ])
            np.testing.assert_allclose(gradient(theta, X_aug, y, lam), numeric, rtol=1e-6, atol=1e-9)

    def test_penalty_derivative(self):
        theta, X_aug, y = _random_instance(np.random.default_rng(11))
        m = X_aug.shape[0]
        diff = gradient(theta, X_aug, y, 10.0) - gradient(theta, X_aug, y, 0.0)
        assert diff[0] == 0.0
        np.testing.assert_allclose(diff[1:], (10.0 / m) * theta[1:], rtol=1e-10, atol=1e-14)


class TestTraining:

    def test_separable_training_accuracy(self):
        X, labels = _blobs(np.random.default_rng(0), [np.array([0.0, 0.0]), np.array([3.0, 3.0])])
        model = train_ova(X, labels, (8.0, 14.0), TrainConfig(lam=0.0))
        predicted = np.argmax(model.scores(X), axis=1)
        assert np.array_equal(predicted, labels)

    def test_duplicated_data_same_model(self):
        X, labels = _blobs(np.random.default_rng(1), [np.zeros(3), np.ones(3), -np.ones(3)], per_class=8)
        cfg = TrainConfig(max_iterations=500)
        single = train_ova(X, labels, (8.0, 14.0, 28.0), cfg)
        double = train_ova(np.vstack([X, X]), np.concatenate([labels, labels]), (8.0, 14.0, 28.0), cfg)
        np.testing.assert_allclose(double.thetas, single.thetas, rtol=1e-6, atol=1e-9)

    def test_matches_independent_optimizer(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            X, labels = _blobs(rng, [rng.standard_normal(4) for _ in range(3)], per_class=10, spread=1.0)
            cfg = TrainConfig(lam=0.5, max_iterations=20000, convergence_tol=1e-13)
            model = train_ova(X, labels, (8.0, 14.0, 28.0), cfg)
            X_aug = augment(model.standardize(X))
            for c in range(3):
                y = (labels == c).astype(float)
                oracle = minimize(cost, np.zeros(X_aug.shape[1]), args=(X_aug, y, cfg.lam), jac=gradient,
                                  method="L-BFGS-B", options={"gtol": 1e-12, "ftol": 1e-15, "maxiter": 10000})
                assert cost(model.thetas[c], X_aug, y, cfg.lam) == pytest.approx(oracle.fun, abs=1e-4)

    def test_deterministic(self):
        X, labels = _blobs(np.random.default_rng(2), [np.zeros(2), np.ones(2)])
        cfg = TrainConfig(max_iterations=200)
        a = train_ova(X, labels, (8.0, 14.0), cfg)
        b = train_ova(X, labels, (8.0, 14.0), cfg)
        assert np.array_equal(a.thetas, b.thetas)

    def test_missing_class(self):
        X = np.random.default_rng(0).standard_normal((6, 2))
        with pytest.raises(MissingClass):
            train_ova(X, [0, 0, 0, 1, 1, 1], (8.0, 14.0, 28.0), TrainConfig())

    def test_label_count_mismatch(self):
        with pytest.raises(DimensionMismatch):
            train_ova(np.zeros((4, 2)), [0, 1, 0], (8.0, 14.0), TrainConfig())

    def test_non_convergence_flagged(self, caplog):
        X, labels = _blobs(np.random.default_rng(3), [np.zeros(2), np.ones(2)])
        model = train_ova(X, labels, (8.0, 14.0), TrainConfig(max_iterations=2))
        assert model.converged == [False, False]
        assert "convergence" in caplog.text

    def test_gradient_descent_keeps_best_iterate(self):
        X_aug = augment(np.random.default_rng(4).standard_normal((20, 2)))
        y = (X_aug[:, 1] > 0).astype(float)
        theta, final_cost, _ = gradient_descent(X_aug, y, TrainConfig(learning_rate=0.1, max_iterations=50))
        assert final_cost == pytest.approx(cost(theta, X_aug, y, 0.1))
        assert final_cost < math.log(2)

    def test_model_round_trip(self, tmp_path):
        X, labels = _blobs(np.random.default_rng(6), [np.zeros(2), np.ones(2), 2 * np.ones(2)])
        model = train_ova(X, labels, (8.0, 14.0, 28.0), TrainConfig(max_iterations=100))
        loaded = OvaModel.load(model.save(tmp_path / "models" / "S01.json"))
        assert np.array_equal(loaded.thetas, model.thetas)
        assert np.array_equal(loaded.feature_mean, model.feature_mean)
        assert np.array_equal(loaded.feature_scale, model.feature_scale)
        assert loaded.class_frequencies_hz == model.class_frequencies_hz


class TestFeatureWeights:

    CFG = TrainConfig(lam=5.0, max_iterations=400)
    GAINS = np.array([1.0, 0.25, 0.5])

    def _data(self):
        return _blobs(np.random.default_rng(7), [np.zeros(3), np.ones(3), np.array([2.0, 0.0, 1.0])],
                      per_class=10, spread=0.8)

    def test_zscore_alone_cancels_gains(self):
        X, labels = self._data()
        plain = train_ova(X, labels, (8.0, 14.0, 28.0), self.CFG)
        scaled = train_ova(X * self.GAINS, labels, (8.0, 14.0, 28.0), self.CFG)
        np.testing.assert_allclose(scaled.thetas, plain.thetas, rtol=1e-6, atol=1e-9)

    def test_weights_survive_standardization(self):
        X, labels = self._data()
        plain = train_ova(X, labels, (8.0, 14.0, 28.0), self.CFG)
        weighted = train_ova(X * self.GAINS, labels, (8.0, 14.0, 28.0), self.CFG, feature_weights=self.GAINS)
        assert not np.allclose(weighted.thetas, plain.thetas, rtol=1e-3)
        # X̃ = w·z : la colonne pondérée garde l'écart-type w_j
        np.testing.assert_allclose(weighted.standardize(X * self.GAINS).std(axis=0), self.GAINS, rtol=1e-9)

    def test_unit_weights_are_neutral(self):
        X, labels = self._data()
        plain = train_ova(X, labels, (8.0, 14.0, 28.0), self.CFG)
        unit = train_ova(X, labels, (8.0, 14.0, 28.0), self.CFG, feature_weights=np.ones(3))
        assert np.array_equal(unit.thetas, plain.thetas)

    def test_weights_ignored_without_standardization(self):
        X, labels = self._data()
        cfg = replace(self.CFG, feature_standardization=False)
        plain = train_ova(X, labels, (8.0, 14.0, 28.0), cfg)
        weighted = train_ova(X, labels, (8.0, 14.0, 28.0), cfg, feature_weights=self.GAINS)
        assert np.array_equal(weighted.thetas, plain.thetas)

    def test_invalid_weights(self):
        X, labels = self._data()
        with pytest.raises(DimensionMismatch):
            train_ova(X, labels, (8.0, 14.0, 28.0), self.CFG, feature_weights=[1.0, 1.0])
        with pytest.raises(NonPositiveParameter):
            train_ova(X, labels, (8.0, 14.0, 28.0), self.CFG, feature_weights=[1.0, 0.0, 1.0])


class TestPredictCandidate:

    def test_dominant_bias(self):
        model = _model([[5.0, 0.0, 0.0], [-5.0, 0.0, 0.0], [-5.0, 0.0, 0.0]])
        for x in np.random.default_rng(0).standard_normal((10, 2)):
            assert predict_candidate(model, x)[0] == 0

    def test_tie_goes_to_lower_index(self):
        model = _model([[-5.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
        assert predict_candidate(model, np.array([0.3]))[0] == 1

    def test_probabilities_are_independent_sigmoids(self):
        model = _model([[0.5, 1.0], [0.2, -1.0], [1.0, 0.0]])
        _, probabilities = predict_candidate(model, np.array([0.7]))
        assert np.all((probabilities > 0) & (probabilities < 1))
        assert probabilities.sum() != pytest.approx(1.0)

    def test_dimension_checked(self):
        model = _model([[0.0, 1.0], [0.0, -1.0]])
        with pytest.raises(DimensionMismatch):
            predict_candidate(model, np.array([1.0, 2.0]))


class TestDecide:

    def test_three_of_four(self):
        assert decide([0, 0, 1, 0], DecisionRule(3, 4)) == (0, 3)

    def test_truncated_window_at_start(self):
        assert decide([0, 0, 0], DecisionRule(3, 4)) == (0, 2)

    def test_alternating_never_decides(self):
        assert decide([0, 1, 0, 1, 0, 1], DecisionRule(3, 4)) is None

    def test_empty_stream(self):
        assert decide([], DecisionRule(3, 4)) is None

    def test_invalid_rule(self):
        with pytest.raises(InvalidDecisionRule):
            DecisionRule(t_required=5, window_T=4)
        with pytest.raises(InvalidDecisionRule):
            DecisionRule(t_required=0, window_T=4)

    def test_matches_brute_force_window(self):
        rng = np.random.default_rng(13)

        def brute_force(stream, t, T):
            for i in range(len(stream)):
                window = stream[max(0, i - T + 1):i + 1]
                for c in set(window):
                    if window.count(c) >= t:
                        return c, i
            return None

        for _ in range(10000):
            T = int(rng.integers(1, 6))
            t = int(rng.integers(1, T + 1))
            stream = [int(c) for c in rng.integers(0, 3, size=int(rng.integers(0, 12)))]
            assert decide(stream, DecisionRule(t, T)) == brute_force(stream, t, T)
