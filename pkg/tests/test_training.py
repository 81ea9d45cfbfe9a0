from __future__ import annotations

import math

import numpy as np
import pytest

from backcompat.data import Dataset
from backcompat.errors import EmptyDataset, MissingReferenceModel
from backcompat.models import LINEAR, MLP, ModelParams, params_equal, predict
from backcompat.synth import make_blobs_binary
from backcompat.training import (
    EpochEvalLog,
    TrainConfig,
    load_epoch_log,
    loss,
    loss_and_grads,
    save_epoch_log,
    train,
)


def cfg(**kw) -> TrainConfig:
    base = dict(learning_rate=0.1, epochs=10, batch_size=32, seed=1234)
    base.update(kw)
    return TrainConfig(**base)


def tiny_dataset(n=60, seed=0, dim=2) -> Dataset:
    return make_blobs_binary(n, seed=seed, sep=1.0, dim=dim)


def manual_cross_entropy(params: ModelParams, x: np.ndarray, label: int) -> float:
    # direct formula: -log softmax(x W^T + b)[label index]
    w, b = params.layers
    logits = x @ w.T + b
    z = logits - logits.max()
    return float(-(z[list(params.label_set).index(label)] - math.log(np.exp(z).sum())))


class TestLoss:
    def test_reduces_to_plain_cross_entropy(self):
        rng = np.random.default_rng(1)
        params = ModelParams(
            arch=LINEAR, label_set=(0, 1, 2), feature_dim=4,
            layers=(rng.normal(size=(3, 4)), rng.normal(size=3)),
        )
        x = rng.normal(size=(5, 4))
        y = np.array([0, 1, 2, 1, 0])
        expected = np.mean([manual_cross_entropy(params, x[i], int(y[i])) for i in range(5)])
        assert loss(params, (x, y), cfg(lambda_c=0.0)) == pytest.approx(expected, rel=1e-12)

    def test_reference_correct_everywhere_doubles_loss(self):
        rng = np.random.default_rng(2)
        params = ModelParams(
            arch=LINEAR, label_set=(0, 1), feature_dim=2,
            layers=(rng.normal(size=(2, 2)), rng.normal(size=2)),
        )
        # reference predicts class (x[0] > 0); label every point accordingly
        ref = ModelParams(
            arch=LINEAR, label_set=(0, 1), feature_dim=2,
            layers=(np.array([[-5.0, 0.0], [5.0, 0.0]]), np.zeros(2)),
        )
        x = rng.normal(size=(8, 2))
        y = (x[:, 0] > 0).astype(int)
        plain = loss(params, (x, y), cfg(lambda_c=0.0))
        penalized = loss(params, (x, y), cfg(lambda_c=1.0, reference_model=ref))
        assert penalized == pytest.approx(2.0 * plain, rel=1e-12)

    def test_two_example_hand_evaluation(self):
        # lambda_c = 2, reference correct on example 1 only -> (3*l1 + l2)/2
        params = ModelParams(
            arch=LINEAR, label_set=(0, 1), feature_dim=2,
            layers=(np.array([[0.3, -0.2], [-0.1, 0.4]]), np.array([0.05, -0.05])),
        )
        ref = ModelParams(
            arch=LINEAR, label_set=(0, 1), feature_dim=2,
            layers=(np.array([[5.0, 0.0], [-5.0, 0.0]]), np.zeros(2)),
        )  # predicts 0 iff x0 > 0
        x = np.array([[1.0, 0.5], [1.0, -0.5]])
        y = np.array([0, 1])  # ref right on example 0, wrong on example 1
        l1 = manual_cross_entropy(params, x[0], 0)
        l2 = manual_cross_entropy(params, x[1], 1)
        got = loss(params, (x, y), cfg(lambda_c=2.0, reference_model=ref))
        assert got == pytest.approx((3 * l1 + l2) / 2, rel=1e-12)

    def test_monotone_in_lambda(self):
        rng = np.random.default_rng(3)
        params = ModelParams(
            arch=LINEAR, label_set=(0, 1), feature_dim=2,
            layers=(rng.normal(size=(2, 2)), rng.normal(size=2)),
        )
        ref = ModelParams(
            arch=LINEAR, label_set=(0, 1), feature_dim=2,
            layers=(np.array([[5.0, 0.0], [-5.0, 0.0]]), np.zeros(2)),
        )
        x = rng.normal(size=(16, 2))
        y = rng.integers(0, 2, 16)
        values = [loss(params, (x, y), cfg(lambda_c=lam, reference_model=ref)) for lam in (0, 0.5, 1, 2, 4)]
        assert all(b >= a for a, b in zip(values, values[1:]))
        # equality would need the reference wrong everywhere
        ref_correct = (ref.layers[0] @ x.T).argmax(axis=0) == y
        if ref_correct.any():
            assert values[-1] > values[0]
        # ... and with such a reference the penalty is inert at any lambda
        y_anti = 1 - (ref.layers[0] @ x.T).argmax(axis=0)
        inert = [loss(params, (x, y_anti), cfg(lambda_c=lam, reference_model=ref)) for lam in (0, 4)]
        assert inert[0] == inert[1]

    def test_missing_reference_model(self):
        with pytest.raises(MissingReferenceModel):
            cfg(lambda_c=0.5)


class TestGradients:
    def check_gradients(self, arch, hidden, n_classes=3, dim=4, lam=1.5, seed=0):
        rng = np.random.default_rng(seed)
        if arch == LINEAR:
            layers = (rng.normal(size=(n_classes, dim)), rng.normal(size=n_classes))
        else:
            layers = (
                rng.normal(size=(hidden, dim)),
                rng.normal(size=hidden),
                rng.normal(size=(n_classes, hidden)),
                rng.normal(size=n_classes),
            )
        params = ModelParams(
            arch=arch, label_set=tuple(range(n_classes)), feature_dim=dim,
            layers=layers, hidden_units=hidden,
        )
        x = rng.normal(size=(7, dim))
        y_idx = rng.integers(0, n_classes, 7)
        weights = 1.0 + lam * rng.integers(0, 2, 7).astype(float)  # the lambda_c term

        _, grads = loss_and_grads(params, x, y_idx, weights)
        eps = 1e-6
        worst = 0.0
        for li, layer in enumerate(params.layers):
            flat = layer.copy().reshape(-1)
            for k in range(flat.size):
                for sign, store in ((1, "plus"), (-1, "minus")):
                    bumped = flat.copy()
                    bumped[k] += sign * eps
                    new_layers = list(params.layers)
                    new_layers[li] = bumped.reshape(layer.shape)
                    p = ModelParams(
                        arch=arch, label_set=params.label_set, feature_dim=dim,
                        layers=tuple(new_layers), hidden_units=hidden,
                    )
                    value, _ = loss_and_grads(p, x, y_idx, weights)
                    if store == "plus":
                        up = value
                    else:
                        down = value
                numeric = (up - down) / (2 * eps)
                analytic = grads[li].reshape(-1)[k]
                scale = max(abs(numeric), abs(analytic), 1e-8)
                worst = max(worst, abs(numeric - analytic) / scale)
        return worst

    def test_linear_gradients_match_central_differences(self):
        assert self.check_gradients(LINEAR, None) < 1e-4

    def test_mlp_gradients_match_central_differences(self):
        assert self.check_gradients(MLP, hidden=5) < 1e-4


class TestTrain:
    def test_separable_blobs_reach_99_percent(self):
        # means +/-(2,2), unit variance, 500 per class; verified against a
        # convex-solver oracle (scikit-learn) on the same data
        d = make_blobs_binary(1000, seed=77, sep=2.0)
        sklearn = pytest.importorskip("sklearn.linear_model")
        oracle = sklearn.LogisticRegression().fit(d.features, d.labels)
        assert oracle.score(d.features, d.labels) >= 0.99

        params, _ = train(d, cfg(learning_rate=0.1, epochs=50, batch_size=32, seed=5))
        assert predict(params, d).accuracy >= 0.99

    def test_zero_epochs_is_identity(self):
        d = tiny_dataset()
        warm, _ = train(d, cfg(epochs=3, seed=9))
        out, logs = train(d, cfg(epochs=0, warm_start_from=warm))
        assert params_equal(out, warm)
        assert logs == []

    def test_seed_determinism(self):
        d = tiny_dataset(200)
        a, _ = train(d, cfg(seed=42))
        b, _ = train(d, cfg(seed=42))
        assert params_equal(a, b)

    def test_different_seeds_differ_on_overlap(self):
        d = make_blobs_binary(300, seed=3, sep=0.5)
        a, _ = train(d, cfg(seed=1))
        b, _ = train(d, cfg(seed=2))
        assert not params_equal(a, b)

    def test_warm_start_used_exactly(self):
        d = tiny_dataset()
        warm, _ = train(d, cfg(seed=11, epochs=2))
        # one epoch from the warm start must differ from one epoch from cold
        warm_out, _ = train(d, cfg(seed=11, epochs=1, warm_start_from=warm))
        cold_out, _ = train(d, cfg(seed=11, epochs=1))
        assert not params_equal(warm_out, cold_out)

    def test_eval_log_dimensions(self):
        d = tiny_dataset(80)
        eval_set = tiny_dataset(30, seed=5)
        _, logs = train(d, cfg(epochs=7), [eval_set])
        assert logs[0].correct.shape == (7, 30)
        assert logs[0].example_ids == eval_set.ids

    def test_empty_dataset_rejected(self):
        d = tiny_dataset(4)
        empty = d.subset(np.array([], dtype=int))
        with pytest.raises(EmptyDataset):
            train(empty, cfg())

    def test_mlp_trains(self):
        d = make_blobs_binary(400, seed=8, sep=1.5)
        params, _ = train(d, cfg(arch=MLP, hidden_units=8, epochs=30, learning_rate=0.05))
        assert predict(params, d).accuracy > 0.9

    def test_reference_indicator_frozen_once(self):
        # training with a reference wrong on every example matches lambda=0
        d = tiny_dataset(100, seed=21)
        flipped = Dataset(
            ids=d.ids, features=d.features, labels=1 - d.labels, label_set=d.label_set
        )
        ref, _ = train(d, cfg(seed=33, epochs=20))  # accurate on d => wrong on flipped
        assert predict(ref, flipped).accuracy < 0.2
        lam0, _ = train(flipped, cfg(seed=50, epochs=5))
        lam4, _ = train(flipped, cfg(seed=50, epochs=5, lambda_c=4.0, reference_model=ref))
        pred_ref = predict(ref, flipped)
        if pred_ref.accuracy == 0.0:
            assert params_equal(lam0, lam4)


class TestEpochLogIO:
    def test_round_trip(self, tmp_path):
        log = EpochEvalLog(
            dataset_id="val",
            example_ids=("a", "b", "c"),
            correct=np.array([[1, 0, 1], [0, 0, 1], [1, 1, 1]], dtype=bool),
        )
        path = tmp_path / "epochs.jsonl"
        save_epoch_log(log, path)
        loaded = load_epoch_log(path)
        assert loaded.dataset_id == "val"
        assert loaded.example_ids == log.example_ids
        assert np.array_equal(loaded.correct, log.correct)

    def test_epoch_lines_sorted_on_load(self, tmp_path):
        path = tmp_path / "epochs.jsonl"
        path.write_text(
            '{"dataset_id": "v", "example_ids": ["a", "b"]}\n'
            '{"epoch": 1, "correct_ids": ["b"]}\n'
            '{"epoch": 0, "correct_ids": ["a", "b"]}\n',
            encoding="utf-8",
        )
        loaded = load_epoch_log(path)
        assert np.array_equal(loaded.correct, np.array([[True, True], [False, True]]))
