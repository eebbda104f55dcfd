"""Dense head: forward/backward math, Adam, training, persistence."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from actionable.dataset import LabeledExample
from actionable.dense import (
    AdamState,
    DenseHead,
    DimensionMismatch,
    HIDDEN_UNITS,
    MissingEmbedding,
    ThresholdMode,
    TrainConfig,
    adam_step,
    backward,
    bce_loss,
    classify,
    classify_batch,
    dropout_mask,
    embedding_matrix,
    forward,
    forward_batch,
    glorot_init,
    head_from_json,
    head_to_json,
    load_head,
    loss_on_batch,
    save_head,
    train,
    write_history_csv,
)


def zero_head(d: int) -> DenseHead:
    return DenseHead(
        W1=np.zeros((HIDDEN_UNITS, d)),
        b1=np.zeros(HIDDEN_UNITS),
        W2=np.zeros((1, HIDDEN_UNITS)),
        b2=np.zeros(1),
        d=d,
    )


def test_zero_head_outputs_half():
    head = zero_head(4)
    assert forward(np.array([3.0, -1.0, 0.5, 2.0]), head) == pytest.approx(0.5)


def test_hand_example_sigma_one():
    head = zero_head(2)
    W1 = head.W1.copy()
    W1[0] = [1.0, -1.0]
    W2 = head.W2.copy()
    W2[0, 0] = 1.0
    head = DenseHead(W1=W1, b1=head.b1, W2=W2, b2=head.b2, d=2)
    p = forward(np.array([2.0, 1.0]), head)
    assert p == pytest.approx(0.7310585786, abs=1e-9)


def test_inference_ignores_dropout_rate():
    rng = np.random.default_rng(0)
    head = glorot_init(8, rng)
    x = rng.normal(size=8)
    assert forward(x, head) == forward(x, head, dropout_rate=0.2)  # no rng given


def test_forward_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        forward(np.zeros(5), zero_head(4))


def test_bce_values():
    assert bce_loss(0.5, 1) == pytest.approx(math.log(2), abs=1e-12)
    assert bce_loss(0.25, 0) == pytest.approx(0.2876820724, abs=1e-9)
    assert bce_loss(1.0, 1) == pytest.approx(1e-7, abs=1e-9)
    assert bce_loss(0.0, 0) == pytest.approx(1e-7, abs=1e-9)


def test_backward_zero_head_single_example():
    head = zero_head(3)
    grads = backward(np.array([[1.0, 2.0, 3.0]]), np.array([1.0]), head)
    assert grads.b2[0] == pytest.approx(-0.5)  # p - y at p = 0.5
    # ReLU of zero pre-activation kills the hidden path entirely
    assert np.all(grads.W1 == 0.0)


def test_b2_gradient_is_mean_residual():
    rng = np.random.default_rng(1)
    head = glorot_init(6, rng)
    X = rng.normal(size=(10, 6))
    y = rng.integers(0, 2, size=10).astype(float)
    p, _ = forward_batch(X, head)
    grads = backward(X, y, head)
    assert grads.b2[0] == pytest.approx(np.mean(p - y), abs=1e-12)


def test_duplicated_batch_matches_singleton():
    rng = np.random.default_rng(2)
    head = glorot_init(5, rng)
    x = rng.normal(size=(1, 5))
    y = np.array([1.0])
    single = backward(x, y, head)
    doubled = backward(np.vstack([x, x]), np.array([1.0, 1.0]), head)
    np.testing.assert_allclose(single.W1, doubled.W1, atol=1e-12)
    np.testing.assert_allclose(single.b2, doubled.b2, atol=1e-12)


def test_gradient_check_central_differences():
    # dropout disabled; h = 1e-5; >= 100 coordinates across all parameters
    rng = np.random.default_rng(7)
    d = 16
    head = glorot_init(d, rng)
    X = rng.normal(size=(8, d))
    y = rng.integers(0, 2, size=8).astype(float)
    grads = backward(X, y, head)
    analytic = {"W1": grads.W1, "b1": grads.b1, "W2": grads.W2, "b2": grads.b2}
    params = {"W1": head.W1, "b1": head.b1, "W2": head.W2, "b2": head.b2}
    h = 1e-5
    checked = 0
    worst = 0.0
    for name, arr in params.items():
        flat = arr.reshape(-1)
        count = min(40, flat.size)
        coords = rng.choice(flat.size, size=count, replace=False)
        for idx in coords:
            orig = flat[idx]
            flat[idx] = orig + h
            lp = loss_on_batch(
                DenseHead(W1=params["W1"], b1=params["b1"], W2=params["W2"], b2=params["b2"], d=d),
                X, y,
            )
            flat[idx] = orig - h
            lm = loss_on_batch(
                DenseHead(W1=params["W1"], b1=params["b1"], W2=params["W2"], b2=params["b2"], d=d),
                X, y,
            )
            flat[idx] = orig
            fd = (lp - lm) / (2 * h)
            a = analytic[name].reshape(-1)[idx]
            rel = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
            worst = max(worst, rel)
            checked += 1
    assert checked >= 100
    assert worst < 1e-4, f"max relative error {worst}"


def test_dropout_mask_expectation():
    rng = np.random.default_rng(3)
    x = np.array([1.0, -2.0, 0.5, 3.0, -0.25, 4.0, 1.5, -1.0])
    rate = 0.2
    n = 10_000
    total = np.zeros_like(x)
    for _ in range(n):
        total += x * dropout_mask(x.shape, rate, rng)
    mean = total / n
    # per-coordinate standard error of the scaled Bernoulli mask mean
    se = math.sqrt(rate * (1 - rate)) / (1 - rate) / math.sqrt(n)
    for got, want in zip(mean, x):
        assert abs(got - want) <= 3 * se * abs(want) + 1e-12


@settings(max_examples=50)
@given(st.integers(min_value=0, max_value=10_000))
def test_forward_stays_strictly_inside_unit_interval(seed):
    rng = np.random.default_rng(seed)
    head = glorot_init(8, rng)
    x = rng.normal(size=8)
    p = forward(x, head)
    assert 0.0 < p < 1.0


def test_adam_zero_gradient_keeps_params():
    params = {"w": np.array([1.0, -2.0])}
    state = AdamState()
    out = adam_step(params, {"w": np.zeros(2)}, state)
    np.testing.assert_array_equal(out["w"], params["w"])


def test_adam_first_step_magnitude():
    g = np.array([0.3, -0.7, 10.0])
    params = {"w": np.zeros(3)}
    out = adam_step(params, {"w": g}, AdamState(), lr=0.001)
    expected = -0.001 * g / (np.abs(g) + 1e-8)
    np.testing.assert_allclose(out["w"], expected, atol=1e-12)
    assert np.all(np.sign(out["w"]) == -np.sign(g))


def test_adam_momentum_decays_under_zero_gradient():
    state = AdamState()
    params = {"w": np.zeros(1)}
    params = adam_step(params, {"w": np.array([1.0])}, state)
    m1 = state.m["w"].copy()
    adam_step(params, {"w": np.zeros(1)}, state)
    np.testing.assert_allclose(state.m["w"], 0.9 * m1, atol=1e-15)
    adam_step(params, {"w": np.zeros(1)}, state)
    np.testing.assert_allclose(state.m["w"], 0.81 * m1, atol=1e-15)


def test_classify_boundary_rule():
    assert classify(0.7, 0.5) == 1
    assert classify(0.5, 0.5) == 1
    assert classify(0.49, 0.5) == 0
    with pytest.raises(ValueError):
        classify(0.5, 0.0)
    with pytest.raises(ValueError):
        classify(0.5, 1.0)


@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.01, max_value=0.99),
)
def test_classify_monotone(p1, p2, threshold):
    lo, hi = sorted((p1, p2))
    assert classify(lo, threshold) <= classify(hi, threshold)


def test_logit_scaling_preserves_ordering():
    rng = np.random.default_rng(4)
    head = glorot_init(6, rng)
    scaled = DenseHead(W1=head.W1, b1=head.b1, W2=head.W2 * 3.0, b2=head.b2 * 3.0, d=6)
    xs = rng.normal(size=(20, 6))
    p, _ = forward_batch(xs, head)
    q, _ = forward_batch(xs, scaled)
    assert list(np.argsort(p)) == list(np.argsort(q))


def _toy_clusters(n_half=100, d=16, seed=0):
    rng = np.random.default_rng(seed)
    mu = np.full(d, 2.0)
    X = np.vstack(
        [rng.normal(mu, 1.0, size=(n_half, d)), rng.normal(-mu, 1.0, size=(n_half, d))]
    )
    y = [1] * n_half + [0] * n_half
    examples = [LabeledExample(f"pt{i}", y[i], f"e#{i}") for i in range(2 * n_half)]
    emb = {f"pt{i}": X[i] for i in range(2 * n_half)}
    return examples, emb


def test_train_history_length_matches_epochs():
    examples, emb = _toy_clusters(20, d=8)
    _, history, _ = train(examples, [], emb, TrainConfig(epochs=3, seed=0))
    assert len(history) == 3


def test_train_separable_clusters_to_high_accuracy():
    examples, emb = _toy_clusters(100, d=16)
    head, history, _ = train(examples, [], emb, TrainConfig(seed=1))
    assert len(history) == 10
    assert history[-1].train_acc >= 0.99
    assert history[-1].train_loss < history[0].train_loss


def test_train_bit_identical_under_seed():
    examples, emb = _toy_clusters(30, d=8)
    val = examples[:10]
    h1, hist1, t1 = train(examples, val, emb, TrainConfig(epochs=4, seed=5))
    h2, hist2, t2 = train(examples, val, emb, TrainConfig(epochs=4, seed=5))
    assert hist1 == hist2 and t1 == t2
    np.testing.assert_array_equal(h1.W1, h2.W1)
    np.testing.assert_array_equal(h1.b1, h2.b1)
    np.testing.assert_array_equal(h1.W2, h2.W2)
    np.testing.assert_array_equal(h1.b2, h2.b2)


def test_train_missing_embedding_names_example():
    examples, emb = _toy_clusters(5, d=8)
    del emb["pt3"]
    with pytest.raises(MissingEmbedding, match="e#3"):
        train(examples, [], emb, TrainConfig(epochs=1, seed=0))


def test_threshold_modes():
    examples, emb = _toy_clusters(30, d=8)
    val = examples[10:30]
    _, _, fixed = train(examples, val, emb, TrainConfig(epochs=2, seed=2))
    assert fixed == 0.5
    head, _, med = train(
        examples, val, emb,
        TrainConfig(epochs=2, seed=2, threshold_mode=ThresholdMode.VALIDATION_MEDIAN),
    )
    X_val, _ = embedding_matrix(val, emb)
    p_val, _ = forward_batch(X_val, head)
    assert med == pytest.approx(float(np.median(p_val)))
    assert 0.0 < med < 1.0


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(dropout_rate=1.0)
    with pytest.raises(ValueError):
        TrainConfig(threshold=0.0)


def test_head_persistence_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    head = glorot_init(8, rng)
    path = tmp_path / "head.json"
    save_head(path, head, 0.5)
    loaded, threshold = load_head(path)
    assert threshold == 0.5
    np.testing.assert_array_equal(loaded.W1, head.W1)
    np.testing.assert_array_equal(loaded.b2, head.b2)
    first = path.read_bytes()
    save_head(path, loaded, threshold)
    assert path.read_bytes() == first


def test_head_json_rejects_unknown_version():
    rng = np.random.default_rng(6)
    payload = head_to_json(glorot_init(8, rng), 0.5)
    payload["format_version"] = 2
    with pytest.raises(ValueError):
        head_from_json(payload)


def test_history_csv_rows(tmp_path):
    examples, emb = _toy_clusters(10, d=8)
    _, history, _ = train(examples, examples[:4], emb, TrainConfig(epochs=5, seed=0))
    path = tmp_path / "history.csv"
    write_history_csv(history, path)
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "epoch,train_loss,train_acc,val_loss,val_acc"
    assert len(lines) == 6
    assert lines[1].startswith("1,")


def test_classify_batch_matches_scalar():
    p = np.array([0.1, 0.5, 0.9])
    np.testing.assert_array_equal(classify_batch(p, 0.5), [0, 1, 1])
