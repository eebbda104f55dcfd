"""Dense classification head over frozen sentence embeddings.

Architecture: inverted dropout on the input embedding, a 64-unit ReLU layer,
and a 1-unit sigmoid output, trained with Adam on mean binary cross-entropy.
Everything (init, shuffling, dropout masks) draws from one seeded generator
in a fixed order, so a (data, config, seed) triple determines the trained
head bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dataset import LabeledExample

HIDDEN_UNITS = 64
BCE_CLIP = 1e-7


class DimensionMismatch(ValueError):
    pass


class MissingEmbedding(LookupError):
    """Raised when an example has no embedding; carries the example origin."""


@dataclass(frozen=True)
class DenseHead:
    W1: np.ndarray  # (64, d)
    b1: np.ndarray  # (64,)
    W2: np.ndarray  # (1, 64)
    b2: np.ndarray  # (1,)
    d: int

    def __post_init__(self) -> None:
        if self.W1.shape != (HIDDEN_UNITS, self.d):
            raise DimensionMismatch(f"W1 shape {self.W1.shape} != (64, {self.d})")
        if self.b1.shape != (HIDDEN_UNITS,):
            raise DimensionMismatch(f"b1 shape {self.b1.shape}")
        if self.W2.shape != (1, HIDDEN_UNITS):
            raise DimensionMismatch(f"W2 shape {self.W2.shape}")
        if self.b2.shape != (1,):
            raise DimensionMismatch(f"b2 shape {self.b2.shape}")
        for arr in (self.W1, self.b1, self.W2, self.b2):
            if not np.all(np.isfinite(arr)):
                raise ValueError("head weights must be finite")


class ThresholdMode(str, Enum):
    FIXED = "fixed"
    VALIDATION_MEDIAN = "validation_median"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    dropout_rate: float = 0.2
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    threshold_mode: ThresholdMode = ThresholdMode.FIXED
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate out of [0,1): {self.dropout_rate}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold out of (0,1): {self.threshold}")


@dataclass(frozen=True)
class EpochRecord:
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


History = list


def glorot_init(d: int, rng: np.random.Generator) -> DenseHead:
    lim1 = math.sqrt(6.0 / (d + HIDDEN_UNITS))
    lim2 = math.sqrt(6.0 / (HIDDEN_UNITS + 1))
    return DenseHead(
        W1=rng.uniform(-lim1, lim1, size=(HIDDEN_UNITS, d)),
        b1=np.zeros(HIDDEN_UNITS),
        W2=rng.uniform(-lim2, lim2, size=(1, HIDDEN_UNITS)),
        b2=np.zeros(1),
        d=d,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Split by sign to avoid overflow in exp for large |z|.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def dropout_mask(
    shape: tuple[int, ...], rate: float, rng: np.random.Generator
) -> np.ndarray:
    """Keep mask already scaled by 1/(1-rate); identity when rate = 0."""
    if rate == 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


def forward_batch(
    X: np.ndarray, head: DenseHead, mask: np.ndarray | None = None
) -> tuple[np.ndarray, tuple]:
    """Probabilities for a batch; mask=None means inference (no dropout)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != head.d:
        raise DimensionMismatch(f"batch shape {X.shape} incompatible with d={head.d}")
    xt = X if mask is None else X * mask
    z1 = xt @ head.W1.T + head.b1
    h = np.maximum(z1, 0.0)
    z2 = h @ head.W2.T + head.b2
    p = _sigmoid(z2).ravel()
    return p, (xt, z1, h)


def forward(
    x: np.ndarray,
    head: DenseHead,
    *,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
) -> float:
    """Single-vector forward pass; pass an rng to enable train-mode dropout."""
    x = np.asarray(x, dtype=float)
    if x.shape != (head.d,):
        raise DimensionMismatch(f"input shape {x.shape} != ({head.d},)")
    mask = None
    if rng is not None and dropout_rate > 0.0:
        mask = dropout_mask((1, head.d), dropout_rate, rng)
    p, _ = forward_batch(x[None, :], head, mask)
    return float(p[0])


def bce_loss(p: float, y: int) -> float:
    pc = min(max(p, BCE_CLIP), 1.0 - BCE_CLIP)
    return -(y * math.log(pc) + (1 - y) * math.log(1.0 - pc))


def _bce_batch(p: np.ndarray, y: np.ndarray) -> float:
    pc = np.clip(p, BCE_CLIP, 1.0 - BCE_CLIP)
    return float(np.mean(-(y * np.log(pc) + (1 - y) * np.log(1.0 - pc))))


@dataclass
class Grads:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray


def backward(
    X: np.ndarray, y: np.ndarray, head: DenseHead, mask: np.ndarray | None = None
) -> Grads:
    """Analytic gradients of mean batch BCE; mask must match the forward pass."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p, (xt, z1, h) = forward_batch(X, head, mask)
    n = len(y)
    dz2 = (p - y) / n  # (B,), the sigmoid-BCE shortcut
    dW2 = dz2[None, :] @ h  # (1, 64)
    db2 = np.array([dz2.sum()])
    dh = dz2[:, None] * head.W2  # (B, 64)
    dz1 = dh * (z1 > 0)
    dW1 = dz1.T @ xt  # (64, d)
    db1 = dz1.sum(axis=0)
    return Grads(W1=dW1, b1=db1, W2=dW2, b2=db2)


def loss_on_batch(
    head: DenseHead, X: np.ndarray, y: np.ndarray, mask: np.ndarray | None = None
) -> float:
    p, _ = forward_batch(X, head, mask)
    return _bce_batch(p, np.asarray(y, dtype=float))


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> dict[str, np.ndarray]:
    """One bias-corrected Adam update; mutates state, returns new params."""
    state.t += 1
    t = state.t
    updated = {}
    for name, g in grads.items():
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(g)
            v = np.zeros_like(g)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g)
        state.m[name] = m
        state.v[name] = v
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        updated[name] = params[name] - lr * m_hat / (np.sqrt(v_hat) + epsilon)
    return updated


def classify(p: float, threshold: float) -> int:
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold out of (0,1): {threshold}")
    return 1 if p >= threshold else 0


def classify_batch(p: np.ndarray, threshold: float) -> np.ndarray:
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold out of (0,1): {threshold}")
    return (np.asarray(p) >= threshold).astype(int)


def embedding_matrix(
    examples: Sequence[LabeledExample], embeddings: Mapping[str, np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-example embeddings (keyed by sentence text) and labels."""
    vectors = []
    for ex in examples:
        vec = embeddings.get(ex.text)
        if vec is None:
            raise MissingEmbedding(f"no embedding for example {ex.origin!r}")
        vectors.append(np.asarray(vec, dtype=float))
    y = np.array([ex.label for ex in examples], dtype=float)
    return np.stack(vectors), y


def train(
    train_set: Sequence[LabeledExample],
    val_set: Sequence[LabeledExample],
    embeddings: Mapping[str, np.ndarray],
    cfg: TrainConfig,
) -> tuple[DenseHead, list[EpochRecord], float]:
    """Train the head; returns (head, per-epoch history, decision threshold).

    History metrics are measured in inference mode after each epoch, with
    accuracy at cfg.threshold. The returned threshold is cfg.threshold in
    fixed mode, or the median validation probability in validation_median
    mode (falling back to cfg.threshold when the validation set is empty).
    """
    if not train_set:
        raise ValueError("empty training set")
    X_train, y_train = embedding_matrix(train_set, embeddings)
    X_val, y_val = (
        embedding_matrix(val_set, embeddings)
        if val_set
        else (np.zeros((0, X_train.shape[1])), np.zeros(0))
    )
    d = X_train.shape[1]
    rng = np.random.default_rng(cfg.seed)
    head = glorot_init(d, rng)
    params = {"W1": head.W1, "b1": head.b1, "W2": head.W2, "b2": head.b2}
    state = AdamState()
    history: list[EpochRecord] = []
    n = len(X_train)

    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            Xb, yb = X_train[batch], y_train[batch]
            mask = dropout_mask(Xb.shape, cfg.dropout_rate, rng)
            head = DenseHead(W1=params["W1"], b1=params["b1"], W2=params["W2"], b2=params["b2"], d=d)
            grads = backward(Xb, yb, head, mask)
            params = adam_step(
                params,
                {"W1": grads.W1, "b1": grads.b1, "W2": grads.W2, "b2": grads.b2},
                state,
                lr=cfg.learning_rate,
                beta1=cfg.beta1,
                beta2=cfg.beta2,
                epsilon=cfg.epsilon,
            )
        head = DenseHead(W1=params["W1"], b1=params["b1"], W2=params["W2"], b2=params["b2"], d=d)
        p_train, _ = forward_batch(X_train, head)
        train_loss = _bce_batch(p_train, y_train)
        train_acc = float(np.mean(classify_batch(p_train, cfg.threshold) == y_train))
        if len(X_val):
            p_val, _ = forward_batch(X_val, head)
            val_loss = _bce_batch(p_val, y_val)
            val_acc = float(np.mean(classify_batch(p_val, cfg.threshold) == y_val))
        else:
            val_loss = 0.0
            val_acc = 0.0
        history.append(EpochRecord(train_loss, train_acc, val_loss, val_acc))

    threshold = cfg.threshold
    if cfg.threshold_mode is ThresholdMode.VALIDATION_MEDIAN and len(X_val):
        p_val, _ = forward_batch(X_val, head)
        threshold = float(np.median(p_val))
    return head, history, threshold


def head_to_json(head: DenseHead, threshold: float) -> dict:
    return {
        "format_version": 1,
        "d": head.d,
        "W1": [[float(v) for v in row] for row in head.W1],
        "b1": [float(v) for v in head.b1],
        "W2": [[float(v) for v in row] for row in head.W2],
        "b2": [float(v) for v in head.b2],
        "threshold": threshold,
    }


def head_from_json(data: dict) -> tuple[DenseHead, float]:
    if data.get("format_version") != 1:
        raise ValueError(f"unsupported head format: {data.get('format_version')!r}")
    head = DenseHead(
        W1=np.asarray(data["W1"], dtype=float),
        b1=np.asarray(data["b1"], dtype=float),
        W2=np.asarray(data["W2"], dtype=float),
        b2=np.asarray(data["b2"], dtype=float),
        d=int(data["d"]),
    )
    return head, float(data["threshold"])


def save_head(path: Path | str, head: DenseHead, threshold: float) -> None:
    Path(path).write_text(
        json.dumps(head_to_json(head, threshold), sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_head(path: Path | str) -> tuple[DenseHead, float]:
    return head_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def write_history_csv(history: Sequence[EpochRecord], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "train_loss", "train_acc", "val_loss", "val_acc"])
        for i, rec in enumerate(history, 1):
            writer.writerow(
                [i, repr(rec.train_loss), repr(rec.train_acc), repr(rec.val_loss), repr(rec.val_acc)]
            )
