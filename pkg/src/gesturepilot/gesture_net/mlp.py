"""From-scratch multilayer perceptron for gesture classification.

Default architecture 42 -> 168 -> 546 -> 8: ReLU on the hidden layers,
softmax on the output, cross-entropy loss, minibatch SGD with momentum.
Layer sizes are data, not constants; smaller or larger nets load and run
the same way.  Everything is plain numpy and deterministic for a fixed
seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergedTraining, EmptyDataset
from .data import GestureDataset, normalize_batch

DEFAULT_LAYER_SIZES = (42, 168, 546, 8)


@dataclass
class MlpModel:
    weights: list[np.ndarray]  # per layer, shape (fan_in, fan_out)
    biases: list[np.ndarray]   # per layer, shape (fan_out,)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def num_classes(self) -> int:
        return self.weights[-1].shape[1]


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    momentum: float = 0.9
    seed: int = 0
    normalize: bool = True  # wrist-centre / unit-scale features first


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    eval_loss: float | None = None
    eval_accuracy: float | None = None


@dataclass
class EvalReport:
    accuracy: float
    mean_loss: float
    confusion: np.ndarray = field(repr=False)  # (classes, classes), rows = truth


def init_model(layer_sizes=DEFAULT_LAYER_SIZES, seed: int = 0) -> MlpModel:
    """Glorot-uniform weights, zero biases, seeded."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights, biases)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities for one 42-vector or an (N, 42) batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    a = x.reshape(1, -1) if single else x
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        a = np.maximum(a @ w + b, 0.0)
    probs = _softmax(a @ model.weights[-1] + model.biases[-1])
    return probs[0] if single else probs


def predict(model: MlpModel, x: np.ndarray) -> tuple[int, float]:
    """Argmax label and its probability; ties go to the lowest index."""
    probs = forward(model, x)
    label = int(np.argmax(probs))
    return label, float(probs[label])


def loss_and_gradients(model: MlpModel, x: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy on a batch plus gradients for every parameter.

    Returns (loss, grad_weights, grad_biases) with gradients shaped like
    the parameters.
    """
    x = np.asarray(x, dtype=float).reshape(-1, model.layer_sizes[0])
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    n = len(labels)

    activations = [x]
    pre = []
    a = x
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        z = a @ w + b
        pre.append(z)
        a = np.maximum(z, 0.0)
        activations.append(a)
    logits = a @ model.weights[-1] + model.biases[-1]
    probs = _softmax(logits)
    loss = float(-np.mean(np.log(probs[np.arange(n), labels] + 1e-300)))

    delta = probs
    delta[np.arange(n), labels] -= 1.0
    delta /= n

    grad_w = [np.empty(0)] * len(model.weights)
    grad_b = [np.empty(0)] * len(model.biases)
    for i in range(len(model.weights) - 1, -1, -1):
        grad_w[i] = activations[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ model.weights[i].T
            delta[pre[i - 1] <= 0.0] = 0.0
    return loss, grad_w, grad_b


def _prepare(features: np.ndarray, normalize: bool) -> np.ndarray:
    return normalize_batch(features) if normalize else np.asarray(features, dtype=float)


def _split_metrics(model, feats, labels):
    probs = forward(model, feats)
    loss = float(-np.mean(np.log(probs[np.arange(len(labels)), labels] + 1e-300)))
    acc = float(np.mean(np.argmax(probs, axis=1) == labels))
    return loss, acc


def train(dataset: GestureDataset, config: TrainConfig = TrainConfig(),
          eval_dataset: GestureDataset | None = None,
          layer_sizes=DEFAULT_LAYER_SIZES) -> tuple[MlpModel, list[EpochStats]]:
    """Fit a fresh model on the dataset; returns it with per-epoch metrics.

    Reproducible for a fixed config seed: initialization and the epoch
    shuffles both come from the same generator.  Raises EmptyDataset on
    zero samples and DivergedTraining if the loss goes non-finite.
    """
    if len(dataset) == 0:
        raise EmptyDataset("cannot train on zero samples")
    if config.epochs <= 0 or config.batch_size <= 0 or config.learning_rate <= 0:
        raise ValueError("epochs, batch_size and learning_rate must be positive")

    feats = _prepare(dataset.features, config.normalize)
    labels = dataset.labels
    eval_feats = eval_labels = None
    if eval_dataset is not None and len(eval_dataset) > 0:
        eval_feats = _prepare(eval_dataset.features, config.normalize)
        eval_labels = eval_dataset.labels

    model = init_model(layer_sizes, seed=config.seed)
    rng = np.random.default_rng(config.seed)
    vel_w = [np.zeros_like(w) for w in model.weights]
    vel_b = [np.zeros_like(b) for b in model.biases]

    history: list[EpochStats] = []
    n = len(labels)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, gw, gb = loss_and_gradients(model, feats[idx], labels[idx])
            if not np.isfinite(loss):
                raise DivergedTraining(f"non-finite loss at epoch {epoch}")
            for i in range(len(model.weights)):
                vel_w[i] = config.momentum * vel_w[i] - config.learning_rate * gw[i]
                vel_b[i] = config.momentum * vel_b[i] - config.learning_rate * gb[i]
                model.weights[i] += vel_w[i]
                model.biases[i] += vel_b[i]
        tr_loss, tr_acc = _split_metrics(model, feats, labels)
        if not np.isfinite(tr_loss):
            raise DivergedTraining(f"non-finite loss at epoch {epoch}")
        stats = EpochStats(epoch=epoch, train_loss=tr_loss, train_accuracy=tr_acc)
        if eval_feats is not None:
            stats.eval_loss, stats.eval_accuracy = _split_metrics(model, eval_feats, eval_labels)
        history.append(stats)
    return model, history


def evaluate(model: MlpModel, dataset: GestureDataset, normalize: bool = True) -> EvalReport:
    """Accuracy, mean loss and the confusion matrix on a dataset."""
    if len(dataset) == 0:
        raise EmptyDataset("cannot evaluate on zero samples")
    feats = _prepare(dataset.features, normalize)
    probs = forward(model, feats)
    labels = dataset.labels
    preds = np.argmax(probs, axis=1)
    k = model.num_classes
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (labels, preds), 1)
    loss = float(-np.mean(np.log(probs[np.arange(len(labels)), labels] + 1e-300)))
    return EvalReport(accuracy=float(np.trace(confusion) / len(labels)),
                      mean_loss=loss, confusion=confusion)
