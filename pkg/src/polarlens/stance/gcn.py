"""Two-layer graph convolutional classifier with manual backpropagation.

The forward pass is

    H = relu(A_hat @ X @ W1 + b1)
    Z = row_softmax(A_hat @ H @ W2 + b2)

over the symmetric-normalized adjacency A_hat = D^(-1/2) (A + I) D^(-1/2)
of the undirected simple interaction graph. Training is full-batch
gradient descent with Adam moment estimates on the cross-entropy over
seed-labeled nodes plus L2 weight decay on W1 and W2 (not the biases).
Gradients are exact; the test suite checks them against central finite
differences.

Class columns are fixed: column 0 is pro, column 1 is anti, so a node's
p_anti is its second softmax output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import InvalidArgumentError, NumericError
from ..graph import InteractionGraph

N_CLASSES = 2

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

_PARAM_NAMES = ("W1", "b1", "W2", "b2")


@dataclass
class GcnModel:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def copy(self) -> "GcnModel":
        return GcnModel(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())

    def params(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}


@dataclass
class TrainTrace:
    train_loss: list[float]
    val_loss: list[float]
    best_epoch: int


def normalize_adjacency(graph: InteractionGraph, users: Sequence[str]) -> np.ndarray:
    """Symmetric-normalized adjacency with self-loops for the given users.

    Direction and multiplicity are discarded: two users are adjacent if
    any interaction links them either way. Isolated users keep their
    self-loop, so every row is well defined.
    """
    if not users:
        raise InvalidArgumentError("user set must be non-empty")
    index = {user: i for i, user in enumerate(users)}
    if len(index) != len(users):
        raise InvalidArgumentError("user list contains duplicates")
    n = len(users)
    a = np.zeros((n, n), dtype=np.float64)
    for edge in graph.edges:
        i = index.get(edge.author_id)
        j = index.get(edge.target_id)
        if i is None or j is None or i == j:
            continue
        a[i, j] = 1.0
        a[j, i] = 1.0
    a += np.eye(n)
    inv_sqrt_deg = 1.0 / np.sqrt(a.sum(axis=1))
    return a * inv_sqrt_deg[:, None] * inv_sqrt_deg[None, :]


def _row_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def gcn_forward(a_hat: np.ndarray, x: np.ndarray, model: GcnModel) -> np.ndarray:
    """Per-node class probabilities, rows aligned with the input ordering."""
    if not (np.all(np.isfinite(a_hat)) and np.all(np.isfinite(x))):
        raise NumericError("non-finite values in adjacency or features")
    hidden = np.maximum(0.0, a_hat @ (x @ model.W1) + model.b1)
    return _row_softmax(a_hat @ (hidden @ model.W2) + model.b2)


def gcn_loss_and_grads(
    model: GcnModel,
    a_hat: np.ndarray,
    x: np.ndarray,
    train_idx: np.ndarray,
    train_y: np.ndarray,
    weight_decay: float,
) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy over the training nodes plus L2 penalty, with exact
    gradients from backpropagation through both graph convolutions."""
    n_train = len(train_idx)
    ax = a_hat @ x
    h_pre = ax @ model.W1 + model.b1
    hidden = np.maximum(0.0, h_pre)
    ah = a_hat @ hidden
    z_pre = ah @ model.W2 + model.b2
    probs = _row_softmax(z_pre)

    picked = probs[train_idx, train_y]
    loss = -np.mean(np.log(np.clip(picked, 1e-300, None)))
    loss += 0.5 * weight_decay * (np.sum(model.W1 ** 2) + np.sum(model.W2 ** 2))

    grad_z = np.zeros_like(probs)
    grad_z[train_idx] = probs[train_idx]
    grad_z[train_idx, train_y] -= 1.0
    grad_z /= n_train

    grad_w2 = ah.T @ grad_z + weight_decay * model.W2
    grad_b2 = grad_z.sum(axis=0)
    grad_hidden = (a_hat.T @ grad_z) @ model.W2.T
    grad_hpre = grad_hidden * (h_pre > 0)
    grad_w1 = ax.T @ grad_hpre + weight_decay * model.W1
    grad_b1 = grad_hpre.sum(axis=0)
    return float(loss), {"W1": grad_w1, "b1": grad_b1, "W2": grad_w2, "b2": grad_b2}


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _cross_entropy(probs: np.ndarray, idx: np.ndarray, y: np.ndarray) -> float:
    picked = probs[idx, y]
    return float(-np.mean(np.log(np.clip(picked, 1e-300, None))))


def split_seeds(
    labels: Mapping[int, int], rng_seed: int, val_fraction: float = 0.2
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic stratified 80/20 split of seed nodes.

    The validation share is floored per class so training always keeps at
    least one node of each class; tiny seed sets may get an empty
    validation set.
    """
    rng = np.random.default_rng(rng_seed)
    train_idx: list[int] = []
    train_y: list[int] = []
    val_idx: list[int] = []
    val_y: list[int] = []
    for cls in range(N_CLASSES):
        members = np.array(sorted(i for i, c in labels.items() if c == cls), dtype=np.int64)
        if len(members) == 0:
            raise InvalidArgumentError(f"no seed users for class {cls}")
        members = members[rng.permutation(len(members))]
        n_val = int(np.floor(val_fraction * len(members)))
        val_idx.extend(members[:n_val])
        val_y.extend([cls] * n_val)
        train_idx.extend(members[n_val:])
        train_y.extend([cls] * (len(members) - n_val))
    return (
        np.array(train_idx, dtype=np.int64),
        np.array(train_y, dtype=np.int64),
        np.array(val_idx, dtype=np.int64),
        np.array(val_y, dtype=np.int64),
    )


def gcn_train(
    a_hat: np.ndarray,
    x: np.ndarray,
    labels: Mapping[int, int],
    hidden: int = 64,
    lr: float = 0.01,
    weight_decay: float = 5e-4,
    epochs: int = 200,
    rng_seed: int = 0,
) -> tuple[GcnModel, TrainTrace]:
    """Train the classifier on seed-labeled nodes.

    Returns the parameters from the epoch with the lowest validation
    cross-entropy (training loss when the validation split is empty) and
    the full per-epoch loss trace. Identical inputs and rng_seed give an
    identical trace.
    """
    if epochs < 1:
        raise InvalidArgumentError("epochs must be >= 1")
    train_idx, train_y, val_idx, val_y = split_seeds(labels, rng_seed)

    rng = np.random.default_rng(rng_seed)
    n_features = x.shape[1]
    model = GcnModel(
        W1=_glorot(rng, n_features, hidden),
        b1=np.zeros(hidden),
        W2=_glorot(rng, hidden, N_CLASSES),
        b2=np.zeros(N_CLASSES),
    )

    moments1 = {name: np.zeros_like(p) for name, p in model.params().items()}
    moments2 = {name: np.zeros_like(p) for name, p in model.params().items()}

    trace = TrainTrace(train_loss=[], val_loss=[], best_epoch=0)
    best_score = np.inf
    best_model = model.copy()
    for epoch in range(epochs):
        loss, grads = gcn_loss_and_grads(
            model, a_hat, x, train_idx, train_y, weight_decay
        )
        if not np.isfinite(loss):
            raise NumericError(f"training diverged: non-finite loss at epoch {epoch}")
        if len(val_idx):
            probs = gcn_forward(a_hat, x, model)
            val_loss = _cross_entropy(probs, val_idx, val_y)
        else:
            val_loss = loss
        trace.train_loss.append(loss)
        trace.val_loss.append(val_loss)
        if val_loss < best_score:
            best_score = val_loss
            best_model = model.copy()
            trace.best_epoch = epoch

        t = epoch + 1
        params = model.params()
        for name in _PARAM_NAMES:
            g = grads[name]
            moments1[name] = ADAM_BETA1 * moments1[name] + (1 - ADAM_BETA1) * g
            moments2[name] = ADAM_BETA2 * moments2[name] + (1 - ADAM_BETA2) * g * g
            m_hat = moments1[name] / (1 - ADAM_BETA1 ** t)
            v_hat = moments2[name] / (1 - ADAM_BETA2 ** t)
            params[name] -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    return best_model, trace


class GcnStanceClassifier(BaseEstimator):
    """Estimator facade: fit on (adjacency, features, seed labels), then
    read per-node probabilities with :meth:`predict_proba`."""

    def __init__(
        self,
        hidden: int = 64,
        lr: float = 0.01,
        weight_decay: float = 5e-4,
        epochs: int = 200,
        rng_seed: int = 0,
    ):
        self.hidden = hidden
        self.lr = lr
        self.weight_decay = weight_decay
        self.epochs = epochs
        self.rng_seed = rng_seed

    def fit(self, a_hat: np.ndarray, x: np.ndarray, labels: Mapping[int, int]):
        self.model_, self.trace_ = gcn_train(
            a_hat,
            x,
            labels,
            hidden=self.hidden,
            lr=self.lr,
            weight_decay=self.weight_decay,
            epochs=self.epochs,
            rng_seed=self.rng_seed,
        )
        return self

    def predict_proba(self, a_hat: np.ndarray, x: np.ndarray) -> np.ndarray:
        return gcn_forward(a_hat, x, self.model_)


def write_model(model: GcnModel, fh: IO[str]) -> None:
    """JSON matrix dump with an explicit shape header."""
    payload = {
        "format": "polarlens-gcn-v1",
        "shapes": {name: list(p.shape) for name, p in model.params().items()},
    }
    for name, p in model.params().items():
        payload[name] = p.ravel().tolist()
    json.dump(payload, fh, sort_keys=True)
    fh.write("\n")


def read_model(fh: IO[str]) -> GcnModel:
    payload = json.load(fh)
    if payload.get("format") != "polarlens-gcn-v1":
        raise InvalidArgumentError("unrecognized model checkpoint format")
    arrays = {}
    for name in _PARAM_NAMES:
        shape = tuple(payload["shapes"][name])
        arrays[name] = np.asarray(payload[name], dtype=np.float64).reshape(shape)
    return GcnModel(**arrays)
