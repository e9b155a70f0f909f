"""Graph-convolutional Trojan classifier, implemented directly on numpy.

Architecture (fixed): two symmetric-normalized graph-conv layers with ReLU,
mean-pool readout (the graph embedding), a linear layer, softmax over the
two classes (clean, trojan). Training is full-batch gradient descent on
class-weighted cross-entropy with a reduce-on-plateau learning-rate
schedule and a best-validation-loss checkpoint. Everything is deterministic
for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from ..core import HtType
from ..dfg import Dfg
from .features import FEATURE_DIM, GraphFeatures, featurize


class ClassEmptyError(ValueError):
    """E_CLASS_EMPTY: training needs at least 4 graphs in each class."""


class TrainingDivergedError(RuntimeError):
    """E_DIVERGED: the loss became non-finite."""


@dataclass
class GcnParams:
    W1: np.ndarray  # F x H
    b1: np.ndarray  # H
    W2: np.ndarray  # H x H
    b2: np.ndarray  # H
    Wout: np.ndarray  # H x 2
    bout: np.ndarray  # 2

    def copy(self) -> "GcnParams":
        return GcnParams(**{k: v.copy() for k, v in self.arrays().items()})

    def arrays(self) -> Dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2,
                "Wout": self.Wout, "bout": self.bout}

    def finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays().values())


@dataclass
class TrainConfig:
    hidden: int = 32
    lr: float = 0.5
    max_epochs: int = 200
    patience: int = 5
    factor: float = 0.5
    min_delta: float = 1e-4
    lr_floor: float = 1e-6
    val_fraction: float = 0.2
    seed: int = 0


@dataclass
class TrainingMeta:
    epochs: int = 0
    final_train_loss: float = 0.0
    final_val_loss: float = 0.0
    lr_history: List[float] = field(default_factory=list)


@dataclass
class GcnModel:
    params: GcnParams
    trained_for: HtType
    training_meta: TrainingMeta = field(default_factory=TrainingMeta)

    @property
    def hidden(self) -> int:
        return self.params.W1.shape[1]


def init_params(seed: int, n_features: int = FEATURE_DIM,
                hidden: int = 32) -> GcnParams:
    rng = np.random.default_rng(seed)

    def glorot(rows: int, cols: int) -> np.ndarray:
        scale = np.sqrt(2.0 / (rows + cols))
        return rng.normal(0.0, scale, size=(rows, cols))

    return GcnParams(
        W1=glorot(n_features, hidden), b1=np.zeros(hidden),
        W2=glorot(hidden, hidden), b2=np.zeros(hidden),
        Wout=glorot(hidden, 2), bout=np.zeros(2),
    )


def _softmax2(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


@dataclass
class _Cache:
    a_hat: np.ndarray
    m1: np.ndarray  # A_hat @ X
    z1: np.ndarray
    h1: np.ndarray
    m2: np.ndarray  # A_hat @ H1
    z2: np.ndarray
    h2: np.ndarray
    g: np.ndarray   # mean-pool embedding
    p: np.ndarray   # softmax probabilities


def _forward_cache(params: GcnParams, feats: GraphFeatures) -> _Cache:
    if feats.node_features.shape[1] != params.W1.shape[0]:
        raise ValueError(
            f"feature dim {feats.node_features.shape[1]} does not match "
            f"model input width {params.W1.shape[0]}")
    a_hat = feats.a_hat()
    m1 = a_hat @ feats.node_features
    z1 = m1 @ params.W1 + params.b1
    h1 = np.maximum(z1, 0.0)
    m2 = a_hat @ h1
    z2 = m2 @ params.W2 + params.b2
    h2 = np.maximum(z2, 0.0)
    g = h2.mean(axis=0)
    p = _softmax2(g @ params.Wout + params.bout)
    return _Cache(a_hat=a_hat, m1=m1, z1=z1, h1=h1, m2=m2, z2=z2, h2=h2,
                  g=g, p=p)


def forward(model_or_params, feats: GraphFeatures) -> Tuple[float, float, np.ndarray]:
    """(clean_prob, trojan_prob, embedding) for one graph."""
    params = model_or_params.params if isinstance(model_or_params, GcnModel) \
        else model_or_params
    cache = _forward_cache(params, feats)
    return float(cache.p[0]), float(cache.p[1]), cache.g.copy()


def loss_and_gradients(params: GcnParams, feats_list: Sequence[GraphFeatures],
                       labels: Sequence[int],
                       class_weights: Tuple[float, float] = (1.0, 1.0),
                       ) -> Tuple[float, GcnParams]:
    """Mean class-weighted cross-entropy over the batch and its analytic
    gradients, accumulated graph by graph.

    For one graph with label y and weight w, d(loss)/d(logits) is
    w*(p - onehot(y))/B; the rest is the chain rule back through the
    readout, the mean pool (1/N per node), the two ReLU conv layers, and
    the shared symmetric-normalized adjacency.
    """
    batch = len(feats_list)
    grads = GcnParams(W1=np.zeros_like(params.W1), b1=np.zeros_like(params.b1),
                      W2=np.zeros_like(params.W2), b2=np.zeros_like(params.b2),
                      Wout=np.zeros_like(params.Wout),
                      bout=np.zeros_like(params.bout))
    total = 0.0
    for feats, label in zip(feats_list, labels):
        cache = _forward_cache(params, feats)
        weight = class_weights[label]
        total += weight * -np.log(max(cache.p[label], 1e-300))

        d_out = cache.p.copy()
        d_out[label] -= 1.0
        d_out *= weight / batch

        grads.Wout += np.outer(cache.g, d_out)
        grads.bout += d_out
        d_g = params.Wout @ d_out
        n_nodes = cache.h2.shape[0]
        d_h2 = np.tile(d_g / n_nodes, (n_nodes, 1))
        d_z2 = d_h2 * (cache.z2 > 0.0)
        grads.W2 += cache.m2.T @ d_z2
        grads.b2 += d_z2.sum(axis=0)
        d_h1 = cache.a_hat @ (d_z2 @ params.W2.T)
        d_z1 = d_h1 * (cache.z1 > 0.0)
        grads.W1 += cache.m1.T @ d_z1
        grads.b1 += d_z1.sum(axis=0)
    return total / batch, grads


def batch_loss(params: GcnParams, feats_list: Sequence[GraphFeatures],
               labels: Sequence[int],
               class_weights: Tuple[float, float] = (1.0, 1.0)) -> float:
    total = 0.0
    for feats, label in zip(feats_list, labels):
        cache = _forward_cache(params, feats)
        total += class_weights[label] * -np.log(max(cache.p[label], 1e-300))
    return total / len(feats_list)


def stratified_split(labels: Sequence[int], val_fraction: float,
                     seed: int) -> Tuple[List[int], List[int]]:
    """Seeded per-class shuffle; at least one of each class lands in both
    halves. Computed before any update ever touches the weights."""
    rng = np.random.default_rng(seed)
    train_idx: List[int] = []
    val_idx: List[int] = []
    for cls in (0, 1):
        members = [i for i, y in enumerate(labels) if y == cls]
        order = rng.permutation(len(members))
        n_val = max(1, int(round(val_fraction * len(members))))
        if n_val >= len(members):
            n_val = len(members) - 1
        shuffled = [members[j] for j in order]
        val_idx.extend(shuffled[:n_val])
        train_idx.extend(shuffled[n_val:])
    return sorted(train_idx), sorted(val_idx)


def train(clean: Sequence[Dfg], infected: Sequence[Dfg], ht: HtType,
          cfg: Optional[TrainConfig] = None) -> GcnModel:
    """Train one per-HT binary model; returns the best-validation checkpoint."""
    cfg = cfg or TrainConfig()
    if len(clean) < 4 or len(infected) < 4:
        raise ClassEmptyError(
            f"need at least 4 graphs per class, got {len(clean)} clean and "
            f"{len(infected)} infected")

    feats = [featurize(g) for g in clean] + [featurize(g) for g in infected]
    labels = [0] * len(clean) + [1] * len(infected)
    train_idx, val_idx = stratified_split(labels, cfg.val_fraction, cfg.seed)
    train_feats = [feats[i] for i in train_idx]
    train_labels = [labels[i] for i in train_idx]
    val_feats = [feats[i] for i in val_idx]
    val_labels = [labels[i] for i in val_idx]

    counts = (train_labels.count(0), train_labels.count(1))
    total = len(train_labels)
    weights = (total / (2.0 * counts[0]), total / (2.0 * counts[1]))

    params = init_params(cfg.seed, FEATURE_DIM, cfg.hidden)
    best_params = params.copy()
    best_val = np.inf
    sched_best = np.inf
    bad_epochs = 0
    lr = cfg.lr
    meta = TrainingMeta()

    for _ in range(cfg.max_epochs):
        if lr < cfg.lr_floor:
            break
        train_loss, grads = loss_and_gradients(params, train_feats,
                                               train_labels, weights)
        if not np.isfinite(train_loss):
            raise TrainingDivergedError(f"training loss became {train_loss}")
        for name, arr in params.arrays().items():
            arr -= lr * grads.arrays()[name]
        if not params.finite():
            raise TrainingDivergedError("weights became non-finite")

        val_loss = batch_loss(params, val_feats, val_labels, weights)
        if not np.isfinite(val_loss):
            raise TrainingDivergedError(f"validation loss became {val_loss}")

        meta.lr_history.append(lr)
        meta.epochs += 1
        meta.final_train_loss = float(train_loss)
        meta.final_val_loss = float(val_loss)

        if val_loss < best_val:
            best_val = val_loss
            best_params = params.copy()
        if val_loss < sched_best - cfg.min_delta:
            sched_best = val_loss
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.patience:
                lr *= cfg.factor
                bad_epochs = 0

    return GcnModel(params=best_params, trained_for=ht, training_meta=meta)


def accuracy(model: GcnModel, graphs: Sequence[Dfg],
             labels: Sequence[int]) -> float:
    hits = 0
    for dfg, label in zip(graphs, labels):
        _, trojan_prob, _ = forward(model, featurize(dfg))
        hits += int((trojan_prob >= 0.5) == bool(label))
    return hits / len(labels)


class GcnTrojanClassifier(BaseEstimator):
    """Estimator-style wrapper: fit on (graphs, 0/1 labels), then
    predict/predict_proba/embed."""

    def __init__(self, ht_type: HtType = HtType.HT1, hidden: int = 32,
                 lr: float = 0.5, max_epochs: int = 200, patience: int = 5,
                 factor: float = 0.5, min_delta: float = 1e-4,
                 lr_floor: float = 1e-6, val_fraction: float = 0.2,
                 seed: int = 0):
        self.ht_type = ht_type
        self.hidden = hidden
        self.lr = lr
        self.max_epochs = max_epochs
        self.patience = patience
        self.factor = factor
        self.min_delta = min_delta
        self.lr_floor = lr_floor
        self.val_fraction = val_fraction
        self.seed = seed

    def _validate(self, X: Sequence[Dfg], y=None) -> None:
        if not isinstance(X, (list, tuple)):
            raise TypeError("X must be a list of Dfg graphs")
        for g in X:
            if not isinstance(g, Dfg):
                raise TypeError(f"expected Dfg, got {type(g).__name__}")
        if y is not None:
            if len(X) != len(y):
                raise ValueError(f"X has {len(X)} graphs but y has {len(y)} labels")
            bad = sorted({int(v) for v in y} - {0, 1})
            if bad:
                raise ValueError(f"labels must be 0 (clean) or 1 (trojan), got {bad}")

    def fit(self, X: Sequence[Dfg], y: Sequence[int]) -> "GcnTrojanClassifier":
        self._validate(X, y)
        clean = [g for g, label in zip(X, y) if int(label) == 0]
        infected = [g for g, label in zip(X, y) if int(label) == 1]
        cfg = TrainConfig(hidden=self.hidden, lr=self.lr,
                          max_epochs=self.max_epochs, patience=self.patience,
                          factor=self.factor, min_delta=self.min_delta,
                          lr_floor=self.lr_floor,
                          val_fraction=self.val_fraction, seed=self.seed)
        self.model_ = train(clean, infected, self.ht_type, cfg)
        return self

    def predict_proba(self, X: Sequence[Dfg]) -> np.ndarray:
        self._validate(X)
        out = np.zeros((len(X), 2))
        for i, g in enumerate(X):
            clean_p, trojan_p, _ = forward(self.model_, featurize(g))
            out[i] = (clean_p, trojan_p)
        return out

    def predict(self, X: Sequence[Dfg]) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(int)

    def embed(self, X: Sequence[Dfg]) -> np.ndarray:
        self._validate(X)
        rows = [forward(self.model_, featurize(g))[2] for g in X]
        return np.stack(rows)
