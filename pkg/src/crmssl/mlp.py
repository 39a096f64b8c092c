"""Feed-forward sigmoid network trained by online backpropagation.

The training objective is the summed squared error

    E(w) = 1/2 * sum_d sum_k (t_kd - o_kd)**2

over examples ``d`` and output units ``k``. Hot loops run in the compiled
kernel when available (see ``crmssl._backend``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _pykernels
from ._backend import kernels

CYCLES_EXHAUSTED = "cycles_exhausted"
EPSILON_REACHED = "epsilon_reached"


class TrainingError(RuntimeError):
    """Training diverged or was given unusable data."""


@dataclass(frozen=True)
class NetworkTopology:
    input_size: int
    hidden_sizes: tuple = ()
    output_size: int = 2

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.input_size < 1 or any(h < 1 for h in self.hidden_sizes):
            raise ValueError("layer sizes must be >= 1")
        if self.output_size < 2:
            raise ValueError("output_size must be >= 2")

    @property
    def sizes(self):
        return np.array((self.input_size, *self.hidden_sizes, self.output_size), dtype=np.intp)

    @property
    def n_params(self):
        s = self.sizes
        return int(sum((a + 1) * b for a, b in zip(s[:-1], s[1:])))


@dataclass
class Mlp:
    """Topology plus all weights in one flat buffer.

    Layer ``l`` is a ``(fan_in + 1, fan_out)`` block whose last row holds the
    biases; :meth:`weights` returns these blocks as views.
    """

    topology: NetworkTopology
    params: np.ndarray
    class_names: Optional[tuple] = None

    def __post_init__(self):
        self.params = np.ascontiguousarray(self.params, dtype=np.float64)
        if self.params.shape != (self.topology.n_params,):
            raise ValueError("parameter vector does not match topology")
        if self.class_names is not None:
            self.class_names = tuple(self.class_names)
            if len(self.class_names) != self.topology.output_size:
                raise ValueError("class_names length must equal output_size")

    @property
    def weights(self):
        return _pykernels._layers(self.params, self.topology.sizes)

    def copy(self) -> "Mlp":
        return Mlp(self.topology, self.params.copy(), self.class_names)

    def to_dict(self):
        return {
            "topology": {
                "input_size": self.topology.input_size,
                "hidden_sizes": list(self.topology.hidden_sizes),
                "output_size": self.topology.output_size,
            },
            "class_names": list(self.class_names) if self.class_names else None,
            "weights": [w.tolist() for w in self.weights],
        }

    @classmethod
    def from_dict(cls, d) -> "Mlp":
        t = d["topology"]
        topo = NetworkTopology(t["input_size"], tuple(t["hidden_sizes"]), t["output_size"])
        params = np.concatenate([np.asarray(w, dtype=np.float64).ravel() for w in d["weights"]])
        names = d.get("class_names")
        return cls(topo, params, tuple(names) if names else None)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "Mlp":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class TrainConfig:
    training_cycles: int = 500
    learning_rate: float = 0.3
    error_epsilon: float = 1.0e-5
    momentum: float = 0.0
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.training_cycles < 1:
            raise ValueError("training_cycles must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not self.error_epsilon > 0:
            raise ValueError("error_epsilon must be positive")
        if self.momentum < 0:
            raise ValueError("momentum must be non-negative")


@dataclass
class TrainHistory:
    errors: list = field(default_factory=list)
    stop_reason: str = CYCLES_EXHAUSTED


@dataclass(frozen=True)
class Prediction:
    confidences: tuple
    label: str

    @property
    def confidence(self):
        return max(self.confidences)


def make_prediction(confidences, class_names) -> Prediction:
    """Normalise non-negative scores to sum 1 and pick the argmax (lowest index on ties)."""
    c = np.asarray(confidences, dtype=np.float64)
    total = c.sum()
    c = c / total if total > 0 else np.full(len(c), 1.0 / len(c))
    return Prediction(tuple(c.tolist()), class_names[int(np.argmax(c))])


def one_hot(codes, n_classes):
    T = np.zeros((len(codes), n_classes))
    T[np.arange(len(codes)), codes] = 1.0
    return T


def default_hidden_size(num_attributes: int, num_classes: int, divisor: int = 4,
                        plus_one: bool = False) -> int:
    """``floor((attributes + classes) / divisor)``, optionally plus one, at least 1."""
    if num_attributes < 1 or num_classes < 2 or divisor < 1:
        raise ValueError("need num_attributes >= 1, num_classes >= 2, divisor >= 1")
    size = (num_attributes + num_classes) // divisor + (1 if plus_one else 0)
    return max(1, size)


def init_network(topology: NetworkTopology, seed: int, class_names=None) -> Mlp:
    rng = np.random.default_rng(seed)
    return Mlp(topology, rng.uniform(-0.5, 0.5, topology.n_params), class_names)


def _check_features(net: Mlp, X):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != net.topology.input_size:
        raise ValueError(f"expected {net.topology.input_size} features, got {X.shape[1]}")
    return X


def forward(net: Mlp, features) -> np.ndarray:
    """Raw sigmoid outputs for one feature vector."""
    X = _check_features(net, features)
    return kernels.forward_batch(net.params, net.topology.sizes, X)[0]


def forward_batch(net: Mlp, X) -> np.ndarray:
    X = _check_features(net, X)
    return kernels.forward_batch(net.params, net.topology.sizes, X)


def error(net: Mlp, X, T) -> float:
    """Summed squared error over the examples (rows of ``X`` with targets ``T``)."""
    X = _check_features(net, X)
    T = np.asarray(T, dtype=np.float64)
    if T.ndim == 1:
        T = T[None, :]
    if np.isnan(T).any():
        raise ValueError("error() needs labeled examples")
    return kernels.total_error(net.params, net.topology.sizes, X, np.ascontiguousarray(T))


def gradient(net: Mlp, features, target) -> np.ndarray:
    """Flat gradient of the single-example error term."""
    x = np.asarray(features, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    return _pykernels.gradient(net.params, net.topology.sizes, x, t)


def backprop_step(net: Mlp, features, target, lr: float, momentum: float = 0.0,
                  velocity=None):
    """One gradient-descent update on a single example.

    Returns ``(new_net, new_velocity)`` where the velocity is the applied step,
    reused as the momentum term of the next call. Inputs are not modified.
    """
    g = gradient(net, features, target)
    if not np.all(np.isfinite(g)):
        raise TrainingError("non-finite gradient")
    v = np.zeros_like(net.params) if velocity is None else np.asarray(velocity)
    step = momentum * v - lr * g
    return Mlp(net.topology, net.params + step, net.class_names), step


def train(net: Mlp, X, T, cfg: TrainConfig = TrainConfig()):
    """Online backpropagation with a seeded reshuffle every cycle.

    Stops when the end-of-cycle total error drops below ``cfg.error_epsilon``
    or after ``cfg.training_cycles`` cycles. Returns ``(trained, history)``.
    """
    X = _check_features(net, X)
    T = np.ascontiguousarray(T, dtype=np.float64)
    if len(X) == 0:
        raise TrainingError("no training examples")
    if T.shape != (len(X), net.topology.output_size) or np.isnan(T).any():
        raise TrainingError("targets must be labeled one-hot rows")
    out = net.copy()
    sizes = out.topology.sizes
    velocity = np.zeros_like(out.params)
    rng = np.random.default_rng(cfg.shuffle_seed)
    history = TrainHistory()
    for _ in range(cfg.training_cycles):
        order = rng.permutation(len(X)).astype(np.intp)
        kernels.train_epoch(out.params, velocity, sizes, X, T, order,
                            cfg.learning_rate, cfg.momentum)
        e = kernels.total_error(out.params, sizes, X, T)
        if not np.isfinite(e):
            raise TrainingError("training diverged (non-finite error)")
        history.errors.append(e)
        if e < cfg.error_epsilon:
            history.stop_reason = EPSILON_REACHED
            break
    return out, history


def predict(net: Mlp, features, class_names: Optional[Sequence[str]] = None) -> Prediction:
    names = tuple(class_names) if class_names is not None else net.class_names
    if names is None or len(names) != net.topology.output_size:
        raise ValueError("class_names must match the number of outputs")
    return make_prediction(forward(net, features), names)


class MlpClassifier:
    """Learner wrapper: fresh seeded network each ``fit``.

    ``hidden_size`` of ``None`` means the sizing rule
    ``default_hidden_size(n_features, n_classes, divisor, plus_one)``.
    """

    def __init__(self, hidden_size: Optional[int] = None, divisor: int = 4,
                 plus_one: bool = False, config: TrainConfig = TrainConfig(),
                 init_seed: int = 0):
        self.hidden_size = hidden_size
        self.divisor = divisor
        self.plus_one = plus_one
        self.config = config
        self.init_seed = init_seed
        self.net: Optional[Mlp] = None
        self.history: Optional[TrainHistory] = None

    def topology_for(self, n_features, n_classes):
        h = self.hidden_size
        if h is None:
            h = default_hidden_size(n_features, n_classes, self.divisor, self.plus_one)
        return NetworkTopology(n_features, (h,) if h > 0 else (), n_classes)

    @classmethod
    def from_network(cls, net: Mlp) -> "MlpClassifier":
        clf = cls(hidden_size=net.topology.hidden_sizes[0] if net.topology.hidden_sizes else 0)
        clf.net = net
        return clf

    def fit(self, X, y, n_classes: int):
        X = np.asarray(X, dtype=np.float64)
        topo = self.topology_for(X.shape[1], n_classes)
        net = init_network(topo, self.init_seed)
        self.net, self.history = train(net, X, one_hot(y, n_classes), self.config)
        return self

    def predict_proba(self, X):
        raw = forward_batch(self.net, X)
        total = raw.sum(axis=1, keepdims=True)
        return np.divide(raw, total, out=np.full_like(raw, 1.0 / raw.shape[1]),
                         where=total > 0)

    def training_error(self):
        return self.history.errors[-1] if self.history and self.history.errors else None
