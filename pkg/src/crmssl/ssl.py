"""Self-training and co-training wrappers around any fit/predict_proba learner.

A learner is any object with ``fit(X, y, n_classes)`` (which must start from
the same seeded state on every call) and ``predict_proba(X)`` returning rows
of confidences that sum to 1.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import DatasetError, ExampleSet, same_schema
from .mlp import TrainConfig, make_prediction, one_hot

NO_CONFIDENT_POINTS = "no_confident_points"
POOL_EXHAUSTED = "pool_exhausted"
MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class SelfTrainConfig:
    confidence_threshold: float = 0.8
    max_iterations: int = 10
    base: TrainConfig = TrainConfig()

    def __post_init__(self):
        if not 0.0 < self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must be in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class IterationRecord:
    iteration: int
    pool_size: int  # training-set size used by this round's fit
    train_error: float
    added: int = 0
    added_per_class: dict = field(default_factory=dict)
    added_rows: tuple = ()  # (row index, assigned label) pairs


@dataclass
class SelfTrainLog:
    iterations: list = field(default_factory=list)
    termination: str = ""

    def __len__(self):
        return len(self.iterations)

    def write_csv(self, path, class_names: Sequence[str]) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "added", "pool_size", "train_error",
                        *[f"added_{c}" for c in class_names]])
            for rec in self.iterations:
                w.writerow([rec.iteration, rec.added, rec.pool_size, repr(float(rec.train_error)),
                            *[rec.added_per_class.get(c, 0) for c in class_names]])


def select_confident(predictions, threshold: float):
    """``(index, label, confidence)`` for predictions whose top confidence reaches
    ``threshold`` (capped at 1), most confident first, ties by index."""
    if not 0.0 < threshold:
        raise ValueError("threshold must be positive")
    threshold = min(threshold, 1.0)
    picked = [(i, p.label, p.confidence) for i, p in enumerate(predictions)
              if p.confidence >= threshold]
    picked.sort(key=lambda t: (-t[2], t[0]))
    return picked


def _training_error(learner, X, y, n_classes):
    err = getattr(learner, "training_error", None)
    if callable(err):
        value = err()
        if value is not None:
            return float(value)
    return 0.5 * float(np.sum((one_hot(y, n_classes) - learner.predict_proba(X)) ** 2))


def _check_inputs(labeled: ExampleSet, unlabeled: ExampleSet):
    if not len(labeled):
        raise DatasetError("labeled set is empty")
    if not labeled.is_fully_labeled:
        raise DatasetError("labeled set contains rows without labels")
    if not same_schema(labeled, unlabeled):
        raise DatasetError("labeled and unlabeled schemas differ")
    if any(v is not None for v in unlabeled.labels):
        raise DatasetError("unlabeled set contains labels")


def self_train(labeled: ExampleSet, unlabeled: ExampleSet, cfg: SelfTrainConfig, learner):
    """Train, label the pool, absorb confident points, retrain.

    Every round refits ``learner`` from scratch on the current training set.
    Stops when nothing reaches the threshold, the pool is empty, or after
    ``cfg.max_iterations`` fits. Returns ``(learner, augmented_set, log)``.
    """
    _check_inputs(labeled, unlabeled)
    names = labeled.class_names
    n_classes = len(names)
    X_lab = labeled.features()
    y_lab = labeled.label_codes()
    X_pool = unlabeled.features()

    X_train, y_train = X_lab, y_lab
    added_pos: list = []
    added_labels: list = []
    remaining = np.arange(len(unlabeled))
    log = SelfTrainLog()

    for it in range(1, cfg.max_iterations + 1):
        learner.fit(X_train, y_train, n_classes)
        rec = IterationRecord(it, len(y_train), _training_error(learner, X_train, y_train, n_classes))
        log.iterations.append(rec)
        if it == cfg.max_iterations:
            log.termination = MAX_ITERATIONS
            break
        if not len(remaining):
            log.termination = POOL_EXHAUSTED
            break
        proba = learner.predict_proba(X_pool[remaining])
        preds = [make_prediction(p, names) for p in proba]
        chosen = select_confident(preds, cfg.confidence_threshold)
        if not chosen:
            log.termination = NO_CONFIDENT_POINTS
            break
        pos = np.array([remaining[i] for i, _, _ in chosen], dtype=np.intp)
        labels = [lab for _, lab, _ in chosen]
        codes = np.array([names.index(lab) for lab in labels], dtype=np.intp)
        X_train = np.vstack([X_train, X_pool[pos]])
        y_train = np.concatenate([y_train, codes])
        added_pos.extend(pos.tolist())
        added_labels.extend(labels)
        rec.added = len(chosen)
        rec.added_per_class = {c: labels.count(c) for c in names}
        rec.added_rows = tuple(zip((unlabeled.index[p] for p in pos), labels))
        remaining = np.setdiff1d(remaining, pos, assume_unique=True)

    augmented = labeled.concat(unlabeled.take(added_pos).with_labels(added_labels))
    return learner, augmented, log


@dataclass(frozen=True)
class ViewSplit:
    """Two disjoint, exhaustive sets of feature-column indices."""

    first: tuple
    second: tuple

    def validate(self, n_features: int):
        a, b = set(self.first), set(self.second)
        if not a or not b:
            raise ValueError("both views need at least one attribute")
        if a & b:
            raise ValueError(f"views overlap on columns {sorted(a & b)}")
        if a | b != set(range(n_features)):
            raise ValueError("views do not cover every attribute exactly once")


class CoTrainedClassifier:
    """Averages the two view models' confidences."""

    def __init__(self, first, second, split: ViewSplit):
        self.first = first
        self.second = second
        self.split = split

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        pa = self.first.predict_proba(X[:, list(self.split.first)])
        pb = self.second.predict_proba(X[:, list(self.split.second)])
        return 0.5 * (pa + pb)


@dataclass
class CoTrainRecord:
    iteration: int
    pool_sizes: tuple
    added_to_first: int = 0
    added_to_second: int = 0


def co_train(labeled: ExampleSet, unlabeled: ExampleSet, split: ViewSplit,
             cfg: SelfTrainConfig, learners):
    """Two view-specific learners teaching each other their confident labels.

    Returns ``(first, second, combined, log)``; ``log`` is a SelfTrainLog whose
    entries are CoTrainRecord objects.
    """
    _check_inputs(labeled, unlabeled)
    first, second = learners
    if first is second:
        raise ValueError("co-training needs two distinct learner objects")
    names = labeled.class_names
    n_classes = len(names)
    X_lab = labeled.features()
    split.validate(X_lab.shape[1])
    cols = (list(split.first), list(split.second))
    y_lab = labeled.label_codes()
    X_pool = unlabeled.features()

    # per view: extra pool positions and their donated codes
    extra = ([], [])
    extra_codes = ([], [])
    remaining = np.arange(len(unlabeled))
    log = SelfTrainLog()
    models = (first, second)

    for it in range(1, cfg.max_iterations + 1):
        for v in (0, 1):
            X = np.vstack([X_lab, X_pool[extra[v]]]) if extra[v] else X_lab
            y = np.concatenate([y_lab, extra_codes[v]]).astype(np.intp)
            models[v].fit(X[:, cols[v]], y, n_classes)
        rec = CoTrainRecord(it, (len(y_lab) + len(extra[0]), len(y_lab) + len(extra[1])))
        log.iterations.append(rec)
        if it == cfg.max_iterations:
            log.termination = MAX_ITERATIONS
            break
        if not len(remaining):
            log.termination = POOL_EXHAUSTED
            break
        picks = []
        for v in (0, 1):
            proba = models[v].predict_proba(X_pool[remaining][:, cols[v]])
            preds = [make_prediction(p, names) for p in proba]
            picks.append(select_confident(preds, cfg.confidence_threshold))
        if not picks[0] and not picks[1]:
            log.termination = NO_CONFIDENT_POINTS
            break
        taken = set()
        for donor, receiver in ((0, 1), (1, 0)):
            for i, lab, _ in picks[donor]:
                extra[receiver].append(int(remaining[i]))
                extra_codes[receiver].append(names.index(lab))
                taken.add(int(remaining[i]))
        rec.added_to_second = len(picks[0])
        rec.added_to_first = len(picks[1])
        remaining = np.array([p for p in remaining if p not in taken], dtype=np.intp)

    return first, second, CoTrainedClassifier(first, second, split), log
