"""Confusion matrices, rate metrics, the hidden-size sweep and learner comparisons."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import ExampleSet
from .mlp import MlpClassifier, TrainConfig, default_hidden_size
from .preprocess import Preprocessor
from .ssl import SelfTrainConfig, self_train

UNDEFINED = "undefined"
ACCURACY_NOTE = (
    "accuracy = (a+d)/(a+b+c+d); true positive = d/(c+d); false positive = b/(a+b); "
    "true negative = a/(a+b); false negative = c/(c+d); "
    "a,b = actual negative predicted negative/positive, c,d = actual positive predicted "
    "negative/positive"
)


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    a: int  # actual negative, predicted negative
    b: int  # actual negative, predicted positive
    c: int  # actual positive, predicted negative
    d: int  # actual positive, predicted positive
    positive_class: str = "positive"
    negative_class: str = "negative"

    @property
    def total(self):
        return self.a + self.b + self.c + self.d

    def swapped(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.d, self.c, self.b, self.a,
                               self.negative_class, self.positive_class)


@dataclass(frozen=True)
class MetricsReport:
    """Rates in [0, 1]; ``None`` where the denominator is zero."""

    accuracy: float
    true_positive_rate: Optional[float]
    false_positive_rate: Optional[float]
    true_negative_rate: Optional[float]
    false_negative_rate: Optional[float]

    def as_dict(self, percent=False):
        out = {}
        for k, v in asdict(self).items():
            if v is None:
                out[k] = UNDEFINED
            else:
                out[k] = round(100.0 * v, 2) if percent else v
        return out


def confusion(predicted: Sequence, actual: Sequence, positive_class: str,
              classes: Optional[Sequence] = None) -> ConfusionMatrix:
    """Count prediction/actual pairs; ``classes`` names the two classes if the
    labels alone do not show both."""
    if len(predicted) != len(actual):
        raise EvaluationError("predicted and actual lengths differ")
    if not len(actual):
        raise EvaluationError("nothing to evaluate")
    if classes is None:
        classes = list(dict.fromkeys([*actual, *predicted, positive_class]))
        if len(classes) == 1:
            raise EvaluationError("cannot infer the negative class; pass classes")
    classes = list(classes)
    if len(classes) != 2 or positive_class not in classes:
        raise EvaluationError(f"need two classes including {positive_class!r}, got {classes}")
    negative_class = classes[0] if classes[1] == positive_class else classes[1]
    counts = {(negative_class, negative_class): 0, (negative_class, positive_class): 0,
              (positive_class, negative_class): 0, (positive_class, positive_class): 0}
    for p, t in zip(predicted, actual):
        if (t, p) not in counts:
            raise EvaluationError(f"unknown label in pair (predicted={p!r}, actual={t!r})")
        counts[(t, p)] += 1
    return ConfusionMatrix(
        counts[(negative_class, negative_class)],
        counts[(negative_class, positive_class)],
        counts[(positive_class, negative_class)],
        counts[(positive_class, positive_class)],
        positive_class,
        negative_class,
    )


def _ratio(num, den):
    return num / den if den else None


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total <= 0:
        raise EvaluationError("empty confusion matrix")
    return MetricsReport(
        accuracy=(cm.a + cm.d) / cm.total,
        true_positive_rate=_ratio(cm.d, cm.c + cm.d),
        false_positive_rate=_ratio(cm.b, cm.a + cm.b),
        true_negative_rate=_ratio(cm.a, cm.a + cm.b),
        false_negative_rate=_ratio(cm.c, cm.c + cm.d),
    )


def evaluation_report(cm: ConfusionMatrix) -> dict:
    return {
        "confusion": asdict(cm),
        "metrics": metrics(cm).as_dict(),
        "footer": ACCURACY_NOTE,
    }


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- pipeline helpers ------------------------------------------------------


@dataclass
class PreparedData:
    labeled: ExampleSet
    unlabeled: ExampleSet
    test: ExampleSet
    preprocessor: Optional[Preprocessor]

    @property
    def class_names(self):
        return self.labeled.class_names

    @property
    def n_features(self):
        return len(self.labeled.regular_positions)


def prepare(labeled: ExampleSet, unlabeled: ExampleSet, test: ExampleSet) -> PreparedData:
    """Fit preprocessing on the training rows (labeled + unlabeled) and apply it."""
    stamps = {labeled.pipeline, unlabeled.pipeline, test.pipeline}
    if len(stamps) == 1 and None not in stamps:
        return PreparedData(labeled, unlabeled, test, None)
    train = labeled.concat(unlabeled.with_labels([None] * len(unlabeled)))
    pre = Preprocessor.fit(train)
    return PreparedData(pre.transform(labeled), pre.transform(unlabeled),
                        pre.transform(test), pre)


def predicted_labels(model, X, class_names):
    proba = model.predict_proba(X)
    return [class_names[i] for i in np.argmax(proba, axis=1)]


def fit_arm(learner, data: PreparedData, cfg: SelfTrainConfig, semi_supervised: bool):
    """Fit ``learner`` with self-training or on the labeled rows only."""
    if semi_supervised:
        learner, _, log = self_train(data.labeled, data.unlabeled, cfg, learner)
        return learner, log
    learner.fit(data.labeled.features(), data.labeled.label_codes(), len(data.class_names))
    return learner, None


def holdout_confusion(model, data: PreparedData, positive_class: Optional[str] = None):
    names = data.class_names
    positive = positive_class or names[-1]
    pred = predicted_labels(model, data.test.features(), names)
    return confusion(pred, list(data.test.labels), positive, names)


# -- hidden-size sweep -----------------------------------------------------

PLAIN = "plain"
PLUS_ONE = "plus_one"


@dataclass
class SweepRow:
    divisor: int
    hidden_size: int
    error_percent: float
    formula_variant: str


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["divisor", "hidden_size", "error_percent", "formula_variant"])
            for r in self.rows:
                w.writerow([r.divisor, r.hidden_size, f"{r.error_percent:.2f}", r.formula_variant])


def sweep_divisor(labeled, unlabeled, test, divisors: Sequence[int], plus_one: bool,
                  cfg: SelfTrainConfig, init_seed: int = 0, semi_supervised: bool = True,
                  positive_class: Optional[str] = None) -> SweepResult:
    """Test error of the full pipeline for hidden size ``(attrs + classes) / X``
    (plus one when ``plus_one``) at each divisor ``X``."""
    if not divisors:
        raise EvaluationError("no divisors given")
    data = prepare(labeled, unlabeled, test)
    variant = PLUS_ONE if plus_one else PLAIN
    result = SweepResult()
    for x in divisors:
        h = default_hidden_size(data.n_features, len(data.class_names), x, plus_one)
        learner = MlpClassifier(hidden_size=h, config=cfg.base, init_seed=init_seed)
        model, _ = fit_arm(learner, data, cfg, semi_supervised)
        acc = metrics(holdout_confusion(model, data, positive_class)).accuracy
        result.rows.append(SweepRow(x, h, 100.0 * (1.0 - acc), variant))
    return result


# -- learner comparison ----------------------------------------------------


@dataclass
class ComparisonRow:
    name: str
    confusion: ConfusionMatrix
    report: MetricsReport


@dataclass
class ComparisonTable:
    positive_class: str
    negative_class: str
    rows: list = field(default_factory=list)

    @property
    def columns(self):
        p, n = self.positive_class, self.negative_class
        return ["Operator", "Accuracy (%)", f"True {p} (%)", f"True {n} (%)",
                f"False {p} (%)", f"False {n} (%)"]

    def records(self):
        out = []
        for row in self.rows:
            m = row.report.as_dict(percent=True)
            vals = [m["accuracy"], m["true_positive_rate"], m["true_negative_rate"],
                    m["false_positive_rate"], m["false_negative_rate"]]
            out.append([row.name, *[v if v == UNDEFINED else f"{v:.2f}" for v in vals]])
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            w.writerows(self.records())

    def to_dict(self):
        return {
            "columns": self.columns,
            "rows": [dict(zip(self.columns, rec)) for rec in self.records()],
            "confusion": {r.name: asdict(r.confusion) for r in self.rows},
            "footer": ACCURACY_NOTE,
        }

    def to_text(self):
        widths = [max(len(str(x)) for x in col) for col in zip(self.columns, *self.records())]
        lines = ["  ".join(str(v).ljust(w) for v, w in zip(rec, widths))
                 for rec in [self.columns, *self.records()]]
        return "\n".join(lines + ["", ACCURACY_NOTE])


def compare(learners, labeled, unlabeled, test, cfg: SelfTrainConfig,
            positive_class: Optional[str] = None) -> ComparisonTable:
    """One row per ``(name, learner, semi_supervised)`` entry, in the given order."""
    if not learners:
        raise EvaluationError("no learners given")
    data = prepare(labeled, unlabeled, test)
    table = None
    for name, learner, semi in learners:
        model, _ = fit_arm(learner, data, cfg, semi)
        cm = holdout_confusion(model, data, positive_class)
        if table is None:
            table = ComparisonTable(cm.positive_class, cm.negative_class)
        table.rows.append(ComparisonRow(name, cm, metrics(cm)))
    return table


def default_mlp(cfg: SelfTrainConfig, init_seed: int = 0, **kw) -> MlpClassifier:
    return MlpClassifier(config=cfg.base, init_seed=init_seed, **kw)


__all__ = [
    "ComparisonTable",
    "ConfusionMatrix",
    "MetricsReport",
    "SweepResult",
    "TrainConfig",
    "compare",
    "confusion",
    "metrics",
    "prepare",
    "sweep_divisor",
]
