"""Tabular example sets: CSV loading, attribute roles, seeded splits, synthetic data."""
from __future__ import annotations

import csv
import math
import os
import weakref
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

NUMERIC = "numeric"
BINARY = "binary-nominal"
NOMINAL = "nominal"
KINDS = (NUMERIC, BINARY, NOMINAL)

REGULAR = "regular"
LABEL = "label"
ID = "id"
ROLES = (REGULAR, LABEL, ID)


class DatasetError(ValueError):
    """Raised for malformed input data or invalid split requests."""


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str
    role: str = REGULAR
    values: tuple = ()  # vocabulary for nominal kinds, first-appearance order

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DatasetError(f"unknown attribute kind {self.kind!r}")
        if self.role not in ROLES:
            raise DatasetError(f"unknown attribute role {self.role!r}")
        if self.kind != NUMERIC and not self.values:
            raise DatasetError(f"nominal attribute {self.name!r} needs a vocabulary")

    @property
    def is_nominal(self):
        return self.kind != NUMERIC


@dataclass(frozen=True, eq=False)
class ExampleSet:
    """Immutable schema + rows. A label cell of ``None`` marks an unlabeled row.

    ``index`` holds the row numbers of the originating file so that splits
    can be written out as manifests. ``pipeline`` is set by preprocessing to
    the fingerprint of the transform that produced the set.
    """

    schema: tuple
    rows: tuple
    index: tuple = ()
    pipeline: Optional[str] = None

    def __post_init__(self):
        labels = [a for a in self.schema if a.role == LABEL]
        if len(labels) != 1:
            raise DatasetError(f"schema needs exactly one label attribute, got {len(labels)}")
        if not self.index:
            object.__setattr__(self, "index", tuple(range(len(self.rows))))
        if len(self.index) != len(self.rows):
            raise DatasetError("index length differs from row count")
        width = len(self.schema)
        label_pos = self.label_position
        for r, row in enumerate(self.rows):
            if len(row) != width:
                raise DatasetError(f"row {r} has {len(row)} cells, expected {width}")
            for j, (attr, v) in enumerate(zip(self.schema, row)):
                if v is None:
                    if j != label_pos:
                        raise DatasetError(f"row {r}: missing value for {attr.name!r}")
                    continue
                if attr.is_nominal and v not in attr.values:
                    raise DatasetError(f"row {r}: {v!r} not in vocabulary of {attr.name!r}")

    def __len__(self):
        return len(self.rows)

    @property
    def label_position(self):
        return next(j for j, a in enumerate(self.schema) if a.role == LABEL)

    @property
    def label_attribute(self):
        return self.schema[self.label_position]

    @property
    def class_names(self):
        return self.label_attribute.values

    @property
    def regular_positions(self):
        return [j for j, a in enumerate(self.schema) if a.role == REGULAR]

    @property
    def regular_attributes(self):
        return [self.schema[j] for j in self.regular_positions]

    @property
    def labels(self):
        pos = self.label_position
        return tuple(row[pos] for row in self.rows)

    @property
    def is_fully_labeled(self):
        return all(v is not None for v in self.labels)

    def features(self):
        """Regular attributes as a float matrix; requires numeric regular columns."""
        cols = self.regular_positions
        for j in cols:
            if self.schema[j].is_nominal:
                raise DatasetError(
                    f"attribute {self.schema[j].name!r} is nominal; map it to numbers first"
                )
        if not self.rows:
            return np.zeros((0, len(cols)))
        return np.array([[row[j] for j in cols] for row in self.rows], dtype=np.float64)

    def label_codes(self):
        """Integer class codes in ``class_names`` order; requires every row labeled."""
        lookup = {c: i for i, c in enumerate(self.class_names)}
        labels = self.labels
        if any(v is None for v in labels):
            raise DatasetError("set contains unlabeled rows")
        return np.array([lookup[v] for v in labels], dtype=np.intp)

    def take(self, positions) -> "ExampleSet":
        positions = list(positions)
        return replace(
            self,
            rows=tuple(self.rows[p] for p in positions),
            index=tuple(self.index[p] for p in positions),
        )

    def with_labels(self, labels) -> "ExampleSet":
        labels = list(labels)
        if len(labels) != len(self.rows):
            raise DatasetError("label count differs from row count")
        pos = self.label_position
        rows = tuple(row[:pos] + (lab,) + row[pos + 1:] for row, lab in zip(self.rows, labels))
        return replace(self, rows=rows)

    def concat(self, other: "ExampleSet") -> "ExampleSet":
        if not same_schema(self, other):
            raise DatasetError("cannot concatenate sets with different schemas")
        return replace(self, rows=self.rows + other.rows, index=self.index + other.index)


def same_schema(a: ExampleSet, b: ExampleSet) -> bool:
    return [(x.name, x.kind, x.role) for x in a.schema] == [
        (x.name, x.kind, x.role) for x in b.schema
    ]


# Ground truth of stripped rows, keyed by the unlabeled ExampleSet object.
_SEALED: "weakref.WeakKeyDictionary[ExampleSet, tuple]" = weakref.WeakKeyDictionary()


def sealed_labels(unlabeled: ExampleSet) -> tuple:
    """Hidden true labels of a pool made by :func:`split_labeled_unlabeled`.

    For post-hoc evaluation only; learners never receive this.
    """
    try:
        return _SEALED[unlabeled]
    except KeyError:
        raise DatasetError("no sealed labels recorded for this set") from None


def _parse_float(token):
    try:
        v = float(token)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, label_column: str) -> ExampleSet:
    if not os.path.isfile(path):
        raise DatasetError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        raw = [r for r in reader if r]
    header = [h.strip() for h in header]
    if label_column not in header:
        raise DatasetError(f"{path}: label column {label_column!r} not in header")
    if not raw:
        raise DatasetError(f"{path}: no data rows")
    for n, r in enumerate(raw, start=2):
        if len(r) != len(header):
            raise DatasetError(f"{path}: line {n} has {len(r)} cells, expected {len(header)}")

    label_pos = header.index(label_column)
    schema = []
    columns = []
    for j, name in enumerate(header):
        cells = [r[j].strip() for r in raw]
        present = [c for c in cells if c != ""]
        role = LABEL if j == label_pos else REGULAR
        if role == REGULAR and len(present) != len(cells):
            raise DatasetError(f"{path}: column {name!r} has missing values")
        if not present:
            raise DatasetError(f"{path}: column {name!r} is empty")
        vocab = tuple(dict.fromkeys(present))
        numbers = [_parse_float(c) for c in present]
        if role == REGULAR and all(v is not None for v in numbers):
            schema.append(Attribute(name, NUMERIC, role))
            columns.append([_parse_float(c) for c in cells])
        else:
            kind = BINARY if len(vocab) == 2 else NOMINAL
            schema.append(Attribute(name, kind, role, vocab))
            columns.append([c if c != "" else None for c in cells])
    rows = tuple(zip(*columns))
    return ExampleSet(tuple(schema), rows)


def write_csv(es: ExampleSet, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([a.name for a in es.schema])
        for row in es.rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise DatasetError("test_fraction must lie strictly between 0 and 1")
        if self.seed < 0:
            raise DatasetError("seed must be non-negative")


def split_random(es: ExampleSet, spec: SplitSpec):
    """Seeded random partition into ``(train, test)``; test gets the floor share."""
    n = len(es)
    if n < 2:
        raise DatasetError("need at least 2 rows to split")
    n_test = int(math.floor(spec.test_fraction * n))
    perm = np.random.default_rng(spec.seed).permutation(n)
    test_pos = np.sort(perm[:n_test])
    train_pos = np.sort(perm[n_test:])
    return es.take(train_pos), es.take(test_pos)


def split_labeled_unlabeled(train: ExampleSet, labeled_count: int, seed: int):
    """Keep ``labeled_count`` random rows labeled and strip the rest.

    The stripped labels go to a sealed store readable via :func:`sealed_labels`.
    """
    n = len(train)
    if not 0 < labeled_count <= n:
        raise DatasetError(f"labeled_count must be in 1..{n}, got {labeled_count}")
    if not train.is_fully_labeled:
        raise DatasetError("training set contains unlabeled rows")
    perm = np.random.default_rng(seed).permutation(n)
    lab_pos = np.sort(perm[:labeled_count])
    unl_pos = np.sort(perm[labeled_count:])
    labeled = train.take(lab_pos)
    pool = train.take(unl_pos)
    truth = pool.labels
    unlabeled = pool.with_labels([None] * len(pool))
    _SEALED[unlabeled] = truth
    return labeled, unlabeled


def generate_synthetic(n: int, d: int, class_separation: float, seed: int,
                       class_names: Sequence[str] = ("no", "yes")) -> ExampleSet:
    """Two balanced Gaussian classes with unit variance and means at -/+ separation/2."""
    if n < 2 or d < 1:
        raise DatasetError("need n >= 2 and d >= 1")
    if class_separation < 0:
        raise DatasetError("class_separation must be non-negative")
    rng = np.random.default_rng(seed)
    y = np.zeros(n, dtype=np.intp)
    y[n // 2:] = 1
    y = rng.permutation(y)
    means = np.where(y == 1, 0.5, -0.5) * class_separation
    X = rng.standard_normal((n, d)) + means[:, None]
    names = tuple(class_names)
    schema = tuple(Attribute(f"f{j + 1}", NUMERIC) for j in range(d)) + (
        Attribute("class", BINARY, LABEL, names),
    )
    rows = tuple(tuple(float(v) for v in X[i]) + (names[y[i]],) for i in range(n))
    return ExampleSet(schema, rows)


def write_manifest(path, partitions: dict) -> None:
    """Write ``row_index,partition`` lines for each named ExampleSet, sorted by row."""
    entries = sorted((i, name) for name, es in partitions.items() for i in es.index)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row_index", "partition"])
        w.writerows(entries)


def read_manifest(path) -> dict:
    parts: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            parts.setdefault(rec["partition"], []).append(int(rec["row_index"]))
    return parts
