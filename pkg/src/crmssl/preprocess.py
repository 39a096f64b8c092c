"""Nominal-to-numerical coding and [-1, +1] range scaling."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np

from .dataset import NUMERIC, REGULAR, Attribute, DatasetError, ExampleSet


class PreprocessError(ValueError):
    pass


@dataclass(frozen=True)
class NominalMapping:
    """Per-attribute token -> code tables, codes 0, 1, 2, ... by first appearance."""

    tables: dict  # attribute name -> {token: code}

    def to_dict(self):
        return {name: list(table) for name, table in self.tables.items()}

    @classmethod
    def from_dict(cls, d):
        return cls({name: {tok: i for i, tok in enumerate(toks)} for name, toks in d.items()})


@dataclass(frozen=True)
class ScalingParams:
    names: tuple
    minimum: tuple
    maximum: tuple

    def to_dict(self):
        return {"names": list(self.names), "min": list(self.minimum), "max": list(self.maximum)}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["names"]), tuple(float(v) for v in d["min"]),
                   tuple(float(v) for v in d["max"]))


def fit_nominal_mapping(es: ExampleSet) -> NominalMapping:
    if not len(es):
        raise PreprocessError("cannot fit on an empty set")
    tables = {}
    for j in es.regular_positions:
        attr = es.schema[j]
        if attr.is_nominal:
            seen = dict.fromkeys(row[j] for row in es.rows)
            tables[attr.name] = {tok: i for i, tok in enumerate(seen)}
    return NominalMapping(tables)


def apply_nominal_mapping(es: ExampleSet, m: NominalMapping) -> ExampleSet:
    """Replace nominal regular cells by their codes; the label stays as class names."""
    positions = []
    schema = list(es.schema)
    for j, attr in enumerate(es.schema):
        if attr.role != REGULAR or not attr.is_nominal:
            continue
        if attr.name not in m.tables:
            raise PreprocessError(f"mapping has no table for nominal attribute {attr.name!r}")
        positions.append((j, m.tables[attr.name]))
        schema[j] = Attribute(attr.name, NUMERIC, attr.role)
    if not positions:
        return es
    rows = []
    for r, row in enumerate(es.rows):
        row = list(row)
        for j, table in positions:
            try:
                row[j] = float(table[row[j]])
            except KeyError:
                raise PreprocessError(
                    f"row {r}: unseen token {row[j]!r} for attribute {es.schema[j].name!r}"
                ) from None
        rows.append(tuple(row))
    return replace(es, schema=tuple(schema), rows=tuple(rows))


def fit_scaler(es: ExampleSet) -> ScalingParams:
    X = es.features()
    if not len(X):
        raise PreprocessError("cannot fit on an empty set")
    names = tuple(a.name for a in es.regular_attributes)
    return ScalingParams(names, tuple(X.min(axis=0).tolist()), tuple(X.max(axis=0).tolist()))


def scale_matrix(X, p: ScalingParams):
    lo = np.asarray(p.minimum)
    hi = np.asarray(p.maximum)
    span = hi - lo
    const = span == 0
    safe = np.where(const, 1.0, span)
    out = 2.0 * (X - lo) / safe - 1.0
    out = np.clip(out, -1.0, 1.0)
    out[:, const] = 0.0
    return out


def apply_scaler(es: ExampleSet, p: ScalingParams) -> ExampleSet:
    names = tuple(a.name for a in es.regular_attributes)
    if names != p.names:
        raise PreprocessError("scaling parameters were fitted on a different schema")
    X = scale_matrix(es.features(), p)
    cols = es.regular_positions
    rows = []
    for row, xs in zip(es.rows, X.tolist()):
        row = list(row)
        for j, v in zip(cols, xs):
            row[j] = v
        rows.append(tuple(row))
    return replace(es, rows=tuple(rows))


class Preprocessor:
    """Fitted nominal mapping followed by scaling.

    ``transform`` stamps its output with a fingerprint of the fitted
    parameters, so running the same pipeline on its own output is a no-op.
    """

    def __init__(self, mapping: NominalMapping, scaling: ScalingParams):
        self.mapping = mapping
        self.scaling = scaling
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        self.fingerprint = hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def fit(cls, es: ExampleSet) -> "Preprocessor":
        mapping = fit_nominal_mapping(es)
        return cls(mapping, fit_scaler(apply_nominal_mapping(es, mapping)))

    def transform(self, es: ExampleSet) -> ExampleSet:
        if es.pipeline == self.fingerprint:
            return es
        if es.pipeline is not None:
            raise PreprocessError("set was already transformed by a different pipeline")
        out = apply_scaler(apply_nominal_mapping(es, self.mapping), self.scaling)
        return replace(out, pipeline=self.fingerprint)

    def transform_matrix(self, es: ExampleSet):
        return self.transform(es).features()

    @property
    def input_names(self):
        return self.scaling.names

    def to_dict(self):
        return {"nominal": self.mapping.to_dict(), "scaling": self.scaling.to_dict()}

    @classmethod
    def from_dict(cls, d) -> "Preprocessor":
        return cls(NominalMapping.from_dict(d["nominal"]), ScalingParams.from_dict(d["scaling"]))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "Preprocessor":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


__all__ = [
    "DatasetError",
    "NominalMapping",
    "PreprocessError",
    "Preprocessor",
    "ScalingParams",
    "apply_nominal_mapping",
    "apply_scaler",
    "fit_nominal_mapping",
    "fit_scaler",
    "scale_matrix",
]
