"""Tabular dataset loading, one-hot encoding, standardization and metrics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str = "numeric"  # "numeric" | "nominal"
    categories: tuple[str, ...] = ()

    @property
    def is_nominal(self) -> bool:
        return self.kind == "nominal"


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered predictors plus the binary label declaration.

    ``label_values`` lists the two raw label strings accepted in the file;
    ``positive_label`` is the one mapped to internal label 1.
    """

    features: tuple[Feature, ...]
    label_column: str
    label_values: tuple[str, str]
    positive_label: str

    def __post_init__(self):
        names = [f.name for f in self.features]
        if not names:
            raise DataError("schema declares no features")
        if any(not n for n in names):
            raise DataError("feature names must be non-empty")
        if len(set(names)) != len(names):
            raise DataError(f"duplicate feature names in schema: {names}")
        if self.label_column in names:
            raise DataError(f"label column {self.label_column!r} is also listed as a feature")
        for f in self.features:
            if f.kind not in ("numeric", "nominal"):
                raise DataError(f"feature {f.name!r}: unknown kind {f.kind!r}")
            if f.is_nominal and len(set(f.categories)) < 2:
                raise DataError(f"nominal feature {f.name!r} needs at least 2 categories")
        if len(self.label_values) != 2 or self.label_values[0] == self.label_values[1]:
            raise DataError("exactly two distinct label values are required")
        if self.positive_label not in self.label_values:
            raise DataError(f"positive label {self.positive_label!r} not among {self.label_values}")

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeatureSchema":
        feats = tuple(
            Feature(f["name"], f.get("kind", "numeric"), tuple(str(c) for c in f.get("categories", ())))
            for f in d["features"]
        )
        labels = tuple(str(v) for v in d["labels"])
        return cls(feats, d["label_column"], labels, str(d.get("positive_label", labels[-1])))

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def label_text(self, label: int) -> str:
        neg = next(v for v in self.label_values if v != self.positive_label)
        return self.positive_label if label == 1 else neg


@dataclass(frozen=True)
class Dataset:
    """Training sample: encoded matrix, 0/1 labels and the raw rows.

    Before encoding, nominal columns hold the category index as a float.
    """

    schema: FeatureSchema
    points: np.ndarray
    labels: np.ndarray
    raw_rows: tuple[dict, ...]
    columns: tuple[str, ...] = ()
    encoded: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        lab = np.asarray(self.labels, dtype=int)
        if pts.ndim != 2:
            raise DataError("points must be a 2-D matrix")
        if pts.shape[0] != lab.shape[0]:
            raise DataError(f"{pts.shape[0]} points but {lab.shape[0]} labels")
        if not np.all(np.isfinite(pts)):
            raise DataError("non-finite value in point matrix")
        pts.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)
        if not self.columns:
            object.__setattr__(self, "columns", self.schema.feature_names)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def without_row(self, index: int) -> "Dataset":
        keep = np.arange(self.m) != index
        rows = tuple(r for i, r in enumerate(self.raw_rows) if i != index)
        return replace(self, points=self.points[keep], labels=self.labels[keep], raw_rows=rows)


def _parse_cell(feature: Feature, text: str, lineno: int):
    text = text.strip()
    if text == "":
        raise DataError(f"row {lineno}: missing value for {feature.name!r}")
    if feature.is_nominal:
        if text not in feature.categories:
            raise DataError(f"row {lineno}: unknown category {text!r} for {feature.name!r}")
        return text
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"row {lineno}: non-numeric value {text!r} in column {feature.name!r}") from None
    if not math.isfinite(value):
        raise DataError(f"row {lineno}: non-finite value in column {feature.name!r}")
    return value


def raw_to_vector(schema: FeatureSchema, raw: Mapping) -> np.ndarray:
    """Pre-encoding vector of a raw row (nominal -> category index)."""
    out = []
    for f in schema.features:
        v = raw[f.name]
        out.append(float(f.categories.index(v)) if f.is_nominal else float(v))
    return np.array(out)


def load_dataset(path, schema: FeatureSchema) -> Dataset:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError("no data rows")
        header = [h.strip() for h in header]
        expected = list(schema.feature_names) + [schema.label_column]
        if sorted(header) != sorted(expected):
            raise DataError(f"header mismatch: expected columns {expected}, got {header}")
        pos = {name: header.index(name) for name in expected}
        raw_rows, labels = [], []
        for lineno, cells in enumerate(reader, start=2):
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != len(header):
                raise DataError(f"row {lineno}: expected {len(header)} cells, got {len(cells)}")
            raw = {f.name: _parse_cell(f, cells[pos[f.name]], lineno) for f in schema.features}
            label = cells[pos[schema.label_column]].strip()
            if label not in schema.label_values:
                raise DataError(
                    f"row {lineno}: label {label!r} not in declared labels {list(schema.label_values)}"
                )
            raw_rows.append(raw)
            labels.append(1 if label == schema.positive_label else 0)
    if not raw_rows:
        raise DataError("no data rows")
    points = np.array([raw_to_vector(schema, r) for r in raw_rows])
    return Dataset(schema, points, np.array(labels), tuple(raw_rows))


def encoded_columns(schema: FeatureSchema) -> tuple[str, ...]:
    cols = []
    for f in schema.features:
        if f.is_nominal:
            cols.extend(f"{f.name}={c}" for c in f.categories)
        else:
            cols.append(f.name)
    return tuple(cols)


def encode_vector(schema: FeatureSchema, raw: Mapping) -> np.ndarray:
    out = []
    for f in schema.features:
        v = raw[f.name]
        if f.is_nominal:
            out.extend(1.0 if c == v else 0.0 for c in f.categories)
        else:
            out.append(float(v))
    return np.array(out)


def one_hot_encode(ds: Dataset) -> Dataset:
    if ds.encoded:
        return ds
    if not any(f.is_nominal for f in ds.schema.features):
        return replace(ds, encoded=True)
    blocks = []
    for j, f in enumerate(ds.schema.features):
        col = ds.points[:, j]
        if f.is_nominal:
            idx = col.astype(int)
            blocks.append(np.eye(len(f.categories))[idx])
        else:
            blocks.append(col[:, None])
    return replace(ds, points=np.hstack(blocks), columns=encoded_columns(ds.schema), encoded=True)


def decode(ds: Dataset) -> Dataset:
    """Inverse of :func:`one_hot_encode`."""
    if not ds.encoded:
        return ds
    cols, j = [], 0
    for f in ds.schema.features:
        if f.is_nominal:
            k = len(f.categories)
            cols.append(np.argmax(ds.points[:, j:j + k], axis=1).astype(float))
            j += k
        else:
            cols.append(ds.points[:, j])
            j += 1
    return replace(ds, points=np.column_stack(cols), columns=ds.schema.feature_names, encoded=False)


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray
    zero_variance: np.ndarray = field(default=None)

    def transform(self, x):
        return (np.asarray(x, dtype=float) - self.mean) / self.std

    def inverse(self, z):
        return np.asarray(z, dtype=float) * self.std + self.mean


def standardize(ds: Dataset) -> tuple[Dataset, Standardizer]:
    """Z-score every column (sample std); zero-variance columns pass through."""
    X = ds.points
    if ds.m < 2:
        std = np.zeros(ds.n)
    else:
        std = X.std(axis=0, ddof=1)
    zero = std == 0
    mean = np.where(zero, 0.0, X.mean(axis=0))
    std = np.where(zero, 1.0, std)
    scaler = Standardizer(mean, std, zero)
    return replace(ds, points=scaler.transform(X)), scaler


def max_variance_feature(data) -> int:
    """Column index of largest sample variance; ties go to the lowest index."""
    X = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise DataError("empty dataset")
    if X.shape[0] < 2:
        return 0
    var = X.var(axis=0, ddof=1)
    return int(np.argmax(var))


def euclid_distance(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


@dataclass
class TestQuery:
    """The point being explained (encoded vector + raw feature values)."""

    point: np.ndarray
    raw: dict
    predicted_label: int | None = None
    probability: float | None = None
    row_index: int | None = None

    __test__ = False  # keep pytest from collecting this class
