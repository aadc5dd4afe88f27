"""Dataset ingestion, stratified splitting and min-max scaling to input volts."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    features: tuple[float, ...]
    label: str


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    classes: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.y)

    @property
    def targets(self) -> np.ndarray:
        """One-hot targets at 1.0 V / 0.0 V."""
        return one_hot(self.y, len(self.classes))


def one_hot(labels, n_classes: int) -> np.ndarray:
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), np.asarray(labels, dtype=int)] = 1.0
    return out


def default_dataset_path() -> Path:
    return Path(str(resources.files("imcsim") / "data" / "iris.csv"))


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_records(path, n_features: int = 4) -> list[DatasetRecord]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    records = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            row = [c.strip() for c in row]
            if not row or all(c == "" for c in row):
                continue
            if len(row) != n_features + 1:
                raise DatasetError(
                    f"{path}:{lineno}: expected {n_features} features + 1 label, got {len(row)} columns")
            if lineno == 1 and not all(_is_number(c) for c in row[:n_features]):
                continue  # header
            try:
                feats = tuple(float(c) for c in row[:n_features])
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: non-numeric feature in {row[:n_features]}") from None
            if not all(np.isfinite(feats)):
                raise DatasetError(f"{path}:{lineno}: non-finite feature value")
            if not row[n_features]:
                raise DatasetError(f"{path}:{lineno}: empty label")
            records.append(DatasetRecord(feats, row[n_features]))
    if not records:
        raise DatasetError(f"{path}: no data rows (expected {n_features} numeric columns + label)")
    return records


def load_dataset(path=None, classes=None, n_features: int = 4) -> Dataset:
    """Read a features+label CSV; ``classes`` fixes the label order if given."""
    records = load_records(path or default_dataset_path(), n_features)
    if classes is None:
        classes = tuple(sorted({r.label for r in records}))
    else:
        classes = tuple(classes)
        known = set(classes)
        for i, r in enumerate(records):
            if r.label not in known:
                raise DatasetError(f"record {i}: unknown label {r.label!r}; known classes: {', '.join(classes)}")
    index = {c: i for i, c in enumerate(classes)}
    X = np.array([r.features for r in records], dtype=float)
    y = np.array([index[r.label] for r in records], dtype=int)
    return Dataset(X, y, classes)


def stratified_split(y, test_fraction: float, rng: np.random.Generator):
    """Indices (train, test) with round(test_fraction * n_c) test samples per class."""
    y = np.asarray(y)
    train, test = [], []
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(len(idx))]
        n_test = int(round(test_fraction * len(idx)))
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def minmax_fit(X):
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    degenerate = span <= 0
    if degenerate.any():
        warnings.warn(f"degenerate feature column(s) {np.flatnonzero(degenerate).tolist()} scaled to 0",
                      RuntimeWarning, stacklevel=3)
    return lo, np.where(degenerate, np.inf, span)


def minmax_apply(X, lo, span):
    return (X - lo) / span


def normalize_split(data: Dataset, seed: int = 0, test_fraction: float = 0.2):
    """Stratified split then per-feature [0, 1] scaling with train statistics.

    Training samples are returned in a seeded shuffled presentation order.
    """
    if len(data) == 0:
        raise DatasetError("cannot split an empty dataset")
    rng = np.random.default_rng(seed)
    tr, te = stratified_split(data.y, test_fraction, rng)
    tr = tr[rng.permutation(len(tr))]
    lo, span = minmax_fit(data.X[tr])
    train = Dataset(minmax_apply(data.X[tr], lo, span), data.y[tr], data.classes)
    test = Dataset(minmax_apply(data.X[te], lo, span), data.y[te], data.classes)
    return train, test
