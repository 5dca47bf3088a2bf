"""CSV ingestion into standardized, split tabular datasets."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import IngestionError
from ..model.training import DataSplit

TRAIN_PCT = 42
VALID_PCT = 25


def split_sizes(n: int) -> tuple[int, int, int]:
    """Train/valid/test sizes: floor(42%), floor(25%), and the remainder."""
    n_train = n * TRAIN_PCT // 100
    n_valid = n * VALID_PCT // 100
    return n_train, n_valid, n - n_train - n_valid


@dataclass
class TabularDataset:
    features: np.ndarray
    labels: np.ndarray
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    feature_names: list[str]
    classes: list[str]
    mean: np.ndarray
    scale: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def train_valid(self) -> DataSplit:
        return DataSplit(
            self.features[self.train], self.labels[self.train],
            self.features[self.valid], self.labels[self.valid],
        )

    def test_split(self) -> tuple[np.ndarray, np.ndarray]:
        return self.features[self.test], self.labels[self.test]


def _parse_float_column(name: str, cells: Sequence[str]) -> np.ndarray | None:
    """Floats for an all-numeric column, None for an all-text column.

    A column that mixes the two is an error pointing at the first bad cell.
    """
    try:
        return np.array(cells, dtype=float)
    except ValueError:
        pass
    bad = []
    for i, c in enumerate(cells):
        try:
            float(c)
        except ValueError:
            bad.append(i)
    if len(bad) == len(cells):
        return None
    first = bad[0]
    # +2: one for the header line, one for 1-based line numbers
    raise IngestionError(
        f"non-numeric value {cells[first]!r} in feature column {name!r} at line {first + 2}"
    )


def _label_order(values: Sequence[str]) -> list[str]:
    uniq = set(values)
    try:
        return sorted(uniq, key=float)
    except ValueError:
        return sorted(uniq)


def load_csv(
    path,
    label_column: str,
    split_seed: int = 0,
    categorical_columns: Sequence[str] = (),
) -> TabularDataset:
    """Read a CSV with a header row and build a standardized dataset.

    Text-valued feature columns, and any listed in ``categorical_columns``, are
    one-hot encoded with categories in sorted order. Rows are shuffled with
    ``split_seed`` and split 42/25/33; every feature is then standardized with
    the training rows' mean and standard deviation (constant columns are only
    centered). Labels are mapped to ``0..C-1`` in sorted order.
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path} is empty") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestionError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            rows.append([c.strip() for c in row])
    if label_column not in header:
        raise IngestionError(f"label column {label_column!r} not in header {header}")
    if not rows:
        raise IngestionError(f"{path} has no data rows")
    missing = set(categorical_columns) - set(header)
    if missing:
        raise IngestionError(f"categorical columns not in header: {sorted(missing)}")

    columns = list(zip(*rows))
    label_idx = header.index(label_column)
    label_cells = columns[label_idx]
    classes = _label_order(label_cells)
    if len(classes) < 2:
        raise IngestionError(f"label column {label_column!r} has a single class {classes[0]!r}")
    class_index = {c: i for i, c in enumerate(classes)}
    labels = np.array([class_index[c] for c in label_cells], dtype=np.int64)

    blocks, names = [], []
    for j, name in enumerate(header):
        if j == label_idx:
            continue
        cells = columns[j]
        values = None if name in categorical_columns else _parse_float_column(name, cells)
        if values is not None:
            blocks.append(values[:, None])
            names.append(name)
            continue
        cats = sorted(set(cells))
        lookup = {c: i for i, c in enumerate(cats)}
        onehot = np.zeros((len(cells), len(cats)))
        onehot[np.arange(len(cells)), [lookup[c] for c in cells]] = 1.0
        blocks.append(onehot)
        names.extend(f"{name}={c}" for c in cats)
    if not blocks:
        raise IngestionError("no feature columns")
    features = np.hstack(blocks)

    n = len(labels)
    n_train, n_valid, _ = split_sizes(n)
    perm = np.random.default_rng(split_seed).permutation(n)
    train, valid, test = perm[:n_train], perm[n_train : n_train + n_valid], perm[n_train + n_valid :]
    if n_train == 0:
        raise IngestionError(f"{n} rows leave an empty training split")

    mean = features[train].mean(axis=0)
    scale = features[train].std(axis=0)
    scale[scale == 0] = 1.0
    features = (features - mean) / scale
    return TabularDataset(features, labels, train, valid, test, names, classes, mean, scale)


# Column layout of the UCI forest-cover data: 10 quantitative columns,
# 4 wilderness-area indicators, 40 soil-type indicators, then the label.
COVERTYPE_NUMERIC = [
    "Elevation", "Aspect", "Slope", "Horizontal_Distance_To_Hydrology",
    "Vertical_Distance_To_Hydrology", "Horizontal_Distance_To_Roadways", "Hillshade_9am",
    "Hillshade_Noon", "Hillshade_3pm", "Horizontal_Distance_To_Fire_Points",
]
COVERTYPE_HEADER = (
    COVERTYPE_NUMERIC
    + [f"Wilderness_Area{i}" for i in range(1, 5)]
    + [f"Soil_Type{i}" for i in range(1, 41)]
    + ["Cover_Type"]
)


def make_covertype_like(n_rows: int, seed: int = 0, noise: float = 0.3) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic rows in the forest-cover layout (54 features, labels 1..7).

    Labels are the argmax of class scores built mostly from products, periodic
    and even functions of the numeric columns, plus per-soil and
    per-wilderness offsets, so a linear classifier cannot separate them well.
    The teacher weights are fixed; ``seed`` only drives the sampled rows.
    """
    rng = np.random.default_rng(seed)
    teacher = np.random.default_rng(12345)
    z = rng.normal(size=(n_rows, 10))
    wild = rng.integers(0, 4, n_rows)
    soil = rng.integers(0, 40, n_rows)
    nonlinear = np.column_stack([
        z[:, 0] * z[:, 1],
        z[:, 2] * z[:, 5],
        np.abs(z[:, 3]),
        np.sin(2 * z[:, 0]),
        z[:, 4] ** 2 - 1,
        np.tanh(2 * z[:, 6]) * z[:, 7],
        np.cos(1.5 * z[:, 8]),
    ])
    logits = (
        1.5 * nonlinear @ teacher.normal(size=(nonlinear.shape[1], 7))
        + 0.5 * z @ teacher.normal(size=(10, 7))
        + 0.6 * teacher.normal(size=(40, 7))[soil]
        + 0.6 * teacher.normal(size=(4, 7))[wild]
        + rng.normal(scale=noise, size=(n_rows, 7))
    )
    labels = logits.argmax(axis=1) + 1

    scale = np.array([300, 110, 8, 210, 58, 1550, 27, 20, 38, 1320], dtype=float)
    loc = np.array([2960, 155, 14, 270, 46, 2350, 212, 223, 142, 1980], dtype=float)
    x = np.zeros((n_rows, 54))
    x[:, :10] = np.round(z * scale + loc, 1)
    x[np.arange(n_rows), 10 + wild] = 1
    x[np.arange(n_rows), 14 + soil] = 1
    return x, labels


def balanced_subsample(labels: np.ndarray, n: int, seed: int = 0) -> np.ndarray:
    """Row indices of a class-balanced subsample of size ``n`` (as even as the data allows)."""
    rng = np.random.default_rng(seed)
    classes = np.unique(labels)
    per_class = {c: rng.permutation(np.flatnonzero(labels == c)) for c in classes}
    quota = {c: 0 for c in classes}
    remaining = n
    # hand out quotas round-robin so small classes are exhausted gracefully
    while remaining > 0:
        progressed = False
        for c in classes:
            if remaining and quota[c] < len(per_class[c]):
                quota[c] += 1
                remaining -= 1
                progressed = True
        if not progressed:
            raise IngestionError(f"only {n - remaining} rows available, asked for {n}")
    picked = np.concatenate([per_class[c][: quota[c]] for c in classes])
    return np.sort(picked)


def write_csv(path, header: Sequence[str], features: np.ndarray, labels: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row, label in zip(features, labels):
            w.writerow([f"{v:g}" for v in row] + [int(label)])


def write_covertype_like(path, n_rows: int, seed: int = 0, pool_factor: int = 5) -> None:
    """Write a class-balanced synthetic forest-cover CSV with ``n_rows`` rows."""
    x, y = make_covertype_like(n_rows * pool_factor, seed)
    keep = balanced_subsample(y, n_rows, seed)
    write_csv(path, COVERTYPE_HEADER, x[keep], y[keep])
