"""Dataset ingestion, label orientation, standardization, stratified fold
planning and minority undersampling.

Input formats: a sparse text format (``<label> <index>:<value> ...`` with
1-based ascending indices) and a plain CSV (``label,f1,...,fn``).  Datasets
are dense in memory; the largest set targeted here is ~20k x 22.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RawData:
    """Parsed features plus unoriented labels (e.g. {1,2}, {+1,-1}, {0,1})."""

    X: np.ndarray
    labels: np.ndarray


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with 0/1 targets; minority class is labelled 1."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("feature/target row mismatch")
        if not np.all(np.isin(self.y, (0, 1))):
            raise ValueError("targets must be 0/1")

    @property
    def n_x(self) -> int:
        return self.X.shape[1]

    @property
    def m_tot(self) -> int:
        return self.X.shape[0]

    @property
    def m1(self) -> int:
        return int(np.sum(self.y == 1))

    @property
    def m0(self) -> int:
        return int(np.sum(self.y == 0))

    @property
    def ir(self) -> float:
        return self.m0 / self.m1

    def subset(self, idx) -> "Dataset":
        return Dataset(X=self.X[idx], y=self.y[idx])


@dataclass(frozen=True)
class FoldPlan:
    """Stratified fold assignment per example; folds partition the dataset."""

    k: int
    assignments: np.ndarray

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)


def parse_sparse(source) -> RawData:
    """Parse the sparse text format from a path or open text stream.

    Omitted indices read as 0; the feature width is the largest index seen.
    Malformed lines are reported with their line number.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source) as fh:
            lines = fh.read().splitlines()
    rows = []
    labels = []
    n_x = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            labels.append(float(tokens[0]))
        except ValueError:
            raise DataFormatError(f"line {lineno}: bad label {tokens[0]!r}")
        row = {}
        prev = 0
        for tok in tokens[1:]:
            try:
                idx_s, val_s = tok.split(":")
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise DataFormatError(f"line {lineno}: bad feature token {tok!r}")
            if idx <= prev:
                raise DataFormatError(
                    f"line {lineno}: indices must be ascending and 1-based")
            prev = idx
            row[idx] = val
            n_x = max(n_x, idx)
        rows.append(row)
    if not rows:
        raise DataFormatError("empty file")
    X = np.zeros((len(rows), n_x))
    for i, row in enumerate(rows):
        for idx, val in row.items():
            X[i, idx - 1] = val
    return RawData(X=X, labels=np.array(labels))


def parse_csv(source) -> RawData:
    """Plain CSV reader ``label,f1,...,fn``; a non-numeric header row is skipped."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source) as fh:
            lines = fh.read().splitlines()
    rows = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            if lineno == 1:
                continue
            raise DataFormatError(f"line {lineno}: bad value in {line!r}")
    if not rows:
        raise DataFormatError("empty file")
    arr = np.array(rows)
    return RawData(X=arr[:, 1:], labels=arr[:, 0])


def write_sparse(path, X: np.ndarray, labels: np.ndarray) -> None:
    """Emit the sparse format; zero entries are omitted, floats round-trip."""
    with open(path, "w") as fh:
        for row, lab in zip(X, labels):
            lab_s = str(int(lab)) if float(lab).is_integer() else repr(float(lab))
            feats = " ".join(
                f"{j + 1}:{repr(float(v))}" for j, v in enumerate(row) if v != 0.0
            )
            fh.write(f"{lab_s} {feats}".rstrip() + "\n")


def orient_labels(raw: RawData) -> Dataset:
    """Map the rarer raw label to 1 and the commoner to 0.

    Ties are broken by mapping the numerically larger raw label to 1.
    """
    values, counts = np.unique(raw.labels, return_counts=True)
    if len(values) != 2:
        raise ValueError(f"expected exactly two distinct labels, got {values}")
    if counts[0] < counts[1]:
        minority = values[0]
    elif counts[1] < counts[0]:
        minority = values[1]
    else:
        minority = max(values)
    y = (raw.labels == minority).astype(int)
    return Dataset(X=raw.X.copy(), y=y)


def standardize(train: Dataset, others: list[Dataset] | None = None):
    """Center/scale every feature by train-fold statistics.

    Zero-variance features are centered only.  Returns the scaled train set,
    the scaled other sets, and the (mean, std) used.
    """
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    scaled = [Dataset(X=(ds.X - mean) / std, y=ds.y.copy())
              for ds in [train] + list(others or [])]
    return scaled[0], scaled[1:], mean, std


def stratified_folds(ds: Dataset, k: int, seed) -> FoldPlan:
    """Shuffle each class independently and deal round-robin into k folds."""
    if ds.m1 < 1:
        raise ValueError("dataset has no positives")
    if k < 2:
        raise ValueError("need k >= 2")
    if ds.m_tot < k:
        raise ValueError("fewer examples than folds")
    rng = np.random.default_rng(seed)
    assignments = np.empty(ds.m_tot, dtype=int)
    for cls in (0, 1):
        idx = np.flatnonzero(ds.y == cls)
        rng.shuffle(idx)
        assignments[idx] = np.arange(len(idx)) % k
    return FoldPlan(k=k, assignments=assignments)


def fold_split(ds: Dataset, plan: FoldPlan, test_fold: int, val_fold: int):
    """(train, val, test) datasets for one rotation of the plan."""
    if test_fold == val_fold:
        raise ValueError("test and validation folds must differ")
    test_idx = plan.fold_indices(test_fold)
    val_idx = plan.fold_indices(val_fold)
    train_mask = ~np.isin(np.arange(ds.m_tot), np.concatenate([test_idx, val_idx]))
    return ds.subset(np.flatnonzero(train_mask)), ds.subset(val_idx), ds.subset(test_idx)


def undersample_minority(ds: Dataset, keep: int, seed):
    """Retain all negatives and a seeded uniform sample of ``keep`` positives.

    Returns the reduced dataset and the retained positive row indices.
    """
    if not 1 <= keep <= ds.m1:
        raise ValueError(f"keep must be in [1, {ds.m1}], got {keep}")
    rng = np.random.default_rng(seed)
    pos_idx = np.flatnonzero(ds.y == 1)
    kept = np.sort(rng.choice(pos_idx, size=keep, replace=False))
    mask = ds.y == 0
    mask[kept] = True
    return ds.subset(np.flatnonzero(mask)), kept
