"""Dataset container, loaders (CSV and sparse ``label index:value``), scaling and splits."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DomainError, FormatError

log = logging.getLogger(__name__)

MISSING_TOKENS = frozenset({"", "?", "na", "nan", "null"})

BUNDLED = {
    # name -> (file, label column, positive label)
    "heart": ("heart.csv", "label", "presence"),
    "ionosphere": ("ionosphere.csv", "label", "good"),
    "wdbc": ("wdbc.csv", "label", "malignant"),
    "wisconsin": ("wisconsin.csv", "label", "malignant"),
    "pima": ("pima.csv", "label", "positive"),
    "sonar": ("sonar.svm", None, None),
    "toy": ("toy.csv", "label", "yes"),
}


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = field(default=())
    source_id: str = ""

    def __post_init__(self):
        x = np.ascontiguousarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float)
        if x.ndim != 2:
            raise DomainError("features must be a 2-d matrix")
        m, n = x.shape
        if y.shape != (m,):
            raise DomainError(f"expected {m} labels, got shape {y.shape}")
        if m < 2 or n < 1:
            raise DomainError(f"need m >= 2 and n >= 1, got m={m}, n={n}")
        if not np.all((y == 1.0) | (y == -1.0)):
            raise DomainError("labels must be -1 or +1")
        if not (np.any(y == 1.0) and np.any(y == -1.0)):
            raise DomainError("both classes must be present")
        if not np.all(np.isfinite(x)):
            raise DomainError("features contain NaN or Inf")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(n))
        if len(names) != n:
            raise DomainError(f"{len(names)} feature names for {n} columns")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return replace(self, features=self.features[rows], labels=self.labels[rows])


def load_csv(path, label_column: str, positive_label: str | None = None) -> Dataset:
    """Read a headed CSV; rows containing a missing value are dropped.

    The two label values map to +1 (``positive_label``) and -1. Without an
    explicit positive label the lexicographically larger value is positive.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if label_column not in header:
            raise FormatError(f"{path}: no label column {label_column!r}")
        li = header.index(label_column)
        names = [h for k, h in enumerate(header) if k != li]
        rows, raw_labels, dropped = [], [], 0
        for rowno, rec in enumerate(reader, start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise FormatError(f"{path}: row {rowno} has {len(rec)} fields, expected {len(header)}")
            cells = [c.strip() for c in rec]
            if any(c.lower() in MISSING_TOKENS for c in cells):
                dropped += 1
                continue
            vals = []
            for k, c in enumerate(cells):
                if k == li:
                    continue
                try:
                    vals.append(float(c))
                except ValueError:
                    raise FormatError(f"{path}: row {rowno}: non-numeric value {c!r} "
                                      f"in column {header[k]!r}") from None
            rows.append(vals)
            raw_labels.append(cells[li])
    if dropped:
        log.info("%s: dropped %d rows with missing values", path, dropped)
    classes = sorted(set(raw_labels))
    if len(classes) != 2:
        raise DomainError(f"{path}: expected exactly two label values, found {classes}")
    if positive_label is None:
        positive_label = classes[1]
    elif positive_label not in classes:
        raise DomainError(f"{path}: positive label {positive_label!r} not among {classes}")
    y = np.array([1.0 if lab == positive_label else -1.0 for lab in raw_labels])
    return Dataset(np.array(rows, dtype=float).reshape(len(rows), len(names)), y,
                   tuple(names), path.stem)


def load_sparse(path, n_hint: int | None = None) -> Dataset:
    """Read the ``label index:value`` text format (1-based indices, absent = 0)."""
    path = Path(path)
    labels, entries = [], []
    max_index = 0
    with open(path, encoding="utf-8") as fh:
        for rowno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            try:
                labels.append(float(toks[0]))
            except ValueError:
                raise FormatError(f"{path}: row {rowno}: bad label {toks[0]!r}") from None
            row = {}
            for tok in toks[1:]:
                try:
                    idx_s, val_s = tok.split(":")
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise FormatError(f"{path}: row {rowno}: bad entry {tok!r}") from None
                if idx < 1:
                    raise FormatError(f"{path}: row {rowno}: index {idx} is not 1-based")
                if n_hint is not None and idx > n_hint:
                    raise FormatError(f"{path}: row {rowno}: index {idx} exceeds n={n_hint}")
                row[idx - 1] = val
                max_index = max(max_index, idx)
            entries.append(row)
    n = n_hint if n_hint is not None else max_index
    x = np.zeros((len(entries), max(n, 1)))
    for i, row in enumerate(entries):
        for j, v in row.items():
            x[i, j] = v
    classes = sorted(set(labels))
    if len(classes) != 2:
        raise DomainError(f"{path}: expected exactly two label values, found {classes}")
    y = np.where(np.asarray(labels) == classes[1], 1.0, -1.0)
    return Dataset(x, y, tuple(f"x{j + 1}" for j in range(x.shape[1])), path.stem)


def load_bundled(name: str) -> Dataset:
    try:
        fname, label_col, positive = BUNDLED[name]
    except KeyError:
        raise DomainError(f"unknown bundled dataset {name!r}; have {sorted(BUNDLED)}") from None
    with resources.as_file(resources.files("cardsvm") / "data" / fname) as p:
        d = load_sparse(p) if label_col is None else load_csv(p, label_col, positive)
    return replace(d, source_id=name)


def standardize(d: Dataset) -> Dataset:
    """Z-score every column (sample std); constant columns become all-zero."""
    x = d.features
    mu = x.mean(axis=0)
    sd = x.std(axis=0, ddof=1) if d.m > 1 else np.zeros(d.n)
    # spread at rounding level of the column magnitude counts as constant
    varies = sd > 64 * np.finfo(float).eps * np.abs(x).max(axis=0, initial=0.0)
    centered = x - mu
    z = np.where(varies, centered / np.where(varies, sd, 1.0), 0.0)
    return replace(d, features=z)


def _stratified_counts(labels: np.ndarray, k: int) -> tuple[int, int]:
    n_pos = int(np.sum(labels > 0))
    n_neg = labels.size - n_pos
    want_pos = int(round(k * n_pos / labels.size))
    want_pos = min(max(want_pos, 1), n_pos, k - 1)
    want_neg = k - want_pos
    if want_neg > n_neg:
        want_neg = n_neg
        want_pos = k - want_neg
    return want_pos, want_neg


def subsample(d: Dataset, m_target: int, seed: int) -> Dataset:
    """Stratified subsample of ``m_target`` rows; row order of the original is kept."""
    if not 2 <= m_target <= d.m:
        raise DomainError(f"m_target must lie in [2, {d.m}], got {m_target}")
    if m_target == d.m:
        return d
    rows = _stratified_rows(d.labels, m_target, np.random.default_rng(seed))
    return d.take(rows)


def _stratified_rows(labels, k, rng):
    k_pos, k_neg = _stratified_counts(labels, k)
    pos = np.flatnonzero(labels > 0)
    neg = np.flatnonzero(labels < 0)
    chosen = np.concatenate([rng.choice(pos, k_pos, replace=False),
                             rng.choice(neg, k_neg, replace=False)])
    return np.sort(chosen)


def train_test_split(d: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    if not 0.0 < test_fraction < 1.0:
        raise DomainError(f"test fraction must be in (0, 1), got {test_fraction}")
    k_test = int(round(d.m * test_fraction))
    if k_test < 2 or d.m - k_test < 2:
        raise DomainError(f"test fraction {test_fraction} leaves too few rows on one side")
    test_rows = _stratified_rows(d.labels, k_test, np.random.default_rng(seed))
    mask = np.ones(d.m, dtype=bool)
    mask[test_rows] = False
    train = d.take(np.flatnonzero(mask))
    test = d.take(test_rows)
    return train, test
