"""Tabular dataset loading and the preprocessing chain for the classical pipelines.

Covers CSV ingestion against an explicit column schema, missing-value
imputation, categorical encoding, z-score feature scaling, Pearson
correlation (feature-selection support), column selection and seeded
train/test splitting. Everything here is a pure function of its inputs
plus an explicit seed.
"""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass

import numpy as np

KINDS = ("numeric", "categorical", "target")


@dataclass(frozen=True)
class ColumnSchema:
    """One column of a CSV file: its name, role and optional missing sentinel."""

    name: str
    kind: str = "numeric"
    missing_marker: float | str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown column kind {self.kind!r}; expected one of {KINDS}")


@dataclass
class Dataset:
    """Encoded feature matrix plus integer class labels.

    `schema` describes the feature columns of `rows`, in order; the target
    column is held separately as `target` with `class_names` giving the
    label-to-name mapping (always sorted lexicographically).
    """

    schema: list[ColumnSchema]
    rows: np.ndarray
    target: np.ndarray
    class_names: list[str]

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        self.target = np.asarray(self.target, dtype=np.int64)
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-D matrix")
        if self.rows.shape[0] != self.target.shape[0]:
            raise ValueError("row count and target count differ")
        if self.rows.shape[1] != len(self.schema):
            raise ValueError("schema length and feature count differ")
        if self.target.size and (self.target.min() < 0 or self.target.max() >= len(self.class_names)):
            raise ValueError("target labels out of range for class_names")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.schema]

    def subset(self, indices: np.ndarray) -> "Dataset":
        """Row-subset view sharing schema and class names."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.schema, self.rows[idx].copy(), self.target[idx].copy(), self.class_names)


@dataclass
class ScalerParams:
    """Per-feature mean and population stddev, stored so the serving path
    can standardize incoming requests exactly as training data was."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape:
            raise ValueError("mean and std length differ")
        if np.any(self.std < 0):
            raise ValueError("stddev must be non-negative")

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Apply (x - mean) / std; zero-variance features map to 0."""
        x = np.asarray(x, dtype=np.float64)
        safe = np.where(self.std > 0, self.std, 1.0)
        out = (x - self.mean) / safe
        return np.where(self.std > 0, out, 0.0)


@dataclass
class SplitPair:
    train: Dataset
    test: Dataset
    ratio: float
    seed: int
    train_indices: np.ndarray
    test_indices: np.ndarray


def validate_schema(schema: list[ColumnSchema]) -> None:
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise ValueError("column names must be unique")
    n_target = sum(1 for c in schema if c.kind == "target")
    if n_target != 1:
        raise ValueError(f"schema must contain exactly one target column, found {n_target}")


def load_schema_config(path: str) -> list[ColumnSchema]:
    """Read a [columns] schema section from an INI-style config file.

    Each option is `<name> = <kind>[, missing=<value>]`, e.g.::

        [columns]
        Glucose = numeric, missing=0
        Outcome = target
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str  # column names are case-sensitive
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    if not parser.has_section("columns"):
        raise ValueError(f"{path}: missing [columns] section")
    schema = []
    for name, value in parser.items("columns"):
        parts = [p.strip() for p in value.split(",")]
        kind = parts[0]
        marker: float | str | None = None
        for extra in parts[1:]:
            key, _, raw = extra.partition("=")
            if key.strip() != "missing":
                raise ValueError(f"{path}: column {name!r}: unknown attribute {extra!r}")
            raw = raw.strip()
            try:
                marker = float(raw)
            except ValueError:
                marker = raw
        schema.append(ColumnSchema(name, kind, marker))
    validate_schema(schema)
    return schema


def encode_categorical(values: list[str]) -> tuple[np.ndarray, list[str]]:
    """Encode text labels as numbers.

    Classes are sorted lexicographically. Two classes collapse to a single
    0/1 column (label-binarizer behaviour); three or more produce one-hot
    columns. Returns the matrix and the class list for inverse lookup.
    """
    if len(values) == 0:
        raise ValueError("cannot encode an empty value list")
    class_names = sorted(set(values))
    index = {c: i for i, c in enumerate(class_names)}
    labels = np.array([index[v] for v in values], dtype=np.int64)
    if len(class_names) <= 2:
        matrix = labels.astype(np.float64).reshape(-1, 1)
    else:
        matrix = np.zeros((len(values), len(class_names)), dtype=np.float64)
        matrix[np.arange(len(values)), labels] = 1.0
    return matrix, class_names


def decode_categorical(matrix: np.ndarray, class_names: list[str]) -> list[str]:
    """Invert :func:`encode_categorical`."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if len(class_names) <= 2:
        return [class_names[int(round(v))] for v in matrix[:, 0]]
    return [class_names[int(i)] for i in np.argmax(matrix, axis=1)]


def load_csv(path: str, schema: list[ColumnSchema]) -> Dataset:
    """Parse a header-carrying CSV file against `schema`.

    Numeric columns are parsed as floats (an unparseable cell is reported
    with its row and column), categorical columns are encoded via
    :func:`encode_categorical` (cells equal to the column's missing marker
    become NaN for later imputation), and the target column becomes integer
    labels against lexicographically sorted class names.
    """
    validate_schema(schema)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"dataset file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty, expected a header row") from None
        header = [h.strip() for h in header]
        wanted = [c.name for c in schema]
        missing = [n for n in wanted if n not in header]
        extra = [n for n in header if n not in wanted]
        if missing or extra:
            raise ValueError(
                f"{path}: header does not match schema"
                + (f"; missing columns {missing}" if missing else "")
                + (f"; unexpected columns {extra}" if extra else "")
            )
        col_idx = {n: header.index(n) for n in wanted}
        raw: dict[str, list[str]] = {n: [] for n in wanted}
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
            for name in wanted:
                raw[name].append(row[col_idx[name]].strip())
        n = len(raw[wanted[0]])
        if n == 0:
            raise ValueError(f"{path}: no data rows")

    feature_schema: list[ColumnSchema] = []
    columns: list[np.ndarray] = []
    target: np.ndarray | None = None
    class_names: list[str] = []
    for col in schema:
        cells = raw[col.name]
        if col.kind == "target":
            class_names = sorted(set(cells))
            index = {c: i for i, c in enumerate(class_names)}
            target = np.array([index[v] for v in cells], dtype=np.int64)
        elif col.kind == "numeric":
            values = np.empty(n, dtype=np.float64)
            for i, cell in enumerate(cells):
                try:
                    values[i] = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {i + 2}, column {col.name!r}: cannot parse {cell!r} as a number"
                    ) from None
            columns.append(values.reshape(-1, 1))
            feature_schema.append(col)
        else:  # categorical
            marker = None if col.missing_marker is None else str(col.missing_marker)
            observed_idx = [i for i, c in enumerate(cells) if c != marker]
            if not observed_idx:
                raise ValueError(f"{path}: column {col.name!r} has no observed values")
            encoded, classes = encode_categorical([cells[i] for i in observed_idx])
            block = np.full((n, encoded.shape[1]), np.nan)
            block[observed_idx] = encoded
            columns.append(block)
            if encoded.shape[1] == 1:
                feature_schema.append(ColumnSchema(col.name, "categorical"))
            else:
                feature_schema.extend(ColumnSchema(f"{col.name}={c}", "categorical") for c in classes)
    rows = np.hstack(columns) if columns else np.empty((n, 0))
    assert target is not None
    return Dataset(feature_schema, rows, target, class_names)


def impute_missing(ds: Dataset, policy: str) -> Dataset:
    """Replace missing cells per column, or drop the rows holding them.

    A cell is missing when it equals its column's missing marker or is NaN.
    `median` and `mean` substitute the statistic of the column's observed
    values; `drop_row` removes any row with a missing cell. Non-missing
    cells are left bit-identical.
    """
    if policy not in ("median", "mean", "drop_row"):
        raise ValueError(f"unknown imputation policy {policy!r}")
    rows = ds.rows.copy()
    missing = np.isnan(rows)
    for j, col in enumerate(ds.schema):
        if col.missing_marker is not None and not isinstance(col.missing_marker, str):
            missing[:, j] |= rows[:, j] == float(col.missing_marker)
    if not missing.any():
        return Dataset(ds.schema, rows, ds.target.copy(), ds.class_names)
    if policy == "drop_row":
        keep = ~missing.any(axis=1)
        if not keep.any():
            raise ValueError("drop_row would remove every row")
        return Dataset(ds.schema, rows[keep], ds.target[keep].copy(), ds.class_names)
    for j in np.flatnonzero(missing.any(axis=0)):
        observed = rows[~missing[:, j], j]
        if observed.size == 0:
            raise ValueError(f"column {ds.schema[j].name!r} is entirely missing; nothing to impute from")
        stat = np.median(observed) if policy == "median" else np.mean(observed)
        rows[missing[:, j], j] = stat
    return Dataset(ds.schema, rows, ds.target.copy(), ds.class_names)


def scale_features(ds: Dataset) -> tuple[Dataset, ScalerParams]:
    """Standardize every feature to mean 0, population stddev 1.

    Zero-variance columns become all zeros. The returned ScalerParams let
    the prediction service scale incoming feature vectors identically.
    """
    if ds.n < 1:
        raise ValueError("cannot scale an empty dataset")
    mean = ds.rows.mean(axis=0)
    std = ds.rows.std(axis=0)  # population (ddof=0)
    params = ScalerParams(mean, std)
    return Dataset(ds.schema, params.transform(ds.rows), ds.target.copy(), ds.class_names), params


def correlation_matrix(ds: Dataset) -> np.ndarray:
    """Pearson correlation between all feature pairs.

    Symmetric, diagonal exactly 1 for non-constant columns. Any entry
    involving a constant column is 0 by convention (its correlation is
    undefined), including that column's own diagonal.
    """
    if ds.n < 2:
        raise ValueError("correlation needs at least 2 rows")
    mean = ds.rows.mean(axis=0)
    std = ds.rows.std(axis=0)
    nonconst = std > 0
    z = (ds.rows - mean) / np.where(nonconst, std, 1.0)
    corr = z.T @ z / ds.n
    corr = (corr + corr.T) / 2.0
    corr[~nonconst, :] = 0.0
    corr[:, ~nonconst] = 0.0
    corr[np.diag_indices_from(corr)] = np.where(nonconst, 1.0, 0.0)
    return np.clip(corr, -1.0, 1.0)


def select_features(ds: Dataset, names: list[str]) -> Dataset:
    """Restrict and reorder the feature columns to `names`; target untouched."""
    have = {c.name: j for j, c in enumerate(ds.schema)}
    unknown = [n for n in names if n not in have]
    if unknown:
        raise ValueError(f"unknown feature(s) {unknown}; valid features: {ds.feature_names}")
    idx = [have[n] for n in names]
    return Dataset([ds.schema[j] for j in idx], ds.rows[:, idx].copy(), ds.target.copy(), ds.class_names)


def _floor_count(ratio: float, n: int) -> int:
    # tiny nudge so e.g. 0.7 * 10 lands on 7, not 6.999...
    return int(math.floor(ratio * n + 1e-9))


def train_test_split(ds: Dataset, ratio: float, seed: int, stratified: bool = True) -> SplitPair:
    """Seeded, reproducible partition into train and test rows.

    Train size is floor(ratio * n). The stratified variant takes
    floor(ratio * n_k) rows per class, then hands the leftover train slots
    to classes in sorted class order, one each, cycling while slots remain.
    Identical arguments always produce the identical split.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    n = ds.n
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = _floor_count(ratio, n)
    if not stratified:
        train_idx, test_idx = perm[:n_train], perm[n_train:]
    else:
        k = len(ds.class_names)
        counts = np.bincount(ds.target, minlength=k)
        empty = [ds.class_names[c] for c in range(k) if counts[c] == 0]
        if empty:
            raise ValueError(f"stratified split requires every class present; empty: {empty}")
        per_class = [perm[ds.target[perm] == c] for c in range(k)]
        take = [_floor_count(ratio, counts[c]) for c in range(k)]
        remaining = n_train - sum(take)
        c = 0
        while remaining > 0:
            if take[c] < counts[c]:
                take[c] += 1
                remaining -= 1
            c = (c + 1) % k
        train_idx = np.concatenate([per_class[c][: take[c]] for c in range(k)])
        test_idx = np.concatenate([per_class[c][take[c] :] for c in range(k)])
    return SplitPair(
        train=ds.subset(train_idx),
        test=ds.subset(test_idx),
        ratio=ratio,
        seed=seed,
        train_indices=train_idx,
        test_indices=test_idx,
    )
