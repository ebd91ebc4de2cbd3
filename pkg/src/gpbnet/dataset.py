"""Column-typed sample matrices: ingestion, standardization, splitting.

A :class:`Dataset` is a rectangular matrix of fully observed values with a
typed column schema (continuous reals, or discrete with a finite arity).
All learning operations in the package consume this representation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConstantColumnError, DataFormatError, SchemaError

CONTINUOUS = "continuous"
DISCRETE = "discrete"

# Integer-valued columns with at most this many distinct levels are inferred
# discrete; beyond it they are treated as continuous (overridable by hints).
DISCRETE_INFERENCE_MAX_LEVELS = 12


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # CONTINUOUS or DISCRETE
    arity: int | None = None  # levels 0..arity-1; None for continuous

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, DISCRETE):
            raise SchemaError(f"unknown column kind {self.kind!r}")
        if self.kind == DISCRETE and (self.arity is None or self.arity < 1):
            raise SchemaError(f"discrete column {self.name!r} needs arity >= 1")
        if self.kind == CONTINUOUS and self.arity is not None:
            raise SchemaError(f"continuous column {self.name!r} cannot carry an arity")

    @property
    def is_discrete(self) -> bool:
        return self.kind == DISCRETE


class Dataset:
    """Immutable (columns, values) pair.

    Values are stored as a float64 matrix; discrete cells hold small
    non-negative integers below the column arity.
    """

    def __init__(self, columns, values):
        columns = tuple(columns)
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise SchemaError("values must be a 2-D matrix")
        if values.shape[1] != len(columns):
            raise SchemaError(
                f"{len(columns)} columns declared but matrix has {values.shape[1]}"
            )
        if not np.all(np.isfinite(values)):
            raise DataFormatError("non-finite value in dataset")
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        for j, col in enumerate(columns):
            if col.is_discrete:
                v = values[:, j]
                if not np.all(v == np.round(v)):
                    raise SchemaError(f"discrete column {col.name!r} has non-integer values")
                if values.shape[0] and (v.min() < 0 or v.max() >= col.arity):
                    raise SchemaError(
                        f"discrete column {col.name!r} has values outside 0..{col.arity - 1}"
                    )
        self.columns = columns
        self.values = values
        self.values.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def index_of(self, name: str) -> int:
        for j, c in enumerate(self.columns):
            if c.name == name:
                return j
        raise SchemaError(f"no column named {name!r}")

    def column_values(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def take_rows(self, rows) -> "Dataset":
        return Dataset(self.columns, self.values[np.asarray(rows, dtype=int)])

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.columns == other.columns
            and self.values.shape == other.values.shape
            and bool(np.all(self.values == other.values))
        )

    def __repr__(self):
        return f"Dataset({self.n_rows}x{self.n_cols}, {[c.name for c in self.columns]})"


@dataclass(frozen=True)
class Standardization:
    """Per-continuous-column affine transform fitted on training rows."""

    column_indices: tuple[int, ...]
    means: tuple[float, ...]
    sds: tuple[float, ...]

    def apply(self, dataset: Dataset) -> Dataset:
        values = dataset.values.copy()
        for j, mu, sd in zip(self.column_indices, self.means, self.sds):
            values[:, j] = (values[:, j] - mu) / sd
        return Dataset(dataset.columns, values)

    def invert(self, dataset: Dataset) -> Dataset:
        values = dataset.values.copy()
        for j, mu, sd in zip(self.column_indices, self.means, self.sds):
            values[:, j] = values[:, j] * sd + mu
        return Dataset(dataset.columns, values)


def standardize(dataset: Dataset, fit_rows=None) -> tuple[Dataset, Standardization]:
    """Center/scale continuous columns using statistics of ``fit_rows``.

    Discrete columns pass through untouched. Raises
    :class:`ConstantColumnError` if a continuous column has zero spread on
    the fit rows (the caller must drop it or declare it discrete).
    """
    if fit_rows is None:
        fit_rows = np.arange(dataset.n_rows)
    fit_rows = np.asarray(fit_rows, dtype=int)
    if fit_rows.size == 0:
        raise SchemaError("fit_rows must be non-empty")
    idx, means, sds = [], [], []
    for j, col in enumerate(dataset.columns):
        if col.is_discrete:
            continue
        v = dataset.values[fit_rows, j]
        mu = float(v.mean())
        sd = float(v.std())
        if sd == 0.0:
            raise ConstantColumnError(
                f"continuous column {col.name!r} is constant on the fit rows"
            )
        idx.append(j)
        means.append(mu)
        sds.append(sd)
    stz = Standardization(tuple(idx), tuple(means), tuple(sds))
    return stz.apply(dataset), stz


def split(dataset: Dataset, test_count: int, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded random split; the last ``test_count`` permuted rows go to test."""
    m = dataset.n_rows
    if not 0 < test_count < m:
        raise SchemaError(f"test_count must be in (0, {m}), got {test_count}")
    perm = np.random.default_rng(seed).permutation(m)
    return dataset.take_rows(perm[: m - test_count]), dataset.take_rows(perm[m - test_count:])


def _parse_cell(text: str, row: int, name: str) -> float:
    stripped = text.strip()
    if stripped == "" or stripped.upper() == "NA":
        raise DataFormatError(f"row {row}, column {name!r}: missing value")
    try:
        return float(stripped)
    except ValueError:
        raise DataFormatError(
            f"row {row}, column {name!r}: cannot parse {stripped!r}"
        ) from None


def _infer_kind(values: np.ndarray) -> Column | None:
    """Discrete iff integer-valued, non-negative, and few distinct levels."""
    if not np.all(values == np.round(values)):
        return None
    if values.min() < 0:
        return None
    levels = np.unique(values)
    if levels.size > DISCRETE_INFERENCE_MAX_LEVELS:
        return None
    return int(values.max()) + 1


def load_delimited(path, schema_hints=None) -> Dataset:
    """Read a comma-delimited file with a header row into a Dataset.

    ``schema_hints`` maps column names to ``"continuous"`` or
    ``"discrete:<arity>"`` and overrides type inference. Missing values are
    rejected outright: learning assumes fully observed data.
    """
    schema_hints = dict(schema_hints or {})
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        names = [h.strip() for h in header]
        rows = []
        for i, record in enumerate(reader, start=1):
            if len(record) != len(names):
                raise DataFormatError(
                    f"row {i} has {len(record)} fields, expected {len(names)}"
                )
            rows.append([_parse_cell(cell, i, names[j]) for j, cell in enumerate(record)])
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    values = np.asarray(rows, dtype=float)

    unknown = set(schema_hints) - set(names)
    if unknown:
        raise SchemaError(f"schema hints for unknown columns: {sorted(unknown)}")

    columns = []
    for j, name in enumerate(names):
        hint = schema_hints.get(name)
        if hint is not None:
            columns.append(_column_from_hint(name, hint, values[:, j]))
        else:
            arity = _infer_kind(values[:, j])
            if arity is None:
                columns.append(Column(name, CONTINUOUS))
            else:
                columns.append(Column(name, DISCRETE, arity))
    return Dataset(columns, values)


def _column_from_hint(name: str, hint: str, values: np.ndarray) -> Column:
    hint = hint.strip()
    if hint == CONTINUOUS:
        return Column(name, CONTINUOUS)
    if hint.startswith("discrete:"):
        try:
            arity = int(hint.split(":", 1)[1])
        except ValueError:
            raise SchemaError(f"bad arity in hint {hint!r} for column {name!r}") from None
        col = Column(name, DISCRETE, arity)
        if values.size and (not np.all(values == np.round(values)) or values.min() < 0 or values.max() >= arity):
            raise SchemaError(
                f"column {name!r} declared discrete:{arity} but holds incompatible values"
            )
        return col
    raise SchemaError(f"unknown schema hint {hint!r} for column {name!r}")


def save_delimited(dataset: Dataset, path) -> None:
    """Write a Dataset back out in the same comma/header format."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.names)
        for row in dataset.values:
            writer.writerow(
                [
                    int(v) if col.is_discrete else repr(float(v))
                    for v, col in zip(row, dataset.columns)
                ]
            )
