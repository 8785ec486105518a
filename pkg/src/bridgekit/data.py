"""Dataset model: attribute schemas, instances, partitioning and projection.

Every other module consumes :class:`Dataset`. Datasets are immutable after
construction (columns are stored as read-only numpy arrays), so all
operations here are pure functions that are safe to call concurrently.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

NOMINAL = "nominal"
NUMERIC = "numeric"

ROLE_FEATURE = "feature"
ROLE_CLASS = "class"
ROLE_META = "meta"

_KINDS = (NOMINAL, NUMERIC)
_ROLES = (ROLE_FEATURE, ROLE_CLASS, ROLE_META)


class DataError(ValueError):
    """An input violates a dataset contract (schema, roles, value ranges)."""


class SchemaMismatch(DataError):
    """An instance or request does not conform to the expected schema."""


class _MissingType:
    """Singleton sentinel for absent values; never a category of its own."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "MISSING"

    def __reduce__(self):
        return (_MissingType, ())

    def __bool__(self):
        return False


MISSING = _MissingType()

#: Text used for missing values in the CSV interchange format.
MISSING_TOKEN = "?"


@dataclass(frozen=True)
class AttributeSchema:
    """Declaration of one attribute: its name, kind, categories and role."""

    name: str
    kind: str
    values: tuple[str, ...] = ()
    role: str = ROLE_FEATURE

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DataError(f"unknown attribute kind {self.kind!r}")
        if self.role not in _ROLES:
            raise DataError(f"unknown attribute role {self.role!r}")
        if self.kind == NOMINAL and len(self.values) < 1:
            raise DataError(f"nominal attribute {self.name!r} needs at least one value")
        if self.kind == NUMERIC and self.values:
            raise DataError(f"numeric attribute {self.name!r} cannot list values")
        if len(set(self.values)) != len(self.values):
            raise DataError(f"duplicate category labels in {self.name!r}")
        # the schema sidecar format reserves these separators
        for token in (self.name, *self.values):
            if any(ch in token for ch in ",|\n"):
                raise DataError(f"{token!r} may not contain ',', '|', or newlines")

    @property
    def arity(self) -> int:
        return len(self.values)

    def with_role(self, role: str) -> "AttributeSchema":
        return AttributeSchema(self.name, self.kind, self.values, role)

    def index_of(self, label: str) -> int:
        try:
            return self.values.index(label)
        except ValueError:
            raise DataError(f"{label!r} is not a value of attribute {self.name!r}") from None


@dataclass(frozen=True)
class Instance:
    """One data point: a value per schema attribute plus a sampling weight.

    Nominal slots hold category indices, numeric slots hold floats, and
    absent values hold the :data:`MISSING` sentinel.
    """

    values: tuple
    weight: float = 1.0

    def __post_init__(self):
        if self.weight < 0:
            raise DataError("instance weight must be non-negative")


@dataclass(frozen=True)
class ClassDistribution:
    """Per-class probabilities; sums to one."""

    classes: tuple[str, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.classes) != len(self.probabilities):
            raise DataError("one probability per class value required")
        if any(p < 0 for p in self.probabilities):
            raise DataError("probabilities must be non-negative")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise DataError("probabilities must sum to 1")

    def argmax(self) -> int:
        """Index of the most probable class; ties go to the lowest index."""
        best, best_p = 0, self.probabilities[0]
        for i, p in enumerate(self.probabilities):
            if p > best_p:
                best, best_p = i, p
        return best

    def best(self) -> str:
        return self.classes[self.argmax()]

    def ranked(self) -> list[tuple[str, float]]:
        """(class, probability) pairs sorted by probability descending.

        Ties keep the class-index order, so the top entry always agrees
        with :meth:`best`.
        """
        order = sorted(range(len(self.classes)), key=lambda i: (-self.probabilities[i], i))
        return [(self.classes[i], self.probabilities[i]) for i in order]


def distribution_from_array(classes: Sequence[str], probs: np.ndarray) -> ClassDistribution:
    return ClassDistribution(tuple(classes), tuple(float(p) for p in probs))


class Dataset:
    """A schema plus instances, stored column-major for fast slicing.

    Nominal columns are int32 arrays of category indices with -1 for
    MISSING; numeric columns are float64 arrays with NaN for MISSING.
    Exactly one attribute has the class role, and it must be nominal.
    """

    __slots__ = ("schema", "_cols", "_weights", "_class_index")

    def __init__(self, schema: Sequence[AttributeSchema], columns: Sequence[np.ndarray],
                 weights: np.ndarray | None = None):
        schema = tuple(schema)
        names = [a.name for a in schema]
        if len(set(names)) != len(names):
            raise DataError("attribute names must be unique")
        class_idx = [i for i, a in enumerate(schema) if a.role == ROLE_CLASS]
        if len(class_idx) != 1:
            raise DataError("exactly one attribute must have the class role")
        if schema[class_idx[0]].kind != NOMINAL:
            raise DataError("the class attribute must be nominal")
        if len(columns) != len(schema):
            raise DataError("one column per schema attribute required")

        n = len(columns[0]) if columns else 0
        cols = []
        for attr, col in zip(schema, columns):
            arr = np.asarray(col)
            if len(arr) != n:
                raise DataError("all columns must have equal length")
            if attr.kind == NOMINAL:
                arr = arr.astype(np.int32, copy=True)
                bad = (arr < -1) | (arr >= attr.arity)
                if bad.any():
                    raise DataError(f"category index out of range in {attr.name!r}")
            else:
                arr = arr.astype(np.float64, copy=True)
            arr.setflags(write=False)
            cols.append(arr)

        if weights is None:
            w = np.ones(n, dtype=np.float64)
        else:
            w = np.asarray(weights, dtype=np.float64).copy()
            if len(w) != n:
                raise DataError("one weight per instance required")
            if (w < 0).any():
                raise DataError("instance weights must be non-negative")
        w.setflags(write=False)

        self.schema = schema
        self._cols = tuple(cols)
        self._weights = w
        self._class_index = class_idx[0]

    # -- construction ------------------------------------------------------

    @classmethod
    def from_rows(cls, schema: Sequence[AttributeSchema], rows: Iterable[Sequence],
                  weights: Sequence[float] | None = None) -> "Dataset":
        """Build a dataset from per-instance value sequences.

        Rows hold category indices / floats / MISSING, matching
        :class:`Instance` semantics.
        """
        schema = tuple(schema)
        rows = list(rows)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != len(schema):
                raise DataError(f"row {i} has {len(row)} slots, schema has {len(schema)}")
        cols = []
        for j, attr in enumerate(schema):
            if attr.kind == NOMINAL:
                col = np.full(n, -1, dtype=np.int32)
                for i, row in enumerate(rows):
                    v = row[j]
                    if v is not MISSING:
                        col[i] = int(v)
            else:
                col = np.full(n, np.nan, dtype=np.float64)
                for i, row in enumerate(rows):
                    v = row[j]
                    if v is not MISSING:
                        col[i] = float(v)
            cols.append(col)
        return cls(schema, cols, None if weights is None else np.asarray(weights, dtype=float))

    @classmethod
    def from_instances(cls, schema: Sequence[AttributeSchema], instances: Iterable[Instance]) -> "Dataset":
        instances = list(instances)
        return cls.from_rows(schema, [i.values for i in instances], [i.weight for i in instances])

    # -- basic accessors ---------------------------------------------------

    def __len__(self) -> int:
        return len(self._weights)

    def __iter__(self) -> Iterator[Instance]:
        for i in range(len(self)):
            yield self.instance(i)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def class_index(self) -> int:
        return self._class_index

    @property
    def class_attribute(self) -> AttributeSchema:
        return self.schema[self._class_index]

    @property
    def classes(self) -> tuple[str, ...]:
        return self.class_attribute.values

    def feature_names(self) -> list[str]:
        return [a.name for a in self.schema if a.role == ROLE_FEATURE]

    def index_of(self, name: str) -> int:
        for i, a in enumerate(self.schema):
            if a.name == name:
                return i
        raise DataError(f"unknown attribute {name!r}")

    def attribute(self, name: str) -> AttributeSchema:
        return self.schema[self.index_of(name)]

    def column(self, name: str) -> np.ndarray:
        """The raw (read-only) column for an attribute."""
        return self._cols[self.index_of(name)]

    def column_at(self, index: int) -> np.ndarray:
        return self._cols[index]

    @property
    def class_column(self) -> np.ndarray:
        return self._cols[self._class_index]

    def instance(self, i: int) -> Instance:
        vals = []
        for attr, col in zip(self.schema, self._cols):
            v = col[i]
            if attr.kind == NOMINAL:
                vals.append(MISSING if v < 0 else int(v))
            else:
                vals.append(MISSING if np.isnan(v) else float(v))
        return Instance(tuple(vals), float(self._weights[i]))

    def class_counts(self) -> np.ndarray:
        """Weighted class counts over non-missing class values."""
        y = self.class_column
        known = y >= 0
        return np.bincount(y[known], weights=self._weights[known],
                           minlength=self.class_attribute.arity)

    # -- derived datasets --------------------------------------------------

    def select(self, indices: np.ndarray) -> "Dataset":
        """A new dataset containing the given instances (by position)."""
        idx = np.asarray(indices)
        return Dataset(self.schema, [c[idx] for c in self._cols], self._weights[idx])

    def replace_column(self, name: str, attr: AttributeSchema, column: np.ndarray) -> "Dataset":
        j = self.index_of(name)
        schema = list(self.schema)
        schema[j] = attr
        cols = list(self._cols)
        cols[j] = column
        return Dataset(schema, cols, self._weights)

    def add_column(self, attr: AttributeSchema, column: np.ndarray) -> "Dataset":
        if any(a.name == attr.name for a in self.schema):
            raise DataError(f"attribute {attr.name!r} already present")
        return Dataset(list(self.schema) + [attr], list(self._cols) + [column], self._weights)

    def with_weights(self, weights: np.ndarray) -> "Dataset":
        return Dataset(self.schema, self._cols, np.asarray(weights, dtype=float))

    def equals(self, other: "Dataset") -> bool:
        if self.schema != other.schema or len(self) != len(other):
            return False
        for a, b in zip(self._cols, other._cols):
            if a.dtype.kind == "f":
                if not np.array_equal(a, b, equal_nan=True):
                    return False
            elif not np.array_equal(a, b):
                return False
        return np.array_equal(self._weights, other._weights)


def schema_fingerprint(schema: Sequence[AttributeSchema]) -> str:
    """Stable digest of a schema; used to pair models with compatible data."""
    parts = []
    for a in schema:
        parts.append("|".join([a.name, a.kind, ",".join(a.values), a.role]))
    return hashlib.sha256(";".join(parts).encode("utf-8")).hexdigest()[:16]


# -- operations -----------------------------------------------------------


def dataset_stats(d: Dataset, attr: str) -> list[tuple[str, float, float]]:
    """Frequency table (value, weighted count, percentage) for a nominal attribute.

    Percentages are of the total instance weight; MISSING is reported as its
    own row (labelled ``MISSING``) when present. Zero-count values are
    omitted, so an empty dataset yields an empty table.
    """
    a = d.attribute(attr)
    if a.kind != NOMINAL:
        raise DataError(f"dataset_stats requires a nominal attribute, got {attr!r}")
    col = d.column(attr)
    w = d.weights
    total = float(w.sum())
    rows: list[tuple[str, float, float]] = []
    counts = np.bincount(col[col >= 0], weights=w[col >= 0], minlength=a.arity)
    order = np.argsort(-counts, kind="stable")
    for v in order:
        if counts[v] > 0:
            rows.append((a.values[v], float(counts[v]), 100.0 * counts[v] / total))
    miss = float(w[col < 0].sum())
    if miss > 0:
        rows.append(("MISSING", miss, 100.0 * miss / total))
    return rows


@dataclass(frozen=True)
class Partitions:
    """Result of :func:`partition_by`: one dataset per value, plus the
    count of instances dropped because the key attribute was MISSING."""

    parts: dict[str, Dataset]
    missing_count: int


def partition_by(d: Dataset, attr: str) -> Partitions:
    """Split a dataset by the values of a nominal attribute.

    The key attribute is constant within each partition, so its role is
    demoted to meta there (values are preserved). Instances whose key is
    MISSING belong to no partition and are tallied separately.
    """
    a = d.attribute(attr)
    if a.kind != NOMINAL:
        raise DataError(f"partition_by requires a nominal attribute, got {attr!r}")
    if a.role == ROLE_CLASS:
        raise DataError("cannot partition by the class attribute")
    col = d.column(attr)
    parts: dict[str, Dataset] = {}
    for v, label in enumerate(a.values):
        idx = np.nonzero(col == v)[0]
        if len(idx) == 0:
            continue
        part = d.select(idx)
        if a.role == ROLE_FEATURE:
            part = part.replace_column(attr, a.with_role(ROLE_META), part.column(attr))
        parts[label] = part
    missing = int((col < 0).sum())
    return Partitions(parts, missing)


def project(d: Dataset, keep: Iterable[str]) -> Dataset:
    """Restrict the feature set to ``keep``; the class attribute is always retained.

    Attribute order follows the original schema. Meta attributes are dropped.
    """
    keep = list(keep)
    feature_names = set(d.feature_names())
    for name in keep:
        d.index_of(name)  # raises on unknown attribute
        if name not in feature_names:
            raise DataError(f"{name!r} is not a feature attribute")
    wanted = set(keep)
    idxs = [i for i, a in enumerate(d.schema)
            if a.role == ROLE_CLASS or (a.role == ROLE_FEATURE and a.name in wanted)]
    return Dataset([d.schema[i] for i in idxs], [d.column_at(i) for i in idxs], d.weights)


def concat(datasets: Sequence[Dataset]) -> Dataset:
    """Concatenate datasets sharing an identical schema."""
    if not datasets:
        raise DataError("concat requires at least one dataset")
    first = datasets[0]
    for other in datasets[1:]:
        if other.schema != first.schema:
            raise DataError("concat requires identical schemas")
    cols = [np.concatenate([ds.column_at(j) for ds in datasets])
            for j in range(len(first.schema))]
    weights = np.concatenate([ds.weights for ds in datasets])
    return Dataset(first.schema, cols, weights)
