"""Column-oriented categorical dataset and row subsets"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from miscluster.errors import InputError

MISSING_CATEGORY = "?"


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=np.int64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class AttributeColumn:
    """One categorical attribute: its dictionary and per-row category indices"""

    name: str
    categories: Tuple[str, ...]
    values: np.ndarray
    missing_index: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "values", _frozen(self.values))
        if not self.categories:
            raise InputError(f"attribute {self.name!r} has no categories")
        if len(set(self.categories)) != len(self.categories):
            raise InputError(f"attribute {self.name!r} has duplicate categories")
        if self.values.size and (self.values.min() < 0 or self.values.max() >= len(self.categories)):
            raise InputError(f"attribute {self.name!r} has values outside its dictionary")
        if self.missing_index is not None and self.categories[self.missing_index] != MISSING_CATEGORY:
            raise InputError(f"attribute {self.name!r}: missing_index does not point at {MISSING_CATEGORY!r}")

    @classmethod
    def encode(cls, name: str, tokens: Sequence[str]) -> "AttributeColumn":
        """Encode raw tokens in first-appearance order"""
        codes, uniques = pd.factorize(pd.Series(list(tokens), dtype=object), sort=False)
        categories = tuple(str(u) for u in uniques)
        missing_index = categories.index(MISSING_CATEGORY) if MISSING_CATEGORY in categories else None
        return cls(name=name, categories=categories, values=codes, missing_index=missing_index)

    @property
    def n_categories(self) -> int:
        return len(self.categories)

    def index_of(self, category: str) -> int:
        try:
            return self.categories.index(category)
        except ValueError:
            raise InputError(f"attribute {self.name!r} has no category {category!r}")

    def tokens(self) -> List[str]:
        return [self.categories[v] for v in self.values]

    def equals(self, other: "AttributeColumn") -> bool:
        return (
            self.name == other.name
            and self.categories == other.categories
            and self.missing_index == other.missing_index
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class CategoricalDataset:
    """Immutable integer-encoded categorical table, stored column by column"""

    name: str
    attributes: Tuple[AttributeColumn, ...]
    labels: Optional[np.ndarray] = None
    label_names: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not self.attributes:
            raise InputError(f"dataset {self.name!r} has no attributes")
        n_rows = len(self.attributes[0].values)
        for column in self.attributes:
            if len(column.values) != n_rows:
                raise InputError(
                    f"attribute {column.name!r} has {len(column.values)} rows, expected {n_rows}"
                )
        names = [c.name for c in self.attributes]
        if len(set(names)) != len(names):
            raise InputError(f"dataset {self.name!r} has duplicate attribute names")
        if self.labels is not None:
            object.__setattr__(self, "labels", _frozen(self.labels))
            object.__setattr__(self, "label_names", tuple(self.label_names))
            if len(self.labels) != n_rows:
                raise InputError(f"labels have {len(self.labels)} entries, expected {n_rows}")

    @property
    def n_rows(self) -> int:
        return len(self.attributes[0].values)

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def attribute_names(self) -> List[str]:
        return [c.name for c in self.attributes]

    @property
    def n_classes(self) -> Optional[int]:
        if self.labels is None:
            return None
        return int(np.unique(self.labels).size)

    def attribute_index(self, name: str) -> int:
        try:
            return self.attribute_names.index(name)
        except ValueError:
            raise InputError(f"dataset {self.name!r} has no attribute {name!r}")

    def class_labels(self) -> List[str]:
        if self.labels is None:
            raise InputError(f"dataset {self.name!r} has no class labels")
        return [self.label_names[v] for v in self.labels]

    def row(self, index: int) -> Tuple[str, ...]:
        """Raw category strings of one row"""
        return tuple(c.categories[c.values[index]] for c in self.attributes)

    @cached_property
    def codes(self) -> np.ndarray:
        """Row-major (n_rows, n_attributes) code matrix"""
        matrix = np.column_stack([c.values for c in self.attributes])
        matrix.setflags(write=False)
        return matrix

    def equals(self, other: "CategoricalDataset") -> bool:
        if self.n_attributes != other.n_attributes:
            return False
        if not all(a.equals(b) for a, b in zip(self.attributes, other.attributes)):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        if self.labels is None:
            return True
        return self.label_names == other.label_names and np.array_equal(self.labels, other.labels)

    def take(self, rows: Iterable[int], name: Optional[str] = None) -> "CategoricalDataset":
        """Row subset (or row repetition) keeping every dictionary unchanged"""
        rows = np.asarray(list(rows), dtype=np.int64)
        attributes = tuple(
            AttributeColumn(c.name, c.categories, c.values[rows], c.missing_index) for c in self.attributes
        )
        labels = None if self.labels is None else self.labels[rows]
        return CategoricalDataset(name or self.name, attributes, labels, self.label_names)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """A subset of a dataset's rows (a working set, partition or cluster)"""

    dataset: CategoricalDataset
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 1:
            raise InputError("row indices must be one-dimensional")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.dataset.n_rows:
                raise InputError(
                    f"row indices must lie in [0, {self.dataset.n_rows}) for dataset {self.dataset.name!r}"
                )
            if np.unique(rows).size != rows.size:
                raise InputError("row indices must be unique")
        object.__setattr__(self, "rows", _frozen(rows))

    @classmethod
    def full(cls, dataset: CategoricalDataset) -> "SampleSet":
        return cls(dataset, np.arange(dataset.n_rows))

    def __len__(self) -> int:
        return int(self.rows.size)

    @property
    def is_empty(self) -> bool:
        return self.rows.size == 0

    def column(self, attribute: int) -> np.ndarray:
        return self.dataset.attributes[attribute].values[self.rows]

    def where(self, mask: np.ndarray) -> "SampleSet":
        return SampleSet(self.dataset, self.rows[mask])

    def row_list(self) -> List[int]:
        return [int(r) for r in self.rows]
