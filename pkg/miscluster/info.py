"""
Information-theoretic kernels over sample subsets.

All quantities are in bits and use plug-in (maximum-likelihood) probabilities.
Zero-count cells contribute nothing. Counting is done in integers; floats
appear only at the final division.
"""
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.special import rel_entr

from miscluster.dataset import SampleSet
from miscluster.errors import InputError, SupportError

_LN2 = np.log(2.0)


def _require_rows(samples: SampleSet) -> None:
    if samples.is_empty:
        raise InputError("operation requires a non-empty sample set")


def _n_categories(samples: SampleSet, attribute: int) -> int:
    try:
        return samples.dataset.attributes[attribute].n_categories
    except IndexError:
        raise InputError(f"attribute index {attribute} out of range")


def _entropy_from_counts(counts: np.ndarray) -> float:
    # sorted so that equal count multisets give bit-identical sums
    nonzero = np.sort(counts[counts > 0])
    total = nonzero.sum()
    p = nonzero / total
    return float(-np.sum(p * np.log2(p))) + 0.0


def _compact(codes: np.ndarray) -> Tuple[np.ndarray, int]:
    """Re-index codes onto the categories present, keeping their relative order"""
    present, inverse = np.unique(codes, return_inverse=True)
    return inverse.reshape(-1).astype(np.int64), int(present.size)


def _mi_from_codes(x: np.ndarray, y: np.ndarray) -> float:
    # only realized (x, y) cells are materialized; unique keys come back row-major
    total = x.size
    x, l = _compact(x)
    y, m = _compact(y)
    keys, cells = np.unique(x * m + y, return_counts=True)
    rows = np.bincount(x, minlength=l)
    cols = np.bincount(y, minlength=m)
    s, t = keys // m, keys % m
    ratio = (cells * total) / (rows[s] * cols[t])
    mi = float(np.sum((cells / total) * np.log2(ratio)))
    return max(mi, 0.0)


def category_counts(samples: SampleSet, attribute: int) -> np.ndarray:
    return np.bincount(samples.column(attribute), minlength=_n_categories(samples, attribute))


def realized_categories(samples: SampleSet, attribute: int) -> int:
    """Domain size of the attribute within the samples (empty partitions are not partitions)"""
    return int(np.count_nonzero(category_counts(samples, attribute)))


def is_constant(samples: SampleSet, attribute: int) -> bool:
    return realized_categories(samples, attribute) <= 1


def entropy(samples: SampleSet, attribute: int) -> float:
    _require_rows(samples)
    return _entropy_from_counts(category_counts(samples, attribute))


@dataclass(frozen=True)
class ContingencyTable:
    """Co-occurrence counts of an ordered attribute pair over a sample set"""

    counts: np.ndarray

    @property
    def row_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def contingency_table(samples: SampleSet, a_i: int, a_j: int) -> ContingencyTable:
    _require_rows(samples)
    l, m = _n_categories(samples, a_i), _n_categories(samples, a_j)
    joint = np.bincount(samples.column(a_i) * m + samples.column(a_j), minlength=l * m).reshape(l, m)
    return ContingencyTable(counts=joint)


def mutual_information(samples: SampleSet, a_i: int, a_j: int) -> float:
    """
    Plug-in MI from the joint counts (intersections of the two partitions).
    The table is always built with the lower attribute index as rows, so the
    result is bit-identical in both argument orders.
    """
    _require_rows(samples)
    low, high = sorted((a_i, a_j))
    _n_categories(samples, low)
    _n_categories(samples, high)
    return _mi_from_codes(samples.column(low), samples.column(high))


def mutual_information_matrix(samples: SampleSet, active: Iterable[int], n_jobs: int = 1) -> Dict[Tuple[int, int], float]:
    """
    MI for every unordered pair of active attributes, keyed (low, high).

    Pairs fan out over joblib workers; results come back in canonical pair
    order whatever the degree, so downstream sums are bit-identical.
    """
    _require_rows(samples)
    attrs = sorted(set(active))
    for a in attrs:
        _n_categories(samples, a)
    columns = {a: samples.column(a) for a in attrs}
    pairs = list(combinations(attrs, 2))
    if n_jobs == 1 or len(pairs) < 2:
        values = [_mi_from_codes(columns[a], columns[b]) for a, b in pairs]
    else:
        values = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_mi_from_codes)(columns[a], columns[b]) for a, b in pairs
        )
    return dict(zip(pairs, values))


def _pair(matrix: Dict[Tuple[int, int], float], a: int, b: int) -> float:
    return matrix[(a, b) if a < b else (b, a)]


def _check_active(a_i: int, active: Sequence[int]) -> List[int]:
    attrs = sorted(set(active))
    if len(attrs) < 2:
        raise InputError("MIS needs at least two active attributes")
    if a_i not in attrs:
        raise InputError(f"attribute {a_i} is not in the active set")
    return attrs


def _mis_from_matrix(samples: SampleSet, a_i: int, attrs: List[int], matrix) -> float:
    summed = 0.0
    for a_j in attrs:
        if a_j != a_i:
            summed += _pair(matrix, a_i, a_j)
    return summed / realized_categories(samples, a_i)


def mis_score(samples: SampleSet, a_i: int, active: Iterable[int]) -> float:
    """Summed MI of a_i with every other active attribute, divided by a_i's local domain size"""
    _require_rows(samples)
    attrs = _check_active(a_i, list(active))
    matrix = {
        (min(a_i, a_j), max(a_i, a_j)): mutual_information(samples, a_i, a_j) for a_j in attrs if a_j != a_i
    }
    return _mis_from_matrix(samples, a_i, attrs, matrix)


def mis_scores(samples: SampleSet, active: Iterable[int], n_jobs: int = 1) -> Dict[int, float]:
    """MIS of every active attribute from one shared MI matrix"""
    _require_rows(samples)
    attrs = sorted(set(active))
    if len(attrs) < 2:
        raise InputError("MIS needs at least two active attributes")
    matrix = mutual_information_matrix(samples, attrs, n_jobs=n_jobs)
    return {a: _mis_from_matrix(samples, a, attrs, matrix) for a in attrs}


def summed_mutual_information(samples: SampleSet, active: Iterable[int], n_jobs: int = 1) -> Dict[int, float]:
    """Raw summed MI per attribute, without the domain-size normalization"""
    _require_rows(samples)
    attrs = sorted(set(active))
    matrix = mutual_information_matrix(samples, attrs, n_jobs=n_jobs)
    result = {}
    for a_i in attrs:
        summed = 0.0
        for a_j in attrs:
            if a_j != a_i:
                summed += _pair(matrix, a_i, a_j)
        result[a_i] = summed
    return result


def partition_entropy(partition: SampleSet, active: Iterable[int]) -> float:
    """Independence approximation of a partition's joint entropy: the sum of marginal entropies"""
    _require_rows(partition)
    total = 0.0
    for attribute in sorted(set(active)):
        total += entropy(partition, attribute)
    return total


@dataclass(frozen=True)
class CategoryDistribution:
    """Probabilities over one attribute's full category dictionary"""

    categories: Tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        probabilities = np.asarray(self.probabilities, dtype=float)
        if probabilities.shape != (len(self.categories),):
            raise InputError("one probability per category is required")
        if np.any(probabilities < 0):
            raise InputError("probabilities must be non-negative")
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "probabilities", probabilities)

    @classmethod
    def from_counts(cls, categories: Sequence[str], counts: np.ndarray) -> "CategoryDistribution":
        counts = np.asarray(counts)
        total = counts.sum()
        if total <= 0:
            raise InputError("cannot form a distribution from zero counts")
        return cls(tuple(categories), counts / total)

    def __getitem__(self, category: str) -> float:
        return float(self.probabilities[self.categories.index(category)])


def category_distribution(samples: SampleSet, attribute: int) -> CategoryDistribution:
    _require_rows(samples)
    return CategoryDistribution.from_counts(
        samples.dataset.attributes[attribute].categories, category_counts(samples, attribute)
    )


def kl_divergence(q: CategoryDistribution, p: CategoryDistribution) -> float:
    """D(q || p) in bits; q must be absolutely continuous with respect to p"""
    if q.categories != p.categories:
        raise InputError("KL divergence needs both distributions over the same category dictionary")
    violated = np.flatnonzero((q.probabilities > 0) & (p.probabilities == 0))
    if violated.size:
        index = int(violated[0])
        raise SupportError(q.categories[index], float(q.probabilities[index]))
    if np.array_equal(q.probabilities, p.probabilities):
        return 0.0
    divergence = float(np.sum(rel_entr(q.probabilities, p.probabilities)) / _LN2)
    return max(divergence, 0.0)
