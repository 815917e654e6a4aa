"""
MIS clustering engine.

Each step picks the significant attribute (highest MIS among attributes that
are not constant in the working set), splits the working set by its
categories, extracts the partition with the least partition entropy as a
cluster and continues on the remainder. The final remainder is the last
cluster.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel

from miscluster import info
from miscluster.config import EngineConfig
from miscluster.dataset import CategoricalDataset, SampleSet
from miscluster.errors import InputError, UnsplittableError


class SplitRecord(BaseModel):
    """One extraction: what was split on, what was taken, and the scores behind it"""

    step: int
    significant_attribute: int
    attribute_name: str
    chosen_category: int
    category_name: str
    # category name -> partition entropy, in dictionary order of realized categories
    partition_entropies: Dict[str, float]
    # attribute name -> MIS, in attribute order; constant attributes are not candidates
    mis_scores: Dict[str, float]
    working_entropy: float
    cluster_size: int
    residual_size: int

    @property
    def min_entropy(self) -> float:
        return self.partition_entropies[self.category_name]

    @property
    def entropy_ratio(self) -> float:
        return self.min_entropy / self.working_entropy if self.working_entropy > 0 else 1.0

    def is_consistent(self) -> bool:
        """The recorded choices match an argmin/argmax over the stored score vectors"""
        if _first_extreme(self.partition_entropies, lowest=True) != self.category_name:
            return False
        if self.mis_scores and _first_extreme(self.mis_scores, lowest=False) != self.attribute_name:
            return False
        return True


def _first_extreme(scores: Dict[Any, float], lowest: bool):
    best_key, best_value = None, None
    for key, value in scores.items():
        if best_value is None or (value < best_value if lowest else value > best_value):
            best_key, best_value = key, value
    return best_key


@dataclass
class ClusteringResult:
    """Clusters in extraction order; the last one is the residual"""

    dataset: CategoricalDataset
    clusters: List[SampleSet]
    splits: List[SplitRecord]
    mode: str
    k: Optional[int] = None
    algorithm: str = "mis"
    config: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    stop_reason: Optional[str] = None
    cost: Optional[float] = None

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def shortfall(self) -> bool:
        return self.mode == "fixed-k" and self.k is not None and self.n_clusters < self.k

    def assignments(self) -> np.ndarray:
        """Cluster index of every dataset row"""
        labels = np.full(self.dataset.n_rows, -1, dtype=np.int64)
        for index, members in enumerate(self.clusters):
            labels[members.rows] = index
        return labels

    def cluster_sizes(self) -> List[int]:
        return [len(c) for c in self.clusters]

    def same_as(self, other: "ClusteringResult") -> bool:
        return (
            self.mode == other.mode
            and self.k == other.k
            and self.algorithm == other.algorithm
            and len(self.clusters) == len(other.clusters)
            and all(np.array_equal(a.rows, b.rows) for a, b in zip(self.clusters, other.clusters))
            and self.splits == other.splits
        )


def _candidate_scores(working: SampleSet, active: Sequence[int], n_jobs: int) -> Dict[int, float]:
    candidates = [a for a in active if not info.is_constant(working, a)]
    if not candidates:
        raise UnsplittableError(len(working))
    scores = info.mis_scores(working, active, n_jobs=n_jobs)
    return {a: scores[a] for a in candidates}


def _check_working(working: SampleSet, active: Sequence[int]) -> List[int]:
    if working.is_empty:
        raise InputError("working set is empty")
    attrs = sorted(set(active))
    if len(attrs) < 2:
        raise InputError("at least two active attributes are required")
    return attrs


def select_significant_attribute(working: SampleSet, active: Iterable[int], n_jobs: int = 1) -> int:
    """Highest-MIS attribute among those not constant in the working set; ties go to the lowest index"""
    attrs = _check_working(working, list(active))
    return _first_extreme(_candidate_scores(working, attrs, n_jobs), lowest=False)


def extract_min_entropy_partition(
    working: SampleSet,
    attr: int,
    active: Iterable[int],
    *,
    mis_scores: Optional[Dict[int, float]] = None,
    step: int = 0,
) -> Tuple[SampleSet, SampleSet, SplitRecord]:
    """Split by `attr` and peel off the least-entropy partition; ties go to the lowest category index"""
    attrs = _check_working(working, list(active))
    dataset = working.dataset
    column = dataset.attributes[attr]
    values = working.column(attr)
    realized = np.flatnonzero(np.bincount(values, minlength=column.n_categories))
    if realized.size < 2:
        raise UnsplittableError(
            len(working), f"attribute {column.name!r} is constant within the working set of {len(working)} rows"
        )

    entropies: Dict[int, float] = {}
    partitions: Dict[int, SampleSet] = {}
    for category in realized:
        category = int(category)
        partitions[category] = working.where(values == category)
        entropies[category] = info.partition_entropy(partitions[category], attrs)
    chosen = _first_extreme(entropies, lowest=True)

    extracted = partitions[chosen]
    residual = working.where(values != chosen)
    record = SplitRecord(
        step=step,
        significant_attribute=attr,
        attribute_name=column.name,
        chosen_category=chosen,
        category_name=column.categories[chosen],
        partition_entropies={column.categories[c]: h for c, h in entropies.items()},
        mis_scores={dataset.attributes[a].name: s for a, s in (mis_scores or {}).items()},
        working_entropy=info.partition_entropy(working, attrs),
        cluster_size=len(extracted),
        residual_size=len(residual),
    )
    return extracted, residual, record


def cluster(dataset: CategoricalDataset, config: EngineConfig) -> ClusteringResult:
    """Run MIS clustering in fixed-k or auto mode; fully deterministic"""
    if dataset.n_rows < 2 or dataset.n_attributes < 2:
        raise InputError(
            f"MIS clustering needs at least 2 rows and 2 attributes, got {dataset.n_rows} x {dataset.n_attributes}"
        )

    fixed = config.mode == "fixed-k"
    active = list(range(dataset.n_attributes))
    working = SampleSet.full(dataset)
    clusters: List[SampleSet] = []
    splits: List[SplitRecord] = []
    warnings: List[str] = []
    min_residual = config.min_cluster_fraction * dataset.n_rows
    stop_reason = "k-reached"

    while not fixed or len(splits) < config.k - 1:
        try:
            scores = _candidate_scores(working, active, config.n_jobs)
        except UnsplittableError:
            stop_reason = "unsplittable"
            break
        attr = _first_extreme(scores, lowest=False)
        extracted, residual, record = extract_min_entropy_partition(
            working, attr, active, mis_scores=scores, step=len(splits)
        )
        if not fixed:
            if record.entropy_ratio > config.auto_stop_ratio:
                stop_reason = "entropy-ratio"
                break
            if len(residual) < min_residual:
                stop_reason = "min-cluster-fraction"
                break
        logger.debug(
            "cluster extracted",
            dataset=dataset.name,
            step=record.step,
            attribute=record.attribute_name,
            category=record.category_name,
            cluster_size=record.cluster_size,
            residual_size=record.residual_size,
            entropy_ratio=round(record.entropy_ratio, 6),
        )
        clusters.append(extracted)
        splits.append(record)
        working = residual
    clusters.append(working)

    if fixed and len(clusters) < config.k:
        message = (
            f"residual of {len(working)} rows became unsplittable after {len(splits)} extractions; "
            f"returning {len(clusters)} clusters instead of {config.k}"
        )
        warnings.append(message)
        logger.warning("fixed-k shortfall", dataset=dataset.name, k=config.k, clusters=len(clusters))

    logger.info(
        "clustering finished",
        dataset=dataset.name,
        mode=config.mode,
        clusters=len(clusters),
        stop_reason=stop_reason,
    )
    return ClusteringResult(
        dataset=dataset,
        clusters=clusters,
        splits=splits,
        mode=config.mode,
        k=config.k,
        algorithm="mis",
        config=config.model_dump(exclude={"n_jobs"}),
        warnings=warnings,
        stop_reason=stop_reason,
    )


def assign(dataset: CategoricalDataset, result: ClusteringResult, row: Sequence[str]) -> int:
    """Route a row down the recorded split sequence; unmatched rows land in the residual"""
    if result.algorithm != "mis":
        raise InputError("assign needs a MIS result with a recorded split sequence")
    if len(row) != dataset.n_attributes:
        raise InputError(f"row has {len(row)} values, dataset {dataset.name!r} has {dataset.n_attributes} attributes")
    for index, split in enumerate(result.splits):
        if row[split.significant_attribute] == split.category_name:
            return index
    return len(result.splits)
