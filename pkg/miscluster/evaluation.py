"""External evaluation of clusterings against class labels"""
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel
from sklearn.metrics.cluster import contingency_matrix

from miscluster.engine import ClusteringResult
from miscluster.errors import InputError


def _labels_array(result: ClusteringResult, labels: Sequence) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (result.dataset.n_rows,):
        raise InputError(f"{labels.size} labels given for {result.dataset.n_rows} rows")
    return labels


def purity(result: ClusteringResult, labels: Sequence) -> float:
    """Sum over clusters of the majority-class count, divided by N"""
    labels = _labels_array(result, labels)
    # rows are classes, columns are clusters
    table = contingency_matrix(labels, result.assignments())
    return float(np.sum(np.amax(table, axis=0)) / np.sum(table))


def majority_floor(labels: Sequence) -> float:
    """Purity of the one-cluster clustering: the largest class frequency"""
    _, counts = np.unique(np.asarray(labels), return_counts=True)
    if counts.size == 0:
        raise InputError("no labels")
    return float(counts.max() / counts.sum())


class ClusterComposition(BaseModel):
    cluster_index: int
    size: int
    majority_class: str
    majority_count: int

    @property
    def majority_fraction(self) -> float:
        return self.majority_count / self.size


def cluster_composition(result: ClusteringResult, labels: Sequence) -> List[ClusterComposition]:
    labels = _labels_array(result, labels)
    composition = []
    for index, members in enumerate(result.clusters):
        classes, counts = np.unique(labels[members.rows], return_counts=True)
        best = int(np.argmax(counts))
        composition.append(
            ClusterComposition(
                cluster_index=index,
                size=len(members),
                majority_class=str(classes[best]),
                majority_count=int(counts[best]),
            )
        )
    return composition
