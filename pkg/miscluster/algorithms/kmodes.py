"""
k-modes baseline.

Hamming dissimilarity, per-cluster modes, Huang-style initialization from
random distinct rows, several restarts keeping the lowest total cost.
"""
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from miscluster.algorithms.base import Clusterer
from miscluster.config import KModesOptions
from miscluster.dataset import CategoricalDataset, SampleSet
from miscluster.engine import ClusteringResult
from miscluster.errors import InputError


def _dissimilarity(codes: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """(n_rows, k) Hamming distances"""
    return (codes[:, None, :] != modes[None, :, :]).sum(axis=2)


def _update_modes(codes: np.ndarray, membership: np.ndarray, modes: np.ndarray, sizes) -> np.ndarray:
    updated = modes.copy()
    for cluster in range(modes.shape[0]):
        members = codes[membership == cluster]
        if members.shape[0] == 0:
            continue
        for j in range(codes.shape[1]):
            # argmax keeps the lowest category index on ties
            updated[cluster, j] = int(np.argmax(np.bincount(members[:, j], minlength=sizes[j])))
    return updated


def _initial_modes(codes: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    distinct = np.unique(codes, axis=0)
    if distinct.shape[0] >= k:
        chosen = rng.choice(distinct.shape[0], size=k, replace=False)
        return distinct[np.sort(chosen)].copy()
    # fewer distinct rows than k: take them all and pad with random rows
    padding = rng.choice(codes.shape[0], size=k - distinct.shape[0], replace=True)
    return np.vstack([distinct, codes[padding]])


def _run_once(codes: np.ndarray, k: int, sizes, rng, max_iter: int) -> Tuple[np.ndarray, float, int]:
    modes = _initial_modes(codes, k, rng)
    membership = np.argmin(_dissimilarity(codes, modes), axis=1)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        modes = _update_modes(codes, membership, modes, sizes)
        updated = np.argmin(_dissimilarity(codes, modes), axis=1)
        if np.array_equal(updated, membership):
            break
        membership = updated
    modes = _update_modes(codes, membership, modes, sizes)
    cost = float(_dissimilarity(codes, modes)[np.arange(codes.shape[0]), membership].sum())
    return membership, cost, iterations


def kmodes_cluster(
    dataset: CategoricalDataset,
    k: int,
    seed: int = 0,
    n_init: int = 16,
    max_iter: int = 100,
) -> ClusteringResult:
    """Best of n_init k-modes runs; deterministic for a fixed seed"""
    if k < 1:
        raise InputError("k must be positive")
    if k > dataset.n_rows:
        raise InputError(f"k={k} exceeds the {dataset.n_rows} rows of dataset {dataset.name!r}")
    if n_init < 1:
        raise InputError("n_init must be positive")

    codes = dataset.codes
    sizes = [c.n_categories for c in dataset.attributes]
    rng = np.random.default_rng(seed)

    best_membership: Optional[np.ndarray] = None
    best_cost = np.inf
    for run in range(n_init):
        membership, cost, iterations = _run_once(codes, k, sizes, rng, max_iter)
        logger.debug("k-modes run", dataset=dataset.name, run=run, cost=cost, iterations=iterations)
        if cost < best_cost:
            best_membership, best_cost = membership, cost

    clusters = []
    for index in range(k):
        rows = np.flatnonzero(best_membership == index)
        if rows.size:
            clusters.append(SampleSet(dataset, rows))
    warnings = []
    if len(clusters) < k:
        warnings.append(f"{k - len(clusters)} of {k} k-modes clusters ended up empty and were dropped")

    logger.info("k-modes finished", dataset=dataset.name, k=k, clusters=len(clusters), cost=best_cost)
    return ClusteringResult(
        dataset=dataset,
        clusters=clusters,
        splits=[],
        mode="kmodes",
        k=k,
        algorithm="kmodes",
        config={"k": k, "seed": seed, "n_init": n_init, "max_iter": max_iter},
        warnings=warnings,
        cost=best_cost,
    )


class KModesClusterer(Clusterer):
    """k-modes comparison baseline"""

    def __init__(self, k: int, options: KModesOptions = None):
        self.k = k
        self.options = options or KModesOptions()

    @property
    def name(self) -> str:
        return "kmodes"

    @property
    def mode(self) -> str:
        return f"k={self.k}"

    def fit(self, dataset: CategoricalDataset) -> ClusteringResult:
        return kmodes_cluster(
            dataset,
            self.k,
            seed=self.options.seed,
            n_init=self.options.n_init,
            max_iter=self.options.max_iter,
        )
