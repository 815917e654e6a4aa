"""Clustering algorithms behind a common interface"""
from miscluster.algorithms.base import Clusterer
from miscluster.algorithms.mis import MISClusterer
from miscluster.algorithms.kmodes import KModesClusterer, kmodes_cluster

__all__ = [
    "Clusterer",
    "MISClusterer",
    "KModesClusterer",
    "kmodes_cluster",
]
