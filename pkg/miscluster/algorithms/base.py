"""Base clusterer interface"""
from abc import ABC, abstractmethod

from miscluster.dataset import CategoricalDataset
from miscluster.engine import ClusteringResult


class Clusterer(ABC):
    """Abstract interface for clustering algorithms"""

    @property
    @abstractmethod
    def name(self) -> str:
        """Algorithm identifier as used on the command line"""
        pass

    @property
    @abstractmethod
    def mode(self) -> str:
        """Mode label reported next to the purity value"""
        pass

    @abstractmethod
    def fit(self, dataset: CategoricalDataset) -> ClusteringResult:
        """Cluster the dataset"""
        pass
