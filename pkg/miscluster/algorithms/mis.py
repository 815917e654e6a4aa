"""MIS clusterer"""
from miscluster.algorithms.base import Clusterer
from miscluster.config import EngineConfig
from miscluster.dataset import CategoricalDataset
from miscluster.engine import ClusteringResult, cluster


class MISClusterer(Clusterer):
    """Mutual Information Scoring, fixed-k or auto"""

    def __init__(self, config: EngineConfig):
        self.config = config

    @property
    def name(self) -> str:
        return "mis" if self.config.mode == "fixed-k" else "mis-auto"

    @property
    def mode(self) -> str:
        return self.config.describe()

    def fit(self, dataset: CategoricalDataset) -> ClusteringResult:
        return cluster(dataset, self.config)
