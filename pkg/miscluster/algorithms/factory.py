"""Clusterer factory"""
from miscluster.algorithms.base import Clusterer
from miscluster.algorithms.kmodes import KModesClusterer
from miscluster.algorithms.mis import MISClusterer
from miscluster.config import EngineConfig, KModesOptions
from miscluster.errors import InputError


def build_clusterer(
    name: str,
    k: int,
    engine: EngineConfig = None,
    kmodes: KModesOptions = None,
) -> Clusterer:
    """Build a clusterer by command-line name; k is the class count for fixed-k algorithms"""

    engine = engine or EngineConfig()
    kmodes = kmodes or KModesOptions()
    knobs = engine.model_dump(exclude={"mode", "k"})

    if name == "mis":
        return MISClusterer(EngineConfig.fixed_k(k, **knobs))

    elif name == "mis-auto":
        return MISClusterer(EngineConfig.auto(**knobs))

    elif name == "kmodes":
        return KModesClusterer(k, kmodes)

    else:
        raise InputError(f"Unknown algorithm: {name}")
