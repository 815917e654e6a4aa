"""Clustering result documents (YAML)"""
from pathlib import Path
from typing import Any, Dict

import yaml
from loguru import logger
from pydantic import ValidationError

from miscluster.dataset import CategoricalDataset, SampleSet
from miscluster.engine import ClusteringResult, SplitRecord
from miscluster.errors import InputError

DOCUMENT_FORMAT = "miscluster-result"
DOCUMENT_VERSION = 1
SCORE_DECIMALS = 9


def _round(value: float) -> float:
    return round(float(value), SCORE_DECIMALS) + 0.0


def _split_document(split: SplitRecord) -> Dict[str, Any]:
    return {
        "step": split.step,
        "significant_attribute": split.attribute_name,
        "attribute_index": split.significant_attribute,
        "chosen_category": split.category_name,
        "category_index": split.chosen_category,
        "partition_entropies": {c: _round(h) for c, h in split.partition_entropies.items()},
        "mis_scores": {a: _round(s) for a, s in split.mis_scores.items()},
        "working_entropy": _round(split.working_entropy),
        "cluster_size": split.cluster_size,
        "residual_size": split.residual_size,
    }


def result_document(result: ClusteringResult) -> Dict[str, Any]:
    """Config echo, split records with names, and each cluster's row indices"""
    return {
        "format": DOCUMENT_FORMAT,
        "version": DOCUMENT_VERSION,
        "dataset": result.dataset.name,
        "n_rows": result.dataset.n_rows,
        "attributes": result.dataset.attribute_names,
        "algorithm": result.algorithm,
        "mode": result.mode,
        "k": result.k,
        "stop_reason": result.stop_reason,
        "cost": None if result.cost is None else _round(result.cost),
        "config": dict(result.config),
        "warnings": list(result.warnings),
        "splits": [_split_document(s) for s in result.splits],
        "clusters": [c.row_list() for c in result.clusters],
    }


def save_result(result: ClusteringResult, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(result_document(result), f, default_flow_style=None, sort_keys=False, width=120)
    logger.info("result saved", path=str(path), clusters=result.n_clusters)
    return path


def _split_record(dataset: CategoricalDataset, raw: Dict[str, Any]) -> SplitRecord:
    attribute_name = raw["significant_attribute"]
    attribute = dataset.attribute_index(attribute_name)
    column = dataset.attributes[attribute]
    category_name = raw["chosen_category"]
    if category_name not in column.categories:
        raise InputError(f"attribute {attribute_name!r} has no category {category_name!r}")
    for name in raw.get("mis_scores", {}):
        dataset.attribute_index(name)
    return SplitRecord(
        step=raw["step"],
        significant_attribute=attribute,
        attribute_name=attribute_name,
        chosen_category=column.index_of(category_name),
        category_name=category_name,
        partition_entropies=raw["partition_entropies"],
        mis_scores=raw.get("mis_scores", {}),
        working_entropy=raw["working_entropy"],
        cluster_size=raw["cluster_size"],
        residual_size=raw["residual_size"],
    )


def load_result(path, dataset: CategoricalDataset) -> ClusteringResult:
    """Rebuild a result against the dataset it was computed on"""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"result file not found: {path}")
    with open(path) as f:
        raw = yaml.safe_load(f)
    if not isinstance(raw, dict) or raw.get("format") != DOCUMENT_FORMAT:
        raise InputError(f"{path} is not a miscluster result document")
    if raw.get("n_rows") != dataset.n_rows:
        raise InputError(
            f"result {path} was computed on {raw.get('n_rows')} rows, dataset {dataset.name!r} has {dataset.n_rows}"
        )
    if raw.get("attributes") is not None and list(raw["attributes"]) != dataset.attribute_names:
        raise InputError(f"result {path} names different attributes than dataset {dataset.name!r}")

    try:
        splits = [_split_record(dataset, s) for s in raw.get("splits") or []]
        clusters = [SampleSet(dataset, rows) for rows in raw.get("clusters") or []]
    except (KeyError, TypeError, ValidationError) as e:
        raise InputError(f"malformed result document {path}: {e}")

    return ClusteringResult(
        dataset=dataset,
        clusters=clusters,
        splits=splits,
        mode=raw.get("mode", "auto"),
        k=raw.get("k"),
        algorithm=raw.get("algorithm", "mis"),
        config=raw.get("config") or {},
        warnings=raw.get("warnings") or [],
        stop_reason=raw.get("stop_reason"),
        cost=raw.get("cost"),
    )
