"""Cluster profiles: per-attribute KL divergence against the whole dataset"""
import json
from typing import Dict, List, Optional, Sequence, Union

from joblib import Parallel, delayed
from pydantic import BaseModel

from miscluster.config import ReportOptions
from miscluster.dataset import CategoricalDataset, SampleSet
from miscluster.engine import ClusteringResult
from miscluster.errors import InputError
from miscluster.info import CategoryDistribution, category_distribution, kl_divergence


class CategoryDelta(BaseModel):
    category: str
    q: float
    p: float
    delta: float


class AttributeDivergence(BaseModel):
    attribute: str
    divergence: float
    categories: List[CategoryDelta]


class ClusterSummary(BaseModel):
    cluster_index: int
    size: int
    size_fraction: float
    # sorted by descending divergence, then attribute name
    attributes: List[AttributeDivergence]

    @property
    def attribute_divergences(self) -> Dict[str, float]:
        return {a.attribute: a.divergence for a in self.attributes}

    @property
    def category_deltas(self) -> Dict[str, List[CategoryDelta]]:
        return {a.attribute: a.categories for a in self.attributes}

    def top_attribute(self) -> str:
        return self.attributes[0].attribute


def global_distributions(dataset: CategoricalDataset) -> List[CategoryDistribution]:
    everything = SampleSet.full(dataset)
    return [category_distribution(everything, j) for j in range(dataset.n_attributes)]


def _as_sample_set(dataset: CategoricalDataset, cluster: Union[SampleSet, Sequence[int]]) -> SampleSet:
    if isinstance(cluster, SampleSet):
        if cluster.dataset is not dataset and cluster.dataset.n_rows != dataset.n_rows:
            raise InputError("cluster belongs to a different dataset")
        cluster = cluster.rows
    samples = SampleSet(dataset, cluster)
    if samples.is_empty:
        raise InputError("cannot summarize an empty cluster")
    return samples


def summarize_cluster(
    dataset: CategoricalDataset,
    cluster: Union[SampleSet, Sequence[int]],
    cluster_index: int = 0,
    global_dists: Optional[List[CategoryDistribution]] = None,
) -> ClusterSummary:
    """KL divergence of the cluster's category distribution from the global one, per attribute"""
    samples = _as_sample_set(dataset, cluster)
    global_dists = global_dists or global_distributions(dataset)

    attributes = []
    for j, column in enumerate(dataset.attributes):
        q = category_distribution(samples, j)
        p = global_dists[j]
        deltas = [
            CategoryDelta(category=c, q=float(qx), p=float(px), delta=float(qx - px))
            for c, qx, px in zip(column.categories, q.probabilities, p.probabilities)
        ]
        attributes.append(AttributeDivergence(attribute=column.name, divergence=kl_divergence(q, p), categories=deltas))
    attributes.sort(key=lambda a: (-a.divergence, a.attribute))

    return ClusterSummary(
        cluster_index=cluster_index,
        size=len(samples),
        size_fraction=len(samples) / dataset.n_rows,
        attributes=attributes,
    )


def summarize_result(result: ClusteringResult, n_jobs: int = 1) -> List[ClusterSummary]:
    dataset = result.dataset
    global_dists = global_distributions(dataset)
    return Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(summarize_cluster)(dataset, members, index, global_dists)
        for index, members in enumerate(result.clusters)
    )


def format_share(q: float, p: float) -> str:
    """'69.0% (base 12.0%)'"""
    return f"{q * 100:.1f}% (base {p * 100:.1f}%)"


def _six(value: float) -> float:
    return round(value, 6) + 0.0


class RenderedReport(BaseModel):
    text: str
    records: List[dict]

    def jsonl(self) -> str:
        return "".join(json.dumps(record) + "\n" for record in self.records)


def render_report(summaries: List[ClusterSummary], options: Optional[ReportOptions] = None) -> RenderedReport:
    """
    Plain-text profile (top-N attributes per cluster) plus one machine-readable
    record per (cluster, attribute, category) covering every attribute.
    """
    options = options or ReportOptions()
    lines: List[str] = []
    records: List[dict] = []

    for summary in summaries:
        lines.append(
            f"Cluster {summary.cluster_index}: {summary.size} rows ({summary.size_fraction * 100:.1f}% of all rows)"
        )
        for attribute in summary.attributes[: options.top_n]:
            lines.append(f"  {attribute.attribute}  D={attribute.divergence:.6f} bits")
            ranked = sorted(
                enumerate(attribute.categories), key=lambda item: (-abs(item[1].delta), item[0])
            )
            if options.max_categories is not None:
                ranked = ranked[: options.max_categories]
            for _, delta in ranked:
                lines.append(
                    f"    {delta.category}: {format_share(delta.q, delta.p)}  {delta.delta * 100:+.1f} pts"
                )
        lines.append("")

        for attribute in summary.attributes:
            for delta in attribute.categories:
                records.append(
                    {
                        "cluster": summary.cluster_index,
                        "attribute": attribute.attribute,
                        "category": delta.category,
                        "q": _six(delta.q),
                        "p": _six(delta.p),
                        "delta": _six(delta.delta),
                        "divergence": _six(attribute.divergence),
                    }
                )

    return RenderedReport(text="\n".join(lines), records=records)
