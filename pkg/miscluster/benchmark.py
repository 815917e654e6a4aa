"""
Benchmark harness.

Runs each selected algorithm on each manifest dataset with k set to the
dataset's class count, scores the clustering by purity and lays the result
next to the published purity values.
"""
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import yaml
from joblib import Parallel, delayed
from loguru import logger
from pydantic import BaseModel, Field
from rich.console import Console
from rich.table import Table

from miscluster.algorithms.factory import build_clusterer
from miscluster.config import DEFAULT_ALGORITHMS, EngineConfig, KModesOptions
from miscluster.dataset import CategoricalDataset
from miscluster.evaluation import purity
from miscluster.ingest import Manifest, ManifestEntry, dataset_manifest_check, file_sha256, load_manifest
from miscluster.results import result_document

DATASETS = ("zoo", "vote", "cancer", "mushroom", "balance", "chess")

# Published purity per algorithm and dataset; cited for comparison, not recomputed
PUBLISHED_PURITY: Dict[str, Dict[str, float]] = {
    "MGR": dict(zip(DATASETS, (0.930, 0.827, 0.864, 0.677, 0.635, 0.533))),
    "MMR": dict(zip(DATASETS, (0.911, 0.687, 0.669, 0.518, 0.635, 0.523))),
    "K-MODES": dict(zip(DATASETS, (0.860, 0.852, 0.651, 0.560, 0.587, 0.503))),
    "k-ANMI": dict(zip(DATASETS, (0.733, 0.869, 0.978, 0.587, 0.506, 0.547))),
    "G-ANMI": dict(zip(DATASETS, (0.874, 0.871, 0.966, 0.547, 0.518, 0.543))),
    "COOLCAT": dict(zip(DATASETS, (0.785, 0.839, 0.650, 0.531, 0.506, 0.533))),
    "MIS": dict(zip(DATASETS, (0.891, 0.828, 0.882, 0.743, 0.635, 0.533))),
    "MIS (auto)": dict(zip(DATASETS, (0.891, 0.949, 0.927, 0.828, 0.635, 0.558))),
}

PUBLISHED_LABEL = {"mis": "MIS", "mis-auto": "MIS (auto)", "kmodes": "K-MODES"}


def published_purity(algorithm: str, dataset: str) -> Optional[float]:
    label = PUBLISHED_LABEL.get(algorithm, algorithm)
    return PUBLISHED_PURITY.get(label, {}).get(dataset.lower())


class BenchmarkRow(BaseModel):
    """One (dataset, algorithm) run"""

    dataset: str
    algorithm: str
    mode: Optional[str] = None
    k: Optional[int] = None
    purity: Optional[float] = Field(None, ge=0.0, le=1.0)
    n_clusters: Optional[int] = Field(None, ge=1)
    seconds: Optional[float] = None
    published: Optional[float] = None
    error: Optional[str] = None
    warnings: List[str] = Field(default_factory=list)
    # per-step split records of MIS runs, kept for diagnosing purity gaps
    splits: List[Dict[str, Any]] = Field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.error is None

    @property
    def gap(self) -> Optional[float]:
        if self.purity is None or self.published is None:
            return None
        return self.purity - self.published


class BenchmarkReport(BaseModel):
    started_at: datetime
    finished_at: datetime
    algorithms: List[str]
    rows: List[BenchmarkRow] = Field(default_factory=list)
    # dataset name -> sha256 of the file it was loaded from
    manifest_hashes: Dict[str, str] = Field(default_factory=dict)
    checks: Dict[str, str] = Field(default_factory=dict)

    @property
    def rows_failed(self) -> int:
        return sum(1 for r in self.rows if not r.success)

    @property
    def status(self) -> str:
        if not self.rows or not self.rows_failed:
            return "completed"
        return "failed" if self.rows_failed == len(self.rows) else "partial"

    def purity_table(self) -> Dict[str, Dict[str, Optional[float]]]:
        table: Dict[str, Dict[str, Optional[float]]] = {}
        for row in self.rows:
            table.setdefault(row.dataset, {})[row.algorithm] = row.purity
        return table

    def row(self, dataset: str, algorithm: str) -> BenchmarkRow:
        for row in self.rows:
            if row.dataset == dataset and row.algorithm == algorithm:
                return row
        raise KeyError((dataset, algorithm))

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        document = self.model_dump(mode="json")
        document["status"] = self.status
        document["published"] = PUBLISHED_PURITY
        with open(path, "w") as f:
            yaml.safe_dump(document, f, default_flow_style=False, sort_keys=False)
        return path

    def render(self, console: Console) -> None:
        table = Table(title="Purity")
        for column in ("Dataset", "Algorithm", "Mode", "k", "Clusters", "Purity", "Published", "Gap", "Seconds"):
            table.add_column(column, justify="left" if column in ("Dataset", "Algorithm", "Mode") else "right")
        for row in self.rows:
            if not row.success:
                table.add_row(row.dataset, row.algorithm, "", "", "", f"[red]{row.error}[/red]", "", "", "")
                continue
            table.add_row(
                row.dataset,
                row.algorithm,
                row.mode or "",
                str(row.k),
                str(row.n_clusters),
                f"{row.purity:.3f}",
                "" if row.published is None else f"{row.published:.3f}",
                "" if row.gap is None else f"{row.gap:+.3f}",
                f"{row.seconds:.2f}",
            )
        console.print(table)

        reference = Table(title="Published purity")
        reference.add_column("Algorithm")
        for name in DATASETS:
            reference.add_column(name, justify="right")
        for label, values in PUBLISHED_PURITY.items():
            reference.add_row(label, *(f"{values[name]:.3f}" for name in DATASETS))
        console.print(reference)


def _run_row(
    dataset: CategoricalDataset,
    algorithm: str,
    engine: EngineConfig,
    kmodes: KModesOptions,
) -> BenchmarkRow:
    row = BenchmarkRow(
        dataset=dataset.name,
        algorithm=algorithm,
        k=dataset.n_classes,
        published=published_purity(algorithm, dataset.name),
    )
    try:
        clusterer = build_clusterer(algorithm, dataset.n_classes, engine=engine, kmodes=kmodes)
        started = time.perf_counter()
        result = clusterer.fit(dataset)
        row.seconds = time.perf_counter() - started
        row.mode = clusterer.mode
        row.purity = purity(result, dataset.labels)
        row.n_clusters = result.n_clusters
        row.warnings = list(result.warnings)
        row.splits = result_document(result)["splits"]
    except Exception as e:
        # Record failure but continue with the next row
        row.error = str(e)
        logger.warning("benchmark row failed", dataset=dataset.name, algorithm=algorithm, error=str(e))
    else:
        logger.info(
            "benchmark row finished",
            dataset=dataset.name,
            algorithm=algorithm,
            purity=round(row.purity, 6),
            clusters=row.n_clusters,
            seconds=round(row.seconds, 3),
        )
    return row


def _prepare(
    manifest: Manifest, entry: ManifestEntry, hashes: Dict[str, str], checks: Dict[str, str]
) -> Tuple[Optional[CategoricalDataset], Optional[str]]:
    path = manifest.path_of(entry)
    if not path.is_file():
        return None, f"missing dataset file {path}"
    hashes[entry.name] = file_sha256(path)
    try:
        dataset = manifest.load(entry)
    except Exception as e:
        return None, str(e)
    check = dataset_manifest_check(dataset, entry)
    checks[entry.name] = check.describe()
    if not check.passed:
        return None, f"manifest check failed: {check.describe()}"
    if dataset.labels is None:
        return None, f"dataset {entry.name!r} has no class column"
    return dataset, None


def run_benchmark(
    manifest: Union[Manifest, str, Path, None] = None,
    algorithms: Sequence[str] = DEFAULT_ALGORITHMS,
    out=None,
    n_jobs: int = 1,
    engine: Optional[EngineConfig] = None,
    kmodes: Optional[KModesOptions] = None,
    datasets: Optional[Sequence[str]] = None,
) -> BenchmarkReport:
    """
    Run every (dataset, algorithm) pair of the manifest and gather the rows in
    manifest order. A dataset that is missing or fails its manifest check
    produces error rows and the run continues. Optional entries whose file is
    absent are skipped.
    """
    if not isinstance(manifest, Manifest):
        manifest = load_manifest(manifest)
    algorithms = list(algorithms)
    engine = engine or EngineConfig()
    kmodes = kmodes or KModesOptions()
    started_at = datetime.now()

    hashes: Dict[str, str] = {}
    checks: Dict[str, str] = {}
    tasks = []
    failed: List[BenchmarkRow] = []
    if algorithms:
        for entry in manifest.datasets:
            if datasets is not None and entry.name not in datasets:
                continue
            if entry.optional and not manifest.path_of(entry).is_file():
                logger.info("optional dataset skipped", dataset=entry.name)
                continue
            dataset, error = _prepare(manifest, entry, hashes, checks)
            for algorithm in algorithms:
                if dataset is None:
                    tasks.append(None)
                    failed.append(
                        BenchmarkRow(
                            dataset=entry.name,
                            algorithm=algorithm,
                            published=published_purity(algorithm, entry.name),
                            error=error,
                        )
                    )
                else:
                    tasks.append((dataset, algorithm))

    runnable = [t for t in tasks if t is not None]
    computed = iter(
        Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_run_row)(dataset, algorithm, engine, kmodes) for dataset, algorithm in runnable
        )
    )
    pending_failures = iter(failed)
    rows = [next(computed) if t is not None else next(pending_failures) for t in tasks]

    report = BenchmarkReport(
        started_at=started_at,
        finished_at=datetime.now(),
        algorithms=algorithms,
        rows=rows,
        manifest_hashes=hashes,
        checks=checks,
    )
    logger.info("benchmark finished", rows=len(rows), failed=report.rows_failed, status=report.status)
    if out is not None:
        report.save(out)
    return report
