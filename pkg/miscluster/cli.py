"""CLI entry point"""
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import click
import numpy as np
import yaml
from loguru import logger
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from miscluster import __version__, info
from miscluster.config import Config, RunConfig
from miscluster.dataset import SampleSet
from miscluster.errors import AlgorithmError, InputError, MISClusterError
from miscluster.logs import configure_logging

console = Console(stderr=True)
stdout = Console()

NO_COLUMN = "none"
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


class ColumnType(click.ParamType):
    """A column index, or 'none'"""

    name = "N|none"

    def convert(self, value, param, ctx):
        if isinstance(value, int) or value == NO_COLUMN:
            return value
        if str(value).lower() == NO_COLUMN:
            return NO_COLUMN
        try:
            return int(value)
        except ValueError:
            self.fail(f"{value!r} is neither a column index nor '{NO_COLUMN}'", param, ctx)


class NameListType(click.ParamType):
    """Comma-separated names; an empty string is the empty list"""

    name = "LIST"

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        return [part.strip() for part in str(value).split(",") if part.strip()]


def ingest_options(f):
    """Options describing how the input file is read"""
    options = [
        click.option("--delimiter", help="Field delimiter (default ',')"),
        click.option("--header/--no-header", default=None, help="First line holds attribute names"),
        click.option("--class-col", type=ColumnType(), help="Column holding class labels, or 'none'"),
        click.option("--drop-col", type=int, multiple=True, help="Column to discard (repeatable)"),
        click.option("--missing", multiple=True, help="Raw token read as missing (repeatable; '?' always is)"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _ingest_values(config: Config, delimiter, header, class_col, drop_col, missing) -> None:
    _apply(
        config,
        {
            "ingest.delimiter": delimiter,
            "ingest.header": header,
            "ingest.drop_columns": drop_col,
            "ingest.missing_tokens": missing,
        },
    )
    if class_col is not None:
        config.set("ingest.class_column", None if class_col == NO_COLUMN else class_col)


def _apply(config: Config, values: Dict[str, Any]) -> None:
    for key, value in values.items():
        if value is None or value == ():
            continue
        if isinstance(value, Path):
            value = str(value)
        config.set(key, list(value) if isinstance(value, tuple) else value)


def _dispatch(ctx: click.Context, command: str, values: Dict[str, Any]):
    config: Config = ctx.obj["config"]
    config.set("command", command)
    _apply(config, values)
    try:
        run_config = config.to_run_config()
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise click.UsageError(f"invalid {command} options: {problems}", ctx=ctx)
    return ctx.obj["handler"](run_config)


@click.group()
@click.version_option(__version__, prog_name="miscluster")
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="YAML file with option values; flags override it",
)
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), help="Log level on stderr")
@click.pass_context
def cli(ctx, config_path, log_level):
    """miscluster - Mutual Information Scoring clustering for categorical data"""
    ctx.ensure_object(dict)
    try:
        config = Config.load(config_path) if config_path else Config()
    except (OSError, ValueError, yaml.YAMLError) as e:
        raise click.BadParameter(f"unreadable config file: {e}", ctx=ctx, param_hint="--config")
    if log_level:
        config.set("log_level", log_level.upper())
    configure_logging(config.get("log_level", "WARNING"))
    ctx.obj["config"] = config
    ctx.obj.setdefault("handler", run)


@cli.command()
@click.option("--input", "input_", type=click.Path(dir_okay=False, path_type=Path), help="Delimited data file")
@ingest_options
@click.option("--k", type=click.IntRange(min=2), help="Extract exactly K clusters (fixed-k mode)")
@click.option("--auto", is_flag=True, default=None, help="Let the stopping rule decide the cluster count")
@click.option("--theta", type=float, help="Auto mode: stop when min/whole partition entropy exceeds this")
@click.option("--min-cluster-fraction", type=float, help="Auto mode: stop when the residual falls below this share")
@click.option("--jobs", type=int, help="Parallel workers (default: MISCLUSTER_JOBS or all cores)")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Result document (default: stdout)")
@click.option("--explain", is_flag=True, default=None, help="Show MIS and summed MI per split on stderr")
@click.pass_context
def cluster(ctx, input_, delimiter, header, class_col, drop_col, missing, k, auto, theta, min_cluster_fraction, jobs, out, explain):
    """Cluster a categorical dataset"""
    config: Config = ctx.obj["config"]
    if k is not None and auto:
        raise click.UsageError("--k and --auto are mutually exclusive", ctx=ctx)
    if k is not None:
        config.set("engine.mode", "fixed-k")
        config.set("engine.k", k)
    elif auto:
        config.set("engine.mode", "auto")
        config.set("engine.k", None)
    _ingest_values(config, delimiter, header, class_col, drop_col, missing)
    return _dispatch(
        ctx,
        "cluster",
        {
            "input": input_,
            "engine.auto_stop_ratio": theta,
            "engine.min_cluster_fraction": min_cluster_fraction,
            "jobs": jobs,
            "out": out,
            "explain": explain,
        },
    )


@cli.command()
@click.option("--input", "input_", type=click.Path(dir_okay=False, path_type=Path), help="Delimited data file")
@ingest_options
@click.option("--result", type=click.Path(dir_okay=False, path_type=Path), help="Result document from 'cluster'")
@click.option("--top", type=click.IntRange(min=1), help="Attributes shown per cluster (default 5)")
@click.option("--max-categories", type=click.IntRange(min=1), help="Categories shown per attribute")
@click.option("--format", "format_", type=click.Choice(["text", "jsonl"]), help="Report format")
@click.option("--jobs", type=int, help="Parallel workers (default: MISCLUSTER_JOBS or all cores)")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Report file (default: stdout)")
@click.pass_context
def summarize(ctx, input_, delimiter, header, class_col, drop_col, missing, result, top, max_categories, format_, jobs, out):
    """Profile each cluster against the whole dataset"""
    _ingest_values(ctx.obj["config"], delimiter, header, class_col, drop_col, missing)
    return _dispatch(
        ctx,
        "summarize",
        {
            "input": input_,
            "result": result,
            "report.top_n": top,
            "report.max_categories": max_categories,
            "report.format": format_,
            "jobs": jobs,
            "out": out,
        },
    )


@cli.command()
@click.option("--result", type=click.Path(dir_okay=False, path_type=Path), help="Result document from 'cluster'")
@click.option("--labels-from", type=click.Path(dir_okay=False, path_type=Path), help="Data file holding the class column")
@ingest_options
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Evaluation file (default: stdout)")
@click.pass_context
def evaluate(ctx, result, labels_from, delimiter, header, class_col, drop_col, missing, out):
    """Score a clustering by purity against class labels"""
    _ingest_values(ctx.obj["config"], delimiter, header, class_col, drop_col, missing)
    return _dispatch(ctx, "evaluate", {"result": result, "labels_from": labels_from, "out": out})


@cli.command()
@click.option("--manifest", type=click.Path(dir_okay=False, path_type=Path), help="Dataset manifest (default: bundled)")
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), help="Directory holding the dataset files")
@click.option("--dataset", help="Run only this manifest dataset")
@click.option("--algorithms", type=NameListType(), help="Comma-separated: mis, mis-auto, kmodes (default: all)")
@click.option("--theta", type=float, help="Auto mode stopping ratio")
@click.option("--seed", type=int, help="k-modes seed")
@click.option("--n-init", type=click.IntRange(min=1), help="k-modes restarts (default 16)")
@click.option("--jobs", type=int, help="Parallel benchmark rows (default: MISCLUSTER_JOBS or all cores)")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Benchmark report file (YAML)")
@click.pass_context
def bench(ctx, manifest, data_dir, dataset, algorithms, theta, seed, n_init, jobs, out):
    """Reproduce the purity table on the manifest datasets"""
    config: Config = ctx.obj["config"]
    if algorithms is not None:
        config.set("algorithms", algorithms)
    return _dispatch(
        ctx,
        "bench",
        {
            "manifest": manifest,
            "data_dir": data_dir,
            "dataset": dataset,
            "engine.auto_stop_ratio": theta,
            "kmodes.seed": seed,
            "kmodes.n_init": n_init,
            "jobs": jobs,
            "out": out,
        },
    )


@cli.command()
@click.option("--spec", type=click.Path(dir_okay=False, path_type=Path), help="Planted-missingness spec (default: built-in example)")
@click.option("--seed", type=int, help="Random seed (default 0)")
@click.option("--delimiter", help="Field delimiter of the written file")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Data file to write")
@click.pass_context
def synth(ctx, spec, seed, delimiter, out):
    """Generate a dataset with planted non-random missingness (written with a header line)"""
    return _dispatch(
        ctx, "synth", {"spec": spec, "seed": seed, "ingest.delimiter": delimiter, "out": out}
    )


@cli.command()
@click.option("--manifest", type=click.Path(dir_okay=False, path_type=Path), help="Dataset manifest (default: bundled)")
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), help="Download directory")
@click.option("--dataset", help="Fetch only this manifest dataset")
@click.pass_context
def fetch(ctx, manifest, data_dir, dataset):
    """Download the benchmark files listed in a manifest"""
    return _dispatch(ctx, "fetch", {"manifest": manifest, "data_dir": data_dir, "dataset": dataset})


def _require(run_config: RunConfig, *fields: str) -> None:
    """Every named path is set and exists, checked before any work starts"""
    for name in fields:
        flag = "--" + name.replace("_", "-")
        path = getattr(run_config, name)
        if path is None:
            raise click.UsageError(f"Missing option '{flag}'")
        if not Path(path).is_file():
            raise InputError(f"{flag}: file not found: {path}")


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        click.echo(text, nl=not text.endswith("\n"))
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text if text.endswith("\n") else text + "\n")
    console.print(f"[green]✓[/green] Written to {out}")


def _explain(result, n_jobs: int) -> None:
    dataset = result.dataset
    active = list(range(dataset.n_attributes))
    for step, split in enumerate(result.splits):
        working_rows = np.sort(np.concatenate([c.rows for c in result.clusters[step:]]))
        working = SampleSet(dataset, working_rows)
        summed = info.summed_mutual_information(working, active, n_jobs=n_jobs)
        table = Table(title=f"Step {step}: {split.attribute_name} = {split.category_name}")
        table.add_column("Attribute")
        table.add_column("MIS", justify="right")
        table.add_column("Summed MI", justify="right")
        for a in active:
            name = dataset.attributes[a].name
            score = split.mis_scores.get(name)
            table.add_row(name, "constant" if score is None else f"{score:.6f}", f"{summed[a]:.6f}")
        console.print(table)


def run_cluster(run_config: RunConfig) -> int:
    from miscluster.engine import cluster as mis_cluster
    from miscluster.ingest import load_delimited
    from miscluster.results import result_document, save_result

    _require(run_config, "input")
    dataset = load_delimited(run_config.input, run_config.ingest)
    result = mis_cluster(dataset, run_config.engine_config())

    if run_config.explain:
        _explain(result, run_config.n_jobs)
    if run_config.out is not None:
        save_result(result, run_config.out)
        console.print(f"[green]✓[/green] {result.n_clusters} clusters ({result.stop_reason}) written to {run_config.out}")
    else:
        _emit(yaml.safe_dump(result_document(result), default_flow_style=None, sort_keys=False, width=120), None)

    for warning in result.warnings:
        console.print(f"[yellow]Warning:[/yellow] {warning}")
    return 2 if result.shortfall else 0


def run_summarize(run_config: RunConfig) -> int:
    from miscluster.ingest import load_delimited
    from miscluster.results import load_result
    from miscluster.summarize import render_report, summarize_result

    _require(run_config, "input", "result")
    dataset = load_delimited(run_config.input, run_config.ingest)
    result = load_result(run_config.result, dataset)
    report = render_report(summarize_result(result, n_jobs=run_config.n_jobs), run_config.report)
    _emit(report.text if run_config.report.format == "text" else report.jsonl(), run_config.out)
    return 0


def run_evaluate(run_config: RunConfig) -> int:
    from miscluster.evaluation import cluster_composition, majority_floor, purity
    from miscluster.ingest import load_delimited
    from miscluster.results import load_result

    _require(run_config, "result", "labels_from")
    dataset = load_delimited(run_config.labels_from, run_config.ingest)
    if dataset.labels is None:
        raise InputError("--class-col must name the class column of the --labels-from file")
    result = load_result(run_config.result, dataset)
    labels = dataset.class_labels()
    document = {
        "dataset": dataset.name,
        "clusters": result.n_clusters,
        "purity": round(purity(result, labels), 6),
        "majority_floor": round(majority_floor(labels), 6),
        "composition": [c.model_dump() for c in cluster_composition(result, labels)],
    }
    _emit(yaml.safe_dump(document, sort_keys=False), run_config.out)
    return 0


def run_bench(run_config: RunConfig) -> int:
    from miscluster.benchmark import run_benchmark
    from miscluster.ingest import load_manifest

    manifest = load_manifest(run_config.manifest, run_config.data_dir)
    report = run_benchmark(
        manifest,
        run_config.algorithms,
        out=run_config.out,
        n_jobs=run_config.n_jobs,
        engine=run_config.engine,
        kmodes=run_config.kmodes,
        datasets=[run_config.dataset] if run_config.dataset else None,
    )
    report.render(stdout)
    if run_config.out is not None:
        console.print(f"[green]✓[/green] Report saved to {run_config.out}")
    return 0 if report.rows_failed == 0 else 1


def run_synth(run_config: RunConfig) -> int:
    from miscluster.ingest import write_delimited
    from miscluster.synth import PlantedMissingnessSpec, example_spec, synth_missingness

    if run_config.spec is not None:
        _require(run_config, "spec")
    if run_config.out is None:
        raise click.UsageError("Missing option '--out'")
    spec = PlantedMissingnessSpec.from_yaml(run_config.spec) if run_config.spec else example_spec()
    dataset = synth_missingness(spec, run_config.seed)
    write_delimited(dataset, run_config.out, run_config.ingest.model_copy(update={"class_column": None, "header": True}))
    console.print(f"[green]✓[/green] {dataset.n_rows} rows written to {run_config.out}")
    return 0


def run_fetch(run_config: RunConfig) -> int:
    from miscluster.fetch import fetch_datasets
    from miscluster.ingest import load_manifest

    manifest = load_manifest(run_config.manifest, run_config.data_dir)
    outcomes = fetch_datasets(manifest, [run_config.dataset] if run_config.dataset else None)
    for outcome in outcomes:
        icon = "[red]✗[/red]" if outcome.status == "failed" else "[green]✓[/green]"
        console.print(f"{icon} {outcome.dataset}: {outcome.status} {outcome.error or outcome.path}")
    return 1 if any(o.status == "failed" for o in outcomes) else 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "cluster": run_cluster,
    "summarize": run_summarize,
    "evaluate": run_evaluate,
    "bench": run_bench,
    "synth": run_synth,
    "fetch": run_fetch,
}


def run(run_config: RunConfig) -> int:
    logger.debug("command started", command=run_config.command)
    return COMMANDS[run_config.command](run_config)


def parse_args(argv: Sequence[str]) -> Optional[RunConfig]:
    """
    Parse a command line into the merged RunConfig without running anything.

    Returns None when --help or --version short-circuited. Usage problems
    raise click.UsageError.
    """
    captured: List[RunConfig] = []
    cli.main(args=list(argv), prog_name="miscluster", standalone_mode=False, obj={"handler": captured.append})
    return captured[0] if captured else None


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI; returns 0 on success, 1 on input errors, 2 on algorithm errors"""
    try:
        code = cli.main(args=None if argv is None else list(argv), prog_name="miscluster", standalone_mode=False)
    except click.exceptions.Abort:
        console.print("Aborted.")
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except AlgorithmError as e:
        console.print(f"[red]Error:[/red] {e}")
        return 2
    except (MISClusterError, ValueError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
