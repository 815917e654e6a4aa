"""Delimited-file loading, writing and manifest checks"""
import csv
import hashlib
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import pandas as pd
import yaml
from loguru import logger
from pydantic import BaseModel, Field

from miscluster.config import DEFAULT_MISSING_TOKENS, IngestOptions
from miscluster.dataset import MISSING_CATEGORY, AttributeColumn, CategoricalDataset
from miscluster.errors import EmptyInputError, InputError, RaggedRowError

DEFAULT_DATA_DIR = Path.home() / ".miscluster" / "datasets"
DROPPED_PLACEHOLDER = "-"


def _resolve_index(index: int, width: int, what: str) -> int:
    resolved = index if index >= 0 else width + index
    if not 0 <= resolved < width:
        raise InputError(f"{what} {index} is out of range for {width} columns")
    return resolved


def _column_layout(width: int, options: IngestOptions) -> Tuple[Optional[int], List[int]]:
    """Class column position and attribute positions for a row of `width` fields"""
    class_column = None
    if options.class_column is not None:
        class_column = _resolve_index(options.class_column, width, "class column")
    dropped = {_resolve_index(i, width, "dropped column") for i in options.drop_columns}
    if class_column is not None and class_column in dropped:
        raise InputError(f"class column {options.class_column} is also listed in drop_columns")
    positions = [i for i in range(width) if i != class_column and i not in dropped]
    if not positions:
        raise InputError("no attribute columns left after removing class and dropped columns")
    return class_column, positions


def _read_records(path: Path, options: IngestOptions) -> List[Tuple[int, List[str]]]:
    records = []
    with open(path, newline="", encoding=options.encoding) as f:
        reader = csv.reader(f, delimiter=options.delimiter)
        for fields in reader:
            if options.strip_whitespace:
                fields = [token.strip() for token in fields]
            records.append((reader.line_num, fields))

    def blank(fields: List[str]) -> bool:
        return not fields or (len(fields) == 1 and not fields[0].strip())

    while records and blank(records[-1][1]):
        records.pop()
    if any(len(fields) > 1 for _, fields in records):
        return [(line, fields) for line, fields in records if not blank(fields)]
    # one field per row: a blank line is a row whose only value is missing
    return [(line, fields or [""]) for line, fields in records]


def load_delimited(path, options: Optional[IngestOptions] = None, name: Optional[str] = None) -> CategoricalDataset:
    """
    Load a delimited categorical file.

    Every raw missing token becomes the single reserved category "?". Other
    tokens become categories in first-appearance order. The class column, if
    any, is split off as labels.
    """
    options = options or IngestOptions()
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")

    records = _read_records(path, options)
    if not records:
        raise EmptyInputError(f"{path} contains no data")

    width = len(records[0][1])
    for line, fields in records:
        if len(fields) != width:
            raise RaggedRowError(path, line, width, len(fields))

    header = None
    if options.header:
        header = records[0][1]
        records = records[1:]
        if not records:
            raise EmptyInputError(f"{path} contains a header but no data rows")

    class_column, positions = _column_layout(width, options)

    if header is not None:
        names = [header[i] for i in positions]
    elif options.attribute_names is not None:
        if len(options.attribute_names) != len(positions):
            raise InputError(
                f"{len(options.attribute_names)} attribute names given for {len(positions)} attribute columns"
            )
        names = list(options.attribute_names)
    else:
        names = [f"a{j + 1}" for j in range(len(positions))]

    missing = set(options.missing_tokens) | {MISSING_CATEGORY}
    attributes = []
    for name_, position in zip(names, positions):
        tokens = [
            MISSING_CATEGORY if fields[position] in missing else fields[position]
            for _, fields in records
        ]
        attributes.append(AttributeColumn.encode(name_, tokens))

    labels, label_names = None, ()
    if class_column is not None:
        codes, uniques = pd.factorize(
            pd.Series([fields[class_column] for _, fields in records], dtype=object), sort=False
        )
        labels, label_names = codes, tuple(str(u) for u in uniques)

    dataset = CategoricalDataset(
        name=name or path.stem,
        attributes=tuple(attributes),
        labels=labels,
        label_names=label_names,
    )
    logger.info(
        "dataset loaded",
        dataset=dataset.name,
        path=str(path),
        rows=dataset.n_rows,
        attributes=dataset.n_attributes,
        classes=dataset.n_classes,
    )
    return dataset


def write_delimited(dataset: CategoricalDataset, path, options: Optional[IngestOptions] = None) -> Path:
    """
    Write a dataset so that load_delimited(path, options) reproduces it.

    Labels go back to the class column; dropped columns are written as a
    placeholder token.
    """
    options = options or IngestOptions()
    path = Path(path)
    has_class = options.class_column is not None
    if has_class and dataset.labels is None:
        raise InputError(f"options name a class column but dataset {dataset.name!r} has no labels")

    width = dataset.n_attributes + len(options.drop_columns) + (1 if has_class else 0)
    class_column, positions = _column_layout(width, options)
    if len(positions) != dataset.n_attributes:
        raise InputError("drop_columns must list distinct columns")

    label_tokens = dataset.class_labels() if has_class else None
    columns = [attribute.tokens() for attribute in dataset.attributes]

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding=options.encoding) as f:
        writer = csv.writer(f, delimiter=options.delimiter, lineterminator="\n")
        if options.header:
            row = ["dropped"] * width
            for name, position in zip(dataset.attribute_names, positions):
                row[position] = name
            if class_column is not None:
                row[class_column] = "class"
            writer.writerow(row)
        for r in range(dataset.n_rows):
            row = [DROPPED_PLACEHOLDER] * width
            for column, position in zip(columns, positions):
                row[position] = column[r]
            if class_column is not None:
                row[class_column] = label_tokens[r]
            writer.writerow(row)
    return path


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class ManifestEntry(BaseModel):
    """One benchmark dataset: where it lives, how to read it, what it should contain"""

    name: str
    file: str
    delimiter: str = ","
    header: bool = False
    class_column: Optional[int] = None
    drop_columns: List[int] = Field(default_factory=list)
    missing_tokens: List[str] = Field(default_factory=lambda: list(DEFAULT_MISSING_TOKENS))
    attribute_names: Optional[List[str]] = None
    n_rows: Optional[int] = None
    n_attributes: Optional[int] = None
    n_classes: Optional[int] = None
    url: Optional[str] = None
    optional: bool = False

    def ingest_options(self) -> IngestOptions:
        return IngestOptions(
            delimiter=self.delimiter,
            header=self.header,
            class_column=self.class_column,
            drop_columns=self.drop_columns,
            missing_tokens=self.missing_tokens,
            attribute_names=self.attribute_names,
        )


class Manifest(BaseModel):
    data_dir: Path = DEFAULT_DATA_DIR
    datasets: List[ManifestEntry] = Field(default_factory=list)

    def entry(self, name: str) -> ManifestEntry:
        for entry in self.datasets:
            if entry.name == name:
                return entry
        raise InputError(f"manifest has no dataset named {name!r}")

    def path_of(self, entry: ManifestEntry) -> Path:
        return self.data_dir / entry.file

    def load(self, entry: ManifestEntry) -> CategoricalDataset:
        return load_delimited(self.path_of(entry), entry.ingest_options(), name=entry.name)


def default_manifest_path() -> Path:
    return Path(__file__).parent / "data" / "manifest.yaml"


def load_manifest(path=None, data_dir=None) -> Manifest:
    """Read a manifest; a relative data_dir is resolved against the manifest's directory"""
    path = Path(path) if path is not None else default_manifest_path()
    if not path.is_file():
        raise InputError(f"manifest not found: {path}")
    with open(path) as f:
        raw = yaml.safe_load(f) or {}
    manifest = Manifest.model_validate(raw)
    if data_dir is not None:
        manifest.data_dir = Path(data_dir)
    elif "data_dir" in raw:
        resolved = Path(raw["data_dir"]).expanduser()
        manifest.data_dir = resolved if resolved.is_absolute() else path.parent / resolved
    return manifest


class Mismatch(BaseModel):
    field: str
    expected: Any
    actual: Any


class CheckReport(BaseModel):
    dataset: str
    passed: bool
    mismatches: List[Mismatch] = Field(default_factory=list)

    def describe(self) -> str:
        if self.passed:
            return f"{self.dataset}: ok"
        problems = ", ".join(f"{m.field} expected {m.expected} got {m.actual}" for m in self.mismatches)
        return f"{self.dataset}: {problems}"


def dataset_manifest_check(dataset: CategoricalDataset, manifest_entry: ManifestEntry) -> CheckReport:
    """Compare a loaded dataset against the counts its manifest entry declares"""
    declared: Sequence[Tuple[str, Optional[int], Optional[int]]] = (
        ("n_rows", manifest_entry.n_rows, dataset.n_rows),
        ("n_attributes", manifest_entry.n_attributes, dataset.n_attributes),
        ("n_classes", manifest_entry.n_classes, dataset.n_classes),
    )
    mismatches = [
        Mismatch(field=field, expected=expected, actual=actual)
        for field, expected, actual in declared
        if expected is not None and expected != actual
    ]
    return CheckReport(dataset=manifest_entry.name, passed=not mismatches, mismatches=mismatches)
