"""Shared fixtures"""
import os
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pytest

from miscluster.dataset import AttributeColumn, CategoricalDataset
from miscluster.ingest import load_manifest


def build_dataset(rows: Sequence[Sequence[str]], names=None, labels: Optional[Sequence[str]] = None, name="test"):
    """Dataset from row tuples of raw tokens"""
    width = len(rows[0])
    names = names or [f"a{j + 1}" for j in range(width)]
    columns = tuple(AttributeColumn.encode(names[j], [r[j] for r in rows]) for j in range(width))
    if labels is None:
        return CategoricalDataset(name=name, attributes=columns)
    label_names = tuple(dict.fromkeys(labels))
    codes = [label_names.index(label) for label in labels]
    return CategoricalDataset(name=name, attributes=columns, labels=codes, label_names=label_names)


def random_dataset(rng: np.random.Generator, n_rows: int, n_attributes: int, max_categories: int = 3, name="random"):
    rows = []
    sizes = rng.integers(1, max_categories + 1, size=n_attributes)
    for _ in range(n_rows):
        rows.append(tuple(f"c{rng.integers(0, sizes[j])}" for j in range(n_attributes)))
    return build_dataset(rows, name=name)


@pytest.fixture
def make_dataset():
    return build_dataset


@pytest.fixture
def weather():
    """Small dataset with an obvious two-group structure"""
    rows = [
        ("sunny", "hot", "dry", "no"),
        ("sunny", "hot", "dry", "no"),
        ("sunny", "hot", "humid", "no"),
        ("sunny", "mild", "dry", "no"),
        ("rain", "cool", "humid", "yes"),
        ("rain", "cool", "humid", "yes"),
        ("rain", "mild", "humid", "yes"),
        ("rain", "cool", "dry", "yes"),
    ]
    labels = ["a", "a", "a", "a", "b", "b", "b", "b"]
    return build_dataset(rows, names=["outlook", "temp", "air", "play"], labels=labels, name="weather")


@pytest.fixture(scope="session")
def uci_manifest():
    """Bundled manifest; data directory from MISCLUSTER_DATA_DIR if set"""
    return load_manifest(data_dir=os.getenv("MISCLUSTER_DATA_DIR"))


@pytest.fixture(scope="session")
def uci_dataset(uci_manifest):
    cache = {}

    def load(name: str):
        entry = uci_manifest.entry(name)
        path: Path = uci_manifest.path_of(entry)
        if not path.is_file():
            pytest.skip(f"benchmark file {path} not present")
        if name not in cache:
            cache[name] = uci_manifest.load(entry)
        return cache[name]

    return load
