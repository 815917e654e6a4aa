"""Synthetic datasets with planted, non-random missingness"""
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import yaml
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from miscluster.dataset import MISSING_CATEGORY, AttributeColumn, CategoricalDataset
from miscluster.errors import InputError

_SUM_TOLERANCE = 1e-9


def _check_probability(value: float, what: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{what} must lie in [0, 1], got {value}")


class AttributeSpec(BaseModel):
    """Base category distribution of one attribute"""

    name: str
    categories: List[str]
    probabilities: List[float]

    @model_validator(mode="after")
    def _check_distribution(self) -> "AttributeSpec":
        if not self.categories:
            raise ValueError(f"attribute {self.name!r} needs at least one category")
        if len(self.categories) != len(self.probabilities):
            raise ValueError(f"attribute {self.name!r}: categories and probabilities differ in length")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError(f"attribute {self.name!r} has duplicate categories")
        if MISSING_CATEGORY in self.categories:
            raise ValueError(f"attribute {self.name!r} may not use the reserved category {MISSING_CATEGORY!r}")
        for category, p in zip(self.categories, self.probabilities):
            _check_probability(p, f"P({self.name}={category})")
        if abs(sum(self.probabilities) - 1.0) > _SUM_TOLERANCE:
            raise ValueError(f"attribute {self.name!r}: probabilities sum to {sum(self.probabilities)}, not 1")
        return self


class MissingnessRule(BaseModel):
    """P(target missing | condition = category) for each category of condition"""

    target: str
    condition: str
    missing_given: Dict[str, float]

    @model_validator(mode="after")
    def _check_rates(self) -> "MissingnessRule":
        if self.target == self.condition:
            raise ValueError("a missingness rule cannot condition an attribute on itself")
        for category, p in self.missing_given.items():
            _check_probability(p, f"P({self.target} missing | {self.condition}={category})")
        return self


class PlantedMissingnessSpec(BaseModel):
    n_rows: int = Field(10_000, ge=1)
    attributes: List[AttributeSpec]
    rules: List[MissingnessRule] = Field(default_factory=list)
    name: str = "synthetic"

    @model_validator(mode="after")
    def _check_references(self) -> "PlantedMissingnessSpec":
        by_name = {a.name: a for a in self.attributes}
        if len(by_name) != len(self.attributes):
            raise ValueError("attribute names must be unique")
        targets = set()
        for rule in self.rules:
            for ref in (rule.target, rule.condition):
                if ref not in by_name:
                    raise ValueError(f"rule references unknown attribute {ref!r}")
            unknown = set(rule.missing_given) - set(by_name[rule.condition].categories)
            if unknown:
                raise ValueError(f"rule on {rule.target!r} names unknown categories {sorted(unknown)}")
            if rule.target in targets:
                raise ValueError(f"attribute {rule.target!r} is the target of more than one rule")
            targets.add(rule.target)
        return self

    @classmethod
    def from_yaml(cls, path) -> "PlantedMissingnessSpec":
        path = Path(path)
        if not path.is_file():
            raise InputError(f"synthetic spec not found: {path}")
        with open(path) as f:
            return cls.model_validate(yaml.safe_load(f) or {})


def synth_missingness(spec: PlantedMissingnessSpec, seed: int) -> CategoricalDataset:
    """
    Draw a dataset from independent base distributions, then blank cells of each
    rule's target with a probability that depends on the condition attribute's
    drawn category. Conditions always see the value drawn before blanking.
    """
    rng = np.random.default_rng(seed)
    drawn: Dict[str, np.ndarray] = {}
    for attribute in spec.attributes:
        probabilities = np.asarray(attribute.probabilities, dtype=float)
        drawn[attribute.name] = rng.choice(len(attribute.categories), size=spec.n_rows, p=probabilities / probabilities.sum())

    missing: Dict[str, np.ndarray] = {a.name: np.zeros(spec.n_rows, dtype=bool) for a in spec.attributes}
    by_name = {a.name: a for a in spec.attributes}
    for rule in spec.rules:
        condition = by_name[rule.condition]
        rates = np.array([rule.missing_given.get(c, 0.0) for c in condition.categories])
        draws = rng.random(spec.n_rows)
        missing[rule.target] = draws < rates[drawn[rule.condition]]

    columns = []
    for attribute in spec.attributes:
        tokens = np.asarray(attribute.categories, dtype=object)[drawn[attribute.name]]
        tokens[missing[attribute.name]] = MISSING_CATEGORY
        columns.append(AttributeColumn.encode(attribute.name, list(tokens)))

    dataset = CategoricalDataset(name=spec.name, attributes=tuple(columns))
    logger.info(
        "synthetic dataset generated",
        dataset=spec.name,
        rows=spec.n_rows,
        seed=seed,
        missing_cells=int(sum(m.sum() for m in missing.values())),
    )
    return dataset


def conditional_missing_rates(dataset: CategoricalDataset, target: str, condition: str) -> Dict[str, float]:
    """Empirical P(target == '?' | condition = c) for every realized non-missing category c"""
    target_column = dataset.attributes[dataset.attribute_index(target)]
    condition_column = dataset.attributes[dataset.attribute_index(condition)]
    is_missing = (
        target_column.values == target_column.missing_index
        if target_column.missing_index is not None
        else np.zeros(dataset.n_rows, dtype=bool)
    )
    rates = {}
    for index, category in enumerate(condition_column.categories):
        if category == MISSING_CATEGORY:
            continue
        stratum = condition_column.values == index
        if stratum.any():
            rates[category] = float(is_missing[stratum].mean())
    return rates


def example_spec(n_rows: int = 10_000) -> PlantedMissingnessSpec:
    """Placement-style example: diagnosis recorded completely in one setting only"""
    return PlantedMissingnessSpec(
        name="planted-missingness",
        n_rows=n_rows,
        attributes=[
            AttributeSpec(
                name="setting",
                categories=["pre-adoptive", "relative", "foster", "group"],
                probabilities=[0.3, 0.3, 0.2, 0.2],
            ),
            AttributeSpec(name="diagnosis", categories=["no", "yes"], probabilities=[0.8, 0.2]),
            AttributeSpec(name="removal", categories=["voluntary", "court"], probabilities=[0.4, 0.6]),
            AttributeSpec(name="sex", categories=["f", "m"], probabilities=[0.5, 0.5]),
        ],
        rules=[
            MissingnessRule(
                target="diagnosis",
                condition="setting",
                missing_given={"pre-adoptive": 0.0, "relative": 0.5, "foster": 0.5, "group": 0.5},
            )
        ],
    )


def spec_to_yaml(spec: PlantedMissingnessSpec, path: Optional[Path] = None) -> str:
    text = yaml.safe_dump(spec.model_dump(), sort_keys=False)
    if path is not None:
        Path(path).write_text(text)
    return text
