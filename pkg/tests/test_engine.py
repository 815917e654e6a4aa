"""Tests for the MIS clustering engine"""
import numpy as np
import pytest
from pydantic import ValidationError

from miscluster import info
from miscluster.config import EngineConfig
from miscluster.dataset import SampleSet
from miscluster.engine import (
    assign,
    cluster,
    extract_min_entropy_partition,
    select_significant_attribute,
)
from miscluster.errors import InputError, UnsplittableError
from tests.conftest import build_dataset, random_dataset

PRODUCT_ROWS = [(b, b, c) for b in ("x", "y") for c in ("p", "q")] * 2
SQUARE_ROWS = [("a", "x"), ("a", "y"), ("b", "x"), ("b", "y")]


def check_structure(dataset, result):
    """Disjoint cover, non-empty clusters, shrinking residual, consistent records"""
    rows = np.sort(np.concatenate([c.rows for c in result.clusters]))
    assert np.array_equal(rows, np.arange(dataset.n_rows))
    assert all(len(c) > 0 for c in result.clusters)
    assert len(result.clusters) == len(result.splits) + 1

    working = dataset.n_rows
    for step, (split, extracted) in enumerate(zip(result.splits, result.clusters)):
        assert split.step == step
        assert split.cluster_size == len(extracted)
        assert split.cluster_size + split.residual_size == working
        assert split.residual_size < working
        assert split.is_consistent()
        assert split.attribute_name in split.mis_scores
        assert dataset.attributes[split.significant_attribute].name == split.attribute_name
        values = dataset.attributes[split.significant_attribute].values[extracted.rows]
        assert set(values.tolist()) == {split.chosen_category}
        working = split.residual_size


def check_assign(dataset, result):
    assignments = result.assignments()
    for r in range(dataset.n_rows):
        assert assign(dataset, result, dataset.row(r)) == assignments[r]


class TestSelectSignificantAttribute:
    """Test significant attribute selection"""

    def test_constant_attribute_skipped(self):
        """Test a constant attribute loses to a binary one"""
        dataset = build_dataset([("c", "x"), ("c", "y"), ("c", "x"), ("c", "y")])

        assert select_significant_attribute(SampleSet.full(dataset), [0, 1]) == 1

    def test_tie_goes_to_lowest_index(self):
        """Test identical attributes tie and the lower index wins"""
        dataset = build_dataset(PRODUCT_ROWS)

        assert select_significant_attribute(SampleSet.full(dataset), [0, 1, 2]) == 0

    def test_unsplittable(self):
        """Test all-constant attributes raise an unsplittable error"""
        dataset = build_dataset([("c", "d"), ("c", "d")])

        with pytest.raises(UnsplittableError):
            select_significant_attribute(SampleSet.full(dataset), [0, 1])

    def test_needs_two_attributes(self):
        """Test a single active attribute is rejected"""
        dataset = build_dataset(SQUARE_ROWS)

        with pytest.raises(InputError):
            select_significant_attribute(SampleSet.full(dataset), [0])

    def test_parallel_degree_irrelevant(self):
        """Test the choice is the same for any worker count"""
        dataset = random_dataset(np.random.default_rng(8), 120, 6)
        samples = SampleSet.full(dataset)

        assert select_significant_attribute(samples, range(6), n_jobs=1) == select_significant_attribute(
            samples, range(6), n_jobs=4
        )

    @pytest.mark.uci
    def test_mushroom_bruises(self, uci_dataset):
        """Test Mushroom's significant attribute is bruises"""
        dataset = uci_dataset("mushroom")
        attr = select_significant_attribute(SampleSet.full(dataset), range(dataset.n_attributes))

        assert dataset.attribute_names[attr] == "bruises"


class TestExtractMinEntropyPartition:
    """Test partition extraction"""

    def test_zero_entropy_partition(self):
        """Test a partition with all attributes constant is extracted"""
        rows = [("a", "p", "u")] * 3 + [("b", "p", "u"), ("b", "q", "v"), ("b", "q", "u")]
        working = SampleSet.full(build_dataset(rows))

        extracted, residual, record = extract_min_entropy_partition(working, 0, [0, 1, 2])

        assert extracted.row_list() == [0, 1, 2]
        assert residual.row_list() == [3, 4, 5]
        assert record.category_name == "a"
        assert record.partition_entropies["a"] == 0.0

    def test_smaller_entropy_wins(self):
        """Test the 4-row partition with lower entropy is taken from a 10-row set"""
        rows = [("s", x, "m") for x in ("x", "x", "y", "y")]
        rows += [("t", x, m) for x, m in zip(("x", "y", "z", "x", "y", "z"), ("m", "n", "m", "n", "m", "n"))]
        working = SampleSet.full(build_dataset(rows))

        extracted, residual, record = extract_min_entropy_partition(working, 0, [0, 1, 2])

        assert len(extracted) == 4
        assert len(residual) == 6
        assert record.partition_entropies["s"] == pytest.approx(1.0, abs=1e-12)
        assert record.partition_entropies["t"] == pytest.approx(np.log2(3) + 1.0, abs=1e-12)
        assert record.partition_entropies["t"] == info.partition_entropy(residual, [0, 1, 2])

    def test_tie_goes_to_lower_dictionary_index(self):
        """Test equal entropies extract the category seen first in the file"""
        rows = [("b", "x"), ("b", "y"), ("a", "x"), ("a", "y")]
        working = SampleSet.full(build_dataset(rows))

        extracted, _, record = extract_min_entropy_partition(working, 0, [0, 1])

        assert record.category_name == "b"
        assert record.chosen_category == 0
        assert extracted.row_list() == [0, 1]

    def test_cover(self):
        """Test cluster and residual cover the working set"""
        rng = np.random.default_rng(2)
        rows = [tuple(f"c{v}" for v in rng.integers(0, 3, size=4)) for _ in range(40)]
        working = SampleSet.full(build_dataset(rows))

        extracted, residual, _ = extract_min_entropy_partition(working, 2, range(4))

        assert sorted(extracted.row_list() + residual.row_list()) == list(range(40))
        assert len(extracted) > 0 and len(residual) > 0

    def test_constant_attribute(self):
        """Test splitting on a constant attribute is an error"""
        working = SampleSet.full(build_dataset([("c", "x"), ("c", "y")]))

        with pytest.raises(UnsplittableError):
            extract_min_entropy_partition(working, 0, [0, 1])


class TestCluster:
    """Test the clustering procedure"""

    def test_fixed_two(self, weather):
        """Test k=2 performs exactly one extraction"""
        result = cluster(weather, EngineConfig.fixed_k(2))

        assert len(result.splits) == 1
        assert result.n_clusters == 2
        assert result.stop_reason == "k-reached"
        assert not result.shortfall
        check_structure(weather, result)

    def test_fixed_k_count(self, weather):
        """Test fixed-k returns k clusters when the data allows it"""
        result = cluster(weather, EngineConfig.fixed_k(3))

        assert result.n_clusters == 3
        check_structure(weather, result)

    def test_shortfall(self):
        """Test an unsplittable residual ends the run early with a warning"""
        dataset = build_dataset([("a", "x"), ("a", "x"), ("b", "y"), ("b", "y")])

        result = cluster(dataset, EngineConfig.fixed_k(3))

        assert result.n_clusters == 2
        assert result.shortfall
        assert result.stop_reason == "unsplittable"
        assert len(result.warnings) == 1
        check_structure(dataset, result)

    def test_auto_runs_until_unsplittable(self):
        """Test auto mode keeps peeling while the entropy ratio stays low"""
        dataset = build_dataset(SQUARE_ROWS)

        result = cluster(dataset, EngineConfig.auto())

        assert [c.row_list() for c in result.clusters] == [[0, 1], [2], [3]]
        assert result.stop_reason == "unsplittable"
        assert result.splits[0].entropy_ratio == pytest.approx(0.5)
        check_structure(dataset, result)

    def test_auto_entropy_ratio_stop(self):
        """Test a low threshold stops before the first extraction"""
        dataset = build_dataset(SQUARE_ROWS)

        result = cluster(dataset, EngineConfig.auto(auto_stop_ratio=0.4))

        assert result.n_clusters == 1
        assert result.splits == []
        assert result.stop_reason == "entropy-ratio"

    def test_auto_min_cluster_fraction(self):
        """Test a residual below the minimum fraction stops extraction"""
        dataset = build_dataset(SQUARE_ROWS)

        result = cluster(dataset, EngineConfig.auto(min_cluster_fraction=0.6))

        assert result.n_clusters == 1
        assert result.stop_reason == "min-cluster-fraction"

    def test_too_small(self):
        """Test fewer than 2 rows or 2 attributes is rejected"""
        with pytest.raises(InputError):
            cluster(build_dataset([("a", "b")]), EngineConfig.fixed_k(2))
        with pytest.raises(InputError):
            cluster(build_dataset([("a",), ("b",)]), EngineConfig.fixed_k(2))

    def test_config_validation(self):
        """Test k below 2 and k in auto mode are rejected"""
        with pytest.raises(ValidationError):
            EngineConfig.fixed_k(1)
        with pytest.raises(ValidationError):
            EngineConfig(mode="auto", k=3)
        with pytest.raises(ValidationError):
            EngineConfig.auto(auto_stop_ratio=0.0)

    def test_config_echo(self, weather):
        """Test the result echoes the engine settings"""
        result = cluster(weather, EngineConfig.fixed_k(2))

        assert result.config == {"mode": "fixed-k", "k": 2, "min_cluster_fraction": 0.0, "auto_stop_ratio": 0.9}

    def test_randomized_structure(self):
        """Test structural invariants on 60 random datasets in both modes"""
        rng = np.random.default_rng(31337)
        for index in range(60):
            dataset = random_dataset(rng, int(rng.integers(6, 50)), int(rng.integers(2, 6)), name=f"r{index}")
            for config in (EngineConfig.fixed_k(int(rng.integers(2, 6))), EngineConfig.auto()):
                result = cluster(dataset, config)

                check_structure(dataset, result)
                check_assign(dataset, result)
                if config.mode == "fixed-k":
                    assert result.n_clusters == config.k or result.shortfall

    def test_deterministic_across_parallelism(self):
        """Test reruns and worker counts give bit-identical results"""
        rng = np.random.default_rng(77)
        for _ in range(10):
            dataset = random_dataset(rng, 80, 6, max_categories=4)
            for mode in (EngineConfig.fixed_k(4), EngineConfig.auto()):
                first = cluster(dataset, mode)
                again = cluster(dataset, mode)
                parallel = cluster(dataset, mode.model_copy(update={"n_jobs": 4}))

                assert first.same_as(again)
                assert first.same_as(parallel)

    def test_duplication_invariance(self):
        """Test duplicated rows give the same structure with doubled sizes"""
        rng = np.random.default_rng(5)
        for _ in range(20):
            dataset = random_dataset(rng, 25, 4)
            doubled = dataset.take(list(range(25)) * 2)
            for config in (EngineConfig.fixed_k(3), EngineConfig.auto()):
                once = cluster(dataset, config)
                twice = cluster(doubled, config)

                assert twice.n_clusters == once.n_clusters
                assert twice.cluster_sizes() == [2 * s for s in once.cluster_sizes()]
                for a, b in zip(once.clusters, twice.clusters):
                    assert set((b.rows % 25).tolist()) == set(a.row_list())
                for a, b in zip(once.splits, twice.splits):
                    assert (a.attribute_name, a.category_name) == (b.attribute_name, b.category_name)

    @pytest.mark.uci
    @pytest.mark.parametrize("name", ["zoo", "vote", "cancer", "mushroom", "balance", "chess"])
    def test_benchmark_structure(self, uci_dataset, name):
        """Test structural invariants on the benchmark datasets"""
        dataset = uci_dataset(name)
        result = cluster(dataset, EngineConfig.fixed_k(dataset.n_classes))

        check_structure(dataset, result)
        check_assign(dataset, result)
        assert cluster(dataset, EngineConfig.fixed_k(dataset.n_classes, n_jobs=4)).same_as(result)


class TestAssign:
    """Test routing rows down the split sequence"""

    def test_two_branches(self):
        """Test both branches of a single split"""
        dataset = build_dataset(SQUARE_ROWS)
        result = cluster(dataset, EngineConfig.fixed_k(2))
        split = result.splits[0]
        matching = list(dataset.row(0))
        matching[split.significant_attribute] = split.category_name
        other = list(dataset.row(0))
        other[split.significant_attribute] = "elsewhere"

        assert assign(dataset, result, matching) == 0
        assert assign(dataset, result, other) == 1

    def test_unknown_categories_fall_through(self, weather):
        """Test a row of unseen categories lands in the residual"""
        result = cluster(weather, EngineConfig.fixed_k(3))

        assert assign(weather, result, ["fog", "icy", "wet", "maybe"]) == len(result.splits)

    def test_training_rows(self, weather):
        """Test every training row maps to its own cluster"""
        check_assign(weather, cluster(weather, EngineConfig.auto()))

    def test_arity_mismatch(self, weather):
        """Test a row of the wrong length is rejected"""
        result = cluster(weather, EngineConfig.fixed_k(2))

        with pytest.raises(InputError):
            assign(weather, result, ["sunny"])
