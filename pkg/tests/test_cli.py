"""Tests for the command line"""
import importlib
import re
import sys

import click
import pytest
import yaml
from click.testing import CliRunner
from loguru import logger

import miscluster
from miscluster.algorithms.kmodes import kmodes_cluster
from miscluster.cli import cli, main, parse_args
from miscluster.config import JOBS_ENV_VAR, RunConfig, write_default_config
from miscluster.logs import configure_logging
from tests.conftest import build_dataset

WEATHER_CSV = """\
sunny,hot,dry,no,a
sunny,hot,dry,no,a
sunny,hot,humid,no,a
sunny,mild,dry,no,a
rain,cool,humid,yes,b
rain,cool,humid,yes,b
rain,mild,humid,yes,b
rain,cool,dry,yes,b
"""

FLAG = re.compile(r"--[a-z][a-z-]*")


@pytest.fixture
def weather_csv(tmp_path):
    path = tmp_path / "weather.csv"
    path.write_text(WEATHER_CSV)
    return path


class TestParseArgs:
    """Test flag parsing into the merged run configuration"""

    def test_cluster_fixed_k(self):
        """Test --k selects fixed-k mode without touching the filesystem"""
        run_config = parse_args(["cluster", "--input", "x.csv", "--k", "3"])

        assert run_config.command == "cluster"
        assert run_config.engine.mode == "fixed-k"
        assert run_config.engine.k == 3
        assert str(run_config.input) == "x.csv"

    def test_cluster_defaults_to_auto(self):
        """Test no mode flag means auto mode at theta 0.9"""
        run_config = parse_args(["cluster", "--input", "x.csv"])

        assert run_config.engine.mode == "auto"
        assert run_config.engine.auto_stop_ratio == 0.9

    def test_k_and_auto_conflict(self):
        """Test --k and --auto together are a usage error"""
        with pytest.raises(click.UsageError, match="mutually exclusive"):
            parse_args(["cluster", "--input", "x.csv", "--k", "3", "--auto"])

    def test_k_below_two(self):
        """Test k must be at least 2"""
        with pytest.raises(click.UsageError):
            parse_args(["cluster", "--input", "x.csv", "--k", "1"])

    def test_invalid_theta(self):
        """Test a non-positive theta fails validation"""
        with pytest.raises(click.UsageError, match="auto_stop_ratio"):
            parse_args(["cluster", "--input", "x.csv", "--theta", "0"])

    def test_ingest_flags(self):
        """Test ingest flags land in the ingest options"""
        run_config = parse_args(
            ["cluster", "--input", "x.tsv", "--delimiter", "\t", "--header", "--class-col", "0",
             "--drop-col", "2", "--drop-col", "3", "--missing", "NA"]
        )

        assert run_config.ingest.delimiter == "\t"
        assert run_config.ingest.header is True
        assert run_config.ingest.class_column == 0
        assert run_config.ingest.drop_columns == [2, 3]
        assert run_config.ingest.missing_tokens == ["NA"]

    def test_class_col_none(self, tmp_path):
        """Test 'none' clears a class column set in the config file"""
        config_path = tmp_path / "config.yaml"
        config_path.write_text("ingest:\n  class_column: 4\n")

        run_config = parse_args(["--config", str(config_path), "cluster", "--input", "x.csv", "--class-col", "none"])

        assert run_config.ingest.class_column is None

    def test_bench_defaults(self):
        """Test bench runs every algorithm unless told otherwise"""
        run_config = parse_args(["bench", "--manifest", "m.toml"])

        assert run_config.algorithms == ["mis", "mis-auto", "kmodes"]
        assert str(run_config.manifest) == "m.toml"

    def test_bench_options(self):
        """Test bench flags reach the algorithm settings"""
        run_config = parse_args(["bench", "--algorithms", "mis,kmodes", "--seed", "3", "--n-init", "2", "--theta", "0.8"])

        assert run_config.algorithms == ["mis", "kmodes"]
        assert run_config.kmodes.seed == 3
        assert run_config.kmodes.n_init == 2
        assert run_config.engine.auto_stop_ratio == 0.8

    def test_bench_unknown_algorithm(self):
        """Test unknown algorithm names are a usage error"""
        with pytest.raises(click.UsageError, match="unknown algorithm"):
            parse_args(["bench", "--algorithms", "mis,coolcat"])

    def test_synth_seed(self):
        """Test synth --seed sets the run seed"""
        run_config = parse_args(["synth", "--seed", "5", "--out", "s.csv"])

        assert run_config.seed == 5

    def test_help_returns_none(self):
        """Test --help and --version short-circuit"""
        assert parse_args(["--help"]) is None
        assert parse_args(["cluster", "--help"]) is None
        assert parse_args(["--version"]) is None

    def test_config_flags_override(self, tmp_path):
        """Test flags override config file values"""
        config_path = tmp_path / "config.yaml"
        config_path.write_text("engine:\n  mode: fixed-k\n  k: 4\nreport:\n  top_n: 2\n")

        from_file = parse_args(["--config", str(config_path), "cluster", "--input", "x.csv"])
        overridden = parse_args(["--config", str(config_path), "cluster", "--input", "x.csv", "--auto"])
        summarize = parse_args(["--config", str(config_path), "summarize", "--top", "7"])

        assert from_file.engine.k == 4
        assert overridden.engine.mode == "auto"
        assert overridden.engine.k is None
        assert summarize.report.top_n == 7

    def test_default_config_file_changes_nothing(self, tmp_path):
        """Test a config file spelling out the defaults parses like no config"""
        config_path = tmp_path / "defaults.yaml"
        write_default_config(config_path)

        with_file = parse_args(["--config", str(config_path), "cluster", "--input", "x.csv"])
        without = parse_args(["cluster", "--input", "x.csv"])

        assert with_file == without

    def test_unreadable_config(self, tmp_path):
        """Test a missing config file is a bad parameter"""
        with pytest.raises(click.BadParameter):
            parse_args(["--config", str(tmp_path / "nope.yaml"), "cluster", "--input", "x.csv"])

    def test_jobs_from_environment(self, monkeypatch):
        """Test the environment sets parallelism when --jobs is absent"""
        monkeypatch.setenv(JOBS_ENV_VAR, "3")

        assert parse_args(["cluster", "--input", "x.csv"]).n_jobs == 3
        assert parse_args(["cluster", "--input", "x.csv", "--jobs", "2"]).n_jobs == 2

    def test_jobs_environment_invalid(self, monkeypatch):
        """Test a non-integer environment value is rejected"""
        monkeypatch.setenv(JOBS_ENV_VAR, "many")

        with pytest.raises(ValueError, match=JOBS_ENV_VAR):
            RunConfig().n_jobs


class TestHelp:
    """Test help text lists exactly the accepted flags"""

    @pytest.mark.parametrize("command", sorted(cli.commands))
    def test_flags_round_trip(self, command):
        """Test every flag in the help is accepted and every accepted flag is documented"""
        result = CliRunner().invoke(cli, [command, "--help"])

        assert result.exit_code == 0
        documented = set(FLAG.findall(result.output))
        accepted = {"--help"}
        for param in cli.commands[command].params:
            accepted.update(o for o in param.opts + param.secondary_opts if o.startswith("--"))
        assert documented == accepted


class TestMain:
    """Test end-to-end runs and exit codes"""

    def test_cluster_evaluate(self, weather_csv, tmp_path, capsys):
        """Test cluster then evaluate a labelled file"""
        result_path = tmp_path / "result.yaml"

        assert main(["cluster", "--input", str(weather_csv), "--class-col", "4", "--k", "2",
                     "--jobs", "1", "--out", str(result_path)]) == 0
        capsys.readouterr()
        assert main(["evaluate", "--result", str(result_path), "--labels-from", str(weather_csv),
                     "--class-col", "4"]) == 0

        document = yaml.safe_load(capsys.readouterr().out)
        assert document["purity"] == 1.0
        assert document["majority_floor"] == 0.5
        assert document["clusters"] == 2

    def test_cluster_to_stdout(self, weather_csv, capsys):
        """Test the result document goes to stdout without --out"""
        assert main(["cluster", "--input", str(weather_csv), "--class-col", "4", "--k", "2",
                     "--jobs", "1", "--explain"]) == 0

        document = yaml.safe_load(capsys.readouterr().out)
        assert document["format"] == "miscluster-result"
        assert len(document["clusters"]) == 2

    def test_shortfall_exit_code(self, tmp_path):
        """Test fewer clusters than requested exits 2"""
        path = tmp_path / "pairs.csv"
        path.write_text("a,x\na,x\nb,y\nb,y\n")

        assert main(["cluster", "--input", str(path), "--k", "3", "--jobs", "1"]) == 2

    def test_missing_input_file(self, tmp_path):
        """Test a missing input file exits 1"""
        assert main(["cluster", "--input", str(tmp_path / "nope.csv"), "--k", "2"]) == 1

    def test_missing_input_flag(self):
        """Test omitting --input exits 1"""
        assert main(["cluster", "--k", "2"]) == 1

    def test_usage_conflict(self, weather_csv):
        """Test conflicting flags exit 1"""
        assert main(["cluster", "--input", str(weather_csv), "--k", "2", "--auto"]) == 1

    def test_evaluate_without_labels(self, weather_csv, tmp_path):
        """Test evaluate needs a class column"""
        result_path = tmp_path / "result.yaml"
        main(["cluster", "--input", str(weather_csv), "--class-col", "4", "--k", "2", "--jobs", "1",
              "--out", str(result_path)])

        assert main(["evaluate", "--result", str(result_path), "--labels-from", str(weather_csv)]) == 1

    def test_synth_cluster_summarize(self, tmp_path):
        """Test the planted-missingness workflow end to end"""
        data = tmp_path / "synth.csv"
        result_path = tmp_path / "result.yaml"
        report = tmp_path / "report.txt"
        records = tmp_path / "report.jsonl"

        assert main(["synth", "--seed", "7", "--out", str(data)]) == 0
        assert main(["cluster", "--input", str(data), "--header", "--k", "2", "--jobs", "1", "--out", str(result_path)]) == 0
        assert main(["summarize", "--input", str(data), "--header", "--result", str(result_path), "--top", "1",
                     "--jobs", "1", "--out", str(report)]) == 0
        assert main(["summarize", "--input", str(data), "--header", "--result", str(result_path), "--format", "jsonl",
                     "--jobs", "1", "--out", str(records)]) == 0

        text = report.read_text()
        assert text.startswith("Cluster 0:")
        assert "  diagnosis  D=" in text
        assert "?: 100.0%" in text
        assert len(records.read_text().splitlines()) > 0

    def test_synth_requires_out(self):
        """Test synth refuses to run without --out"""
        assert main(["synth"]) == 1

    def test_bench_missing_files(self, tmp_path):
        """Test a benchmark with missing dataset files exits 1"""
        assert main(["bench", "--data-dir", str(tmp_path), "--algorithms", "mis", "--dataset", "zoo"]) == 1


class TestLogging:
    """Test the key=value log format"""

    def test_fields_rendered(self, capsys):
        """Test extras follow the event as key=value pairs"""
        configure_logging("INFO")
        logger.info("clustering finished", dataset="weather", stop_reason="k-reached", note="two words")

        line = capsys.readouterr().err.strip()
        assert "level=INFO" in line
        assert "event=\"clustering finished\"" in line
        assert "dataset=weather" in line
        assert 'note="two words"' in line

    def test_level_filters(self, capsys):
        """Test records below the level are dropped"""
        configure_logging("WARNING")
        logger.info("hidden")

        assert capsys.readouterr().err == ""

    def test_library_silent_until_configured(self, capsys):
        """Test package records stay off stderr until logging is configured"""
        importlib.reload(miscluster)
        logger.remove()
        logger.add(lambda message: sys.stderr.write(message), level="DEBUG")
        dataset = build_dataset([("a", "x"), ("b", "y"), ("a", "x"), ("b", "y")])

        kmodes_cluster(dataset, 2, n_init=1)
        assert capsys.readouterr().err == ""

        configure_logging("DEBUG")
        kmodes_cluster(dataset, 2, n_init=1)
        assert 'event="k-modes finished"' in capsys.readouterr().err
