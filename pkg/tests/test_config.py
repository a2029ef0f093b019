"""Tests for run configuration."""

from pathlib import Path

import pytest

from opnet.config import ComparisonSpec, RunConfig
from opnet.errors import ConfigError
from opnet.models import Direction, Statistic, SurrogateAlgorithm


class TestDefaults:
    """Tests for default values."""

    def test_sweep(self) -> None:
        """Test the default sweep is m 1..16 by tau 1..4."""
        config = RunConfig()
        sweep = config.sweep
        assert len(sweep) == 64
        assert sweep.pairs()[0].m == 1
        assert config.series_length == 1490
        assert config.seed == 0

    def test_enum_values(self) -> None:
        """Test defaults cover every direction, statistic and algorithm."""
        config = RunConfig()
        assert config.direction_values == (Direction.FORWARD, Direction.REVERSE)
        assert set(config.statistic_values) == set(Statistic)
        assert set(config.algorithm_values) == set(SurrogateAlgorithm)

    def test_surrogates_off(self) -> None:
        """Test surrogate comparisons are opt-in."""
        config = RunConfig()
        assert config.surrogates.enabled is False
        assert config.surrogates.n_surrogates == 100
        assert config.surrogates.mode == "subject_means"

    def test_defaults_validate(self) -> None:
        """Test the default configuration is valid."""
        RunConfig().validate()

    def test_reset(self) -> None:
        """Test reset restores every default."""
        config = RunConfig(m_max=5, seed=9)
        config.filter.window = 3
        config.reset()
        assert config == RunConfig()


class TestValidate:
    """Tests for RunConfig.validate."""

    @pytest.mark.parametrize(
        ("changes", "message"),
        [
            ({"m_min": 0}, "m range"),
            ({"m_min": 5, "m_max": 4}, "m range"),
            ({"m_max": 21}, "exceeds 20"),
            ({"tau_min": 3, "tau_max": 2}, "tau range"),
            ({"directions": []}, "direction"),
            ({"statistics": []}, "statistic"),
            ({"directions": ["sideways"]}, "sideways"),
            ({"gne_self_loops": "maybe"}, "gne_self_loops"),
            ({"series_length": 1}, "series_length"),
            ({"n_jobs": 0}, "n_jobs"),
            ({"seed": -1}, "seed"),
        ],
    )
    def test_rejects(self, changes: dict, message: str) -> None:
        """Test each invalid field is reported."""
        config = RunConfig(**changes)
        with pytest.raises(ConfigError, match=message):
            config.validate()

    def test_m_max_twenty_allowed(self) -> None:
        """Test the largest supported dimension validates."""
        RunConfig(m_max=20).validate()

    def test_untruncated_allowed(self) -> None:
        """Test series_length may be None."""
        RunConfig(series_length=None).validate()

    def test_filter_settings(self) -> None:
        """Test filter problems surface as configuration errors."""
        config = RunConfig()
        config.filter.window = 0
        with pytest.raises(ConfigError, match="window"):
            config.validate()

    def test_surrogate_settings(self) -> None:
        """Test surrogate algorithm, count and mode are checked."""
        config = RunConfig()
        config.surrogates.n_surrogates = 0
        with pytest.raises(ConfigError, match="n_surrogates"):
            config.validate()
        config.surrogates.n_surrogates = 1
        with pytest.raises(ConfigError, match="at least 2"):
            config.validate()
        config = RunConfig()
        config.surrogates.algorithms = ["alg9"]
        with pytest.raises(ConfigError):
            config.validate()
        config = RunConfig()
        config.surrogates.mode = "median"
        with pytest.raises(ConfigError):
            config.validate()

    def test_comparison_kind(self) -> None:
        """Test unknown comparison kinds are rejected."""
        config = RunConfig(comparisons=[ComparisonSpec("crossgroup", ["A"])])
        with pytest.raises(ConfigError, match="crossgroup"):
            config.validate()

    def test_comparison_arity(self) -> None:
        """Test intergroup needs two groups and intragroup one."""
        with pytest.raises(ConfigError, match="2 group"):
            RunConfig(comparisons=[ComparisonSpec("intergroup", ["A"])]).validate()
        with pytest.raises(ConfigError, match="1 group"):
            RunConfig(comparisons=[ComparisonSpec("intragroup", ["A", "B"])]).validate()

    def test_unknown_group(self) -> None:
        """Test groups are checked against the dataset when given."""
        config = RunConfig(comparisons=[ComparisonSpec("intergroup", ["A", "Z"])])
        config.validate()
        with pytest.raises(ConfigError, match="Z"):
            config.validate(groups=["A", "B"])


class TestLoad:
    """Tests for loading and saving configuration files."""

    def test_yaml(self, tmp_path: Path) -> None:
        """Test nested YAML sections are parsed."""
        path = tmp_path / "run.yaml"
        path.write_text(
            "manifest: data/manifest.csv\n"
            "m_max: 6\n"
            "tau_max: 2\n"
            "directions: [forward]\n"
            "filter:\n"
            "  window: 7\n"
            "surrogates:\n"
            "  enabled: true\n"
            "  algorithms: [alg0]\n"
            "comparisons:\n"
            "  - kind: intergroup\n"
            "    groups: [A, B]\n"
            "    direction: forward\n"
        )
        config = RunConfig.load(path)
        assert config.manifest == "data/manifest.csv"
        assert (config.m_max, config.tau_max) == (6, 2)
        assert config.direction_values == (Direction.FORWARD,)
        assert config.filter.window == 7
        assert config.surrogates.enabled
        assert config.algorithm_values == (SurrogateAlgorithm.ALG0,)
        assert config.comparisons == [ComparisonSpec("intergroup", ["A", "B"], "forward")]

    def test_toml(self, tmp_path: Path) -> None:
        """Test TOML is chosen by suffix."""
        path = tmp_path / "run.toml"
        path.write_text('m_max = 4\nstatistics = ["h_gne"]\n\n[filter]\nenabled = false\n')
        config = RunConfig.load(path)
        assert config.m_max == 4
        assert config.statistic_values == (Statistic.H_GNE,)
        assert config.filter.enabled is False

    def test_empty_file(self, tmp_path: Path) -> None:
        """Test an empty YAML file gives the defaults."""
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert RunConfig.load(path) == RunConfig()

    def test_unknown_keys_ignored(self, tmp_path: Path) -> None:
        """Test keys from other versions do not break loading."""
        path = tmp_path / "run.yaml"
        path.write_text("m_max: 3\ncolour: blue\nfilter:\n  smoothing: 2\n")
        config = RunConfig.load(path)
        assert config.m_max == 3
        assert not hasattr(config, "colour")

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test a missing file is a configuration error."""
        with pytest.raises(ConfigError, match="not found"):
            RunConfig.load(tmp_path / "nope.yaml")

    def test_parse_error(self, tmp_path: Path) -> None:
        """Test malformed YAML is reported with the path."""
        path = tmp_path / "bad.yaml"
        path.write_text("m_max: [1, 2\n")
        with pytest.raises(ConfigError, match="cannot parse"):
            RunConfig.load(path)

    def test_not_a_mapping(self, tmp_path: Path) -> None:
        """Test a top-level list is rejected."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            RunConfig.load(path)

    def test_invalid_values_on_load(self, tmp_path: Path) -> None:
        """Test loaded files are validated."""
        path = tmp_path / "run.yaml"
        path.write_text("m_max: 25\n")
        with pytest.raises(ConfigError, match="exceeds"):
            RunConfig.load(path)

    def test_save_round_trip(self, tmp_path: Path) -> None:
        """Test save then load gives an equal configuration."""
        config = RunConfig(m_max=8, seed=42, series_length=None)
        config.surrogates.enabled = True
        config.comparisons = [ComparisonSpec("surrogate", ["A"])]
        path = config.save(tmp_path / "nested" / "opnet.yaml")
        assert RunConfig.load(path) == config


class TestComparisons:
    """Tests for resolved_comparisons."""

    def test_defaults(self) -> None:
        """Test two groups give two intragroup and one intergroup comparison."""
        specs = RunConfig().resolved_comparisons(["A", "B"])
        assert specs == [
            ComparisonSpec("intragroup", ["A"]),
            ComparisonSpec("intragroup", ["B"]),
            ComparisonSpec("intergroup", ["A", "B"]),
        ]

    def test_with_surrogates(self) -> None:
        """Test enabling surrogates adds one comparison per group."""
        config = RunConfig()
        config.surrogates.enabled = True
        specs = config.resolved_comparisons(["A", "B"])
        assert len(specs) == 5
        assert [s.groups for s in specs if s.kind == "surrogate"] == [["A"], ["B"]]

    def test_three_groups(self) -> None:
        """Test every pair of groups is compared."""
        specs = RunConfig().resolved_comparisons(["A", "B", "C"])
        pairs = [s.groups for s in specs if s.kind == "intergroup"]
        assert pairs == [["A", "B"], ["A", "C"], ["B", "C"]]

    def test_explicit(self) -> None:
        """Test explicit comparisons replace the defaults."""
        explicit = [ComparisonSpec("intergroup", ["B", "A"], "reverse")]
        assert RunConfig(comparisons=explicit).resolved_comparisons(["A", "B"]) == explicit
