"""Run configuration.

A run is described by a YAML file (or TOML, by suffix); command-line flags
override the values read from it.
"""

import tomllib
from dataclasses import asdict, dataclass, field, fields
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Optional, Union

import yaml

from opnet.errors import ConfigError
from opnet.models import (
    MAX_EMBEDDING_DIMENSION,
    Direction,
    Statistic,
    SurrogateAlgorithm,
    SurrogateMode,
    Sweep,
)
from opnet.preprocess import (
    DEFAULT_ADJACENT_CHANGE,
    DEFAULT_MAX_RR_MS,
    DEFAULT_MIN_RR_MS,
    DEFAULT_REJECT_THRESHOLD,
    DEFAULT_WINDOW,
    FilterSettings,
)

# Default configuration values
DEFAULT_M_RANGE = (1, 16)
DEFAULT_TAU_RANGE = (1, 4)
DEFAULT_SERIES_LENGTH = 1490
DEFAULT_N_SURROGATES = 100
DEFAULT_OUTPUT_DIR = "opnet-out"
DEFAULT_GNE_SELF_LOOPS = "exclude"  # exclude, include

COMPARISON_KINDS = ("intragroup", "intergroup", "surrogate")


def _known(cls: type, data: dict[str, Any]) -> dict[str, Any]:
    # Only use known fields so older or newer config files still load
    names = {f.name for f in fields(cls)}
    return {k: v for k, v in data.items() if k in names}


@dataclass
class FilterOptions:
    """Adaptive filter section."""

    enabled: bool = True
    window: int = DEFAULT_WINDOW
    reject_threshold: float = DEFAULT_REJECT_THRESHOLD
    min_rr_ms: float = DEFAULT_MIN_RR_MS
    max_rr_ms: float = DEFAULT_MAX_RR_MS
    adjacent_change: float = DEFAULT_ADJACENT_CHANGE

    def to_settings(self) -> FilterSettings:
        return FilterSettings(
            min_rr_ms=self.min_rr_ms,
            max_rr_ms=self.max_rr_ms,
            adjacent_change=self.adjacent_change,
            window=self.window,
            reject_threshold=self.reject_threshold,
        )


@dataclass
class SurrogateSettings:
    """Surrogate comparison section; off unless enabled."""

    enabled: bool = False
    algorithms: list[str] = field(default_factory=lambda: [a.value for a in SurrogateAlgorithm])
    n_surrogates: int = DEFAULT_N_SURROGATES
    mode: str = SurrogateMode.SUBJECT_MEANS.value


@dataclass
class ComparisonSpec:
    """One requested comparison.

    ``intragroup`` and ``surrogate`` take one group, ``intergroup`` two.
    ``direction`` narrows an intergroup comparison to one direction.
    """

    kind: str
    groups: list[str]
    direction: Optional[str] = None


@dataclass
class RunConfig:
    """Everything a pipeline run needs."""

    manifest: Optional[str] = None
    output_dir: str = DEFAULT_OUTPUT_DIR

    # Sweep
    m_min: int = DEFAULT_M_RANGE[0]
    m_max: int = DEFAULT_M_RANGE[1]
    tau_min: int = DEFAULT_TAU_RANGE[0]
    tau_max: int = DEFAULT_TAU_RANGE[1]
    directions: list[str] = field(default_factory=lambda: [d.value for d in Direction])
    statistics: list[str] = field(default_factory=lambda: [s.value for s in Statistic])
    gne_self_loops: str = DEFAULT_GNE_SELF_LOOPS

    # Preparation; None keeps every series at full length
    series_length: Optional[int] = DEFAULT_SERIES_LENGTH
    filter: FilterOptions = field(default_factory=FilterOptions)

    surrogates: SurrogateSettings = field(default_factory=SurrogateSettings)

    # Empty means every default comparison for the groups in the manifest
    comparisons: list[ComparisonSpec] = field(default_factory=list)

    seed: int = 0
    n_jobs: int = 1
    plot: bool = False

    @property
    def sweep(self) -> Sweep:
        return Sweep.from_ranges(self.m_min, self.m_max, self.tau_min, self.tau_max)

    @property
    def direction_values(self) -> tuple[Direction, ...]:
        return tuple(Direction(d) for d in self.directions)

    @property
    def statistic_values(self) -> tuple[Statistic, ...]:
        return tuple(Statistic(s) for s in self.statistics)

    @property
    def algorithm_values(self) -> tuple[SurrogateAlgorithm, ...]:
        return tuple(SurrogateAlgorithm(a) for a in self.surrogates.algorithms)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        """Build a config from plain data, ignoring unknown keys."""
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        values = _known(cls, data)
        try:
            if isinstance(values.get("filter"), dict):
                values["filter"] = FilterOptions(**_known(FilterOptions, values["filter"]))
            if isinstance(values.get("surrogates"), dict):
                values["surrogates"] = SurrogateSettings(
                    **_known(SurrogateSettings, values["surrogates"])
                )
            if "comparisons" in values:
                values["comparisons"] = [
                    ComparisonSpec(**_known(ComparisonSpec, c)) for c in values["comparisons"] or []
                ]
            return cls(**values)
        except TypeError as e:
            raise ConfigError(f"invalid configuration: {e}") from None

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        """Load a YAML or TOML (``.toml``) configuration file.

        Raises:
            ConfigError: file missing, unparsable or inconsistent
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            if path.suffix.lower() == ".toml":
                with open(path, "rb") as f:
                    data = tomllib.load(f)
            else:
                with open(path, encoding="utf-8") as f:
                    data = yaml.safe_load(f) or {}
        except (yaml.YAMLError, tomllib.TOMLDecodeError) as e:
            raise ConfigError(f"cannot parse {path}: {e}") from None
        config = cls.from_dict(data)
        config.validate()
        return config

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def save(self, path: Union[str, Path]) -> Path:
        """Write the configuration as YAML."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=False, default_flow_style=False)
        return path

    def reset(self) -> None:
        """Reset configuration to defaults."""
        defaults = RunConfig()
        for f in fields(self):
            setattr(self, f.name, getattr(defaults, f.name))

    def validate(self, groups: Optional[Iterable[str]] = None) -> None:
        """Check ranges, enum values and, given the dataset's groups, comparisons.

        Raises:
            ConfigError: the first problem found
        """
        if self.m_min < 1 or self.m_min > self.m_max:
            raise ConfigError(f"m range {self.m_min}..{self.m_max} is empty")
        if self.m_max > MAX_EMBEDDING_DIMENSION:
            raise ConfigError(f"m_max {self.m_max} exceeds {MAX_EMBEDDING_DIMENSION}")
        if self.tau_min < 1 or self.tau_min > self.tau_max:
            raise ConfigError(f"tau range {self.tau_min}..{self.tau_max} is empty")
        if not self.directions:
            raise ConfigError("at least one direction is required")
        if not self.statistics:
            raise ConfigError("at least one statistic is required")
        if self.gne_self_loops not in ("exclude", "include"):
            raise ConfigError("gne_self_loops must be 'exclude' or 'include'")
        if self.series_length is not None and self.series_length < 2:
            raise ConfigError("series_length must be at least 2")
        if self.n_jobs == 0:
            raise ConfigError("n_jobs must not be 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must lie in [0, 2**64)")
        if self.surrogates.n_surrogates < 2:
            raise ConfigError("n_surrogates must be at least 2")
        try:
            _ = (self.direction_values, self.statistic_values, self.algorithm_values)
            SurrogateMode(self.surrogates.mode)
            self.filter.to_settings()
            for spec in self.comparisons:
                if spec.direction is not None:
                    Direction(spec.direction)
        except ValueError as e:
            raise ConfigError(str(e)) from None

        known_groups = set(groups) if groups is not None else None
        for spec in self.comparisons:
            if spec.kind not in COMPARISON_KINDS:
                raise ConfigError(f"unknown comparison kind {spec.kind!r}")
            expected = 2 if spec.kind == "intergroup" else 1
            if len(spec.groups) != expected:
                raise ConfigError(f"{spec.kind} comparison needs {expected} group(s)")
            if known_groups is not None:
                unknown = [g for g in spec.groups if g not in known_groups]
                if unknown:
                    raise ConfigError(f"comparison names unknown group(s): {', '.join(unknown)}")

    def resolved_comparisons(self, groups: Iterable[str]) -> list[ComparisonSpec]:
        """Requested comparisons, or the defaults for ``groups``.

        Defaults: intragroup for every group, intergroup for every pair,
        and a surrogate comparison per group when surrogates are enabled.
        """
        if self.comparisons:
            return list(self.comparisons)
        groups = list(groups)
        specs = [ComparisonSpec("intragroup", [g]) for g in groups]
        specs += [ComparisonSpec("intergroup", [a, b]) for a, b in combinations(groups, 2)]
        if self.surrogates.enabled:
            specs += [ComparisonSpec("surrogate", [g]) for g in groups]
        return specs
