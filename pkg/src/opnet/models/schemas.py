"""Pydantic schemas for opnet domain types and reports."""

from datetime import datetime, timezone
from enum import Enum
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from opnet.errors import DatasetError, EmbeddingError

# Largest embedding dimension whose m! fits a 64-bit integer code
MAX_EMBEDDING_DIMENSION = 20

# Significance level drawn as the reference line in every p-value plot
REFERENCE_P = 0.05


def utcnow() -> datetime:
    """Get current UTC time."""
    return datetime.now(timezone.utc)


class Direction(str, Enum):
    """Mapping direction of a series onto ordinal patterns."""

    FORWARD = "forward"  # left to right
    REVERSE = "reverse"  # right to left, i.e. the time-reversed series


class Statistic(str, Enum):
    """Network complexity quantifiers."""

    H_PE = "h_pe"  # permutation entropy
    H_CPE = "h_cpe"  # conditional permutation entropy
    H_GNE = "h_gne"  # global node entropy


class SurrogateAlgorithm(str, Enum):
    """Null hypotheses for surrogate generation."""

    ALG0 = "alg0"  # i.i.d. noise: random shuffle
    ALG1 = "alg1"  # linear Gaussian process: phase randomization
    ALG2 = "alg2"  # static transform of linear Gaussian process: AAFT


class Comparison(str, Enum):
    """Kinds of p-value grid."""

    INTRAGROUP = "intragroup_fwd_vs_rev"
    INTERGROUP = "intergroup"
    SURROGATE = "orig_vs_surrogate"


class SurrogateMode(str, Enum):
    """Which surrogate sample enters the group Mann-Whitney test."""

    SUBJECT_MEANS = "subject_means"
    POOLED = "pooled"


class MannWhitneyMethod(str, Enum):
    """How the Mann-Whitney p-value was computed."""

    EXACT = "exact"
    NORMAL_APPROX = "normal_approx"


class TimeSeries(BaseModel):
    """A labeled sequence of finite scalar samples."""

    model_config = ConfigDict(frozen=True)

    values: tuple[float, ...]
    id: str
    group_label: Optional[str] = None

    @field_validator("values")
    @classmethod
    def _check_values(cls, values: tuple[float, ...]) -> tuple[float, ...]:
        if len(values) < 2:
            raise ValueError("a series needs at least 2 samples")
        if not np.isfinite(np.asarray(values, dtype=float)).all():
            raise ValueError("series contains non-finite values")
        return values

    def __len__(self) -> int:
        return len(self.values)

    def to_array(self) -> np.ndarray:
        """Values as a float64 array (a fresh copy)."""
        return np.asarray(self.values, dtype=np.float64)

    @classmethod
    def from_array(
        cls,
        values: Any,
        id: str,
        group_label: Optional[str] = None,
    ) -> "TimeSeries":
        """Build a series from any 1-d numeric sequence."""
        array = np.asarray(values, dtype=np.float64).ravel()
        return cls(values=tuple(array.tolist()), id=id, group_label=group_label)

    def with_values(self, values: Any, id: Optional[str] = None) -> "TimeSeries":
        """Copy of this series with new values (and optionally a new id)."""
        return TimeSeries.from_array(values, id=id or self.id, group_label=self.group_label)

    def reversed(self) -> "TimeSeries":
        """The time-reversed series (x_N, ..., x_1)."""
        return TimeSeries(
            values=self.values[::-1], id=self.id, group_label=self.group_label
        )


class EmbeddingParams(BaseModel):
    """Embedding dimension m and time lag tau."""

    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1, le=MAX_EMBEDDING_DIMENSION)
    tau: int = Field(ge=1)

    @property
    def span(self) -> int:
        """Number of samples covered by one embedding vector."""
        return (self.m - 1) * self.tau + 1

    def n_vectors(self, length: int) -> int:
        """Number of embedding vectors of a series of the given length."""
        return length - (self.m - 1) * self.tau

    def is_valid_for(self, length: int) -> bool:
        """At least two embedding vectors, hence one transition."""
        return self.n_vectors(length) >= 2

    def check_length(self, length: int) -> None:
        """Raise EmbeddingError when the series is too short."""
        if not self.is_valid_for(length):
            raise EmbeddingError(
                f"series of length {length} too short for m={self.m}, tau={self.tau} "
                f"(needs at least {self.span + 1} samples)"
            )

    def __str__(self) -> str:
        return f"m={self.m}, tau={self.tau}"


class Sweep(BaseModel):
    """Grid of (m, tau) pairs to evaluate."""

    model_config = ConfigDict(frozen=True)

    m_values: tuple[int, ...]
    tau_values: tuple[int, ...]

    @field_validator("m_values")
    @classmethod
    def _check_m(cls, values: tuple[int, ...]) -> tuple[int, ...]:
        if not values:
            raise ValueError("m range is empty")
        if min(values) < 1 or max(values) > MAX_EMBEDDING_DIMENSION:
            raise ValueError(f"m values must lie in 1..{MAX_EMBEDDING_DIMENSION}")
        return values

    @field_validator("tau_values")
    @classmethod
    def _check_tau(cls, values: tuple[int, ...]) -> tuple[int, ...]:
        if not values:
            raise ValueError("tau range is empty")
        if min(values) < 1:
            raise ValueError("tau values must be positive")
        return values

    @classmethod
    def from_ranges(cls, m_min: int, m_max: int, tau_min: int, tau_max: int) -> "Sweep":
        """Inclusive integer ranges, e.g. m 1..16 and tau 1..4."""
        return cls(
            m_values=tuple(range(m_min, m_max + 1)),
            tau_values=tuple(range(tau_min, tau_max + 1)),
        )

    def pairs(self) -> list[EmbeddingParams]:
        """All (m, tau) pairs, m-major."""
        return [EmbeddingParams(m=m, tau=tau) for m in self.m_values for tau in self.tau_values]

    def __len__(self) -> int:
        return len(self.m_values) * len(self.tau_values)


class GroupedDataset(BaseModel):
    """Series plus their group membership."""

    model_config = ConfigDict(frozen=True)

    series: tuple[TimeSeries, ...]
    groups: dict[str, tuple[str, ...]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_membership(self) -> "GroupedDataset":
        ids = [s.id for s in self.series]
        if len(set(ids)) != len(ids):
            duplicates = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate series ids: {', '.join(duplicates)}")
        known = set(ids)
        for label, members in self.groups.items():
            missing = [member for member in members if member not in known]
            if missing:
                raise ValueError(f"group '{label}' names unknown series: {', '.join(missing)}")
        return self

    @classmethod
    def from_series(cls, series: list[TimeSeries]) -> "GroupedDataset":
        """Build groups from each series' group_label."""
        groups: dict[str, list[str]] = {}
        for s in series:
            if s.group_label:
                groups.setdefault(s.group_label, []).append(s.id)
        return cls(series=tuple(series), groups={k: tuple(v) for k, v in groups.items()})

    def get(self, series_id: str) -> TimeSeries:
        """Look up one series by id."""
        for s in self.series:
            if s.id == series_id:
                return s
        raise DatasetError("unknown series", missing=[series_id])

    def members(self, group: str) -> list[TimeSeries]:
        """Series of one group, in manifest order."""
        if group not in self.groups:
            raise DatasetError("unknown group", missing=[group])
        by_id = {s.id: s for s in self.series}
        return [by_id[i] for i in self.groups[group]]

    def restricted_to(self, ids: set[str]) -> "GroupedDataset":
        """Dataset keeping only the given series ids."""
        return GroupedDataset(
            series=tuple(s for s in self.series if s.id in ids),
            groups={
                label: tuple(i for i in members if i in ids)
                for label, members in self.groups.items()
            },
        )

    def replace_series(self, series: list[TimeSeries]) -> "GroupedDataset":
        """Same groups, new series objects (matched by id)."""
        return GroupedDataset(series=tuple(series), groups=self.groups)


class FilterReport(BaseModel):
    """Outcome of the adaptive RR-interval filter for one series."""

    model_config = ConfigDict(frozen=True)

    series_id: str
    original_length: int = Field(ge=1)
    removed_count: int = Field(ge=0)  # dropped by the absolute bounds
    replaced_count: int = Field(ge=0)  # replaced by the adjacency rule
    modified_fraction: float = Field(ge=0.0, le=1.0)
    reject_threshold: float = 0.10
    accepted: bool

    @model_validator(mode="after")
    def _check_fraction(self) -> "FilterReport":
        expected = (self.removed_count + self.replaced_count) / self.original_length
        if abs(expected - self.modified_fraction) > 1e-12:
            raise ValueError("modified_fraction does not match the counts")
        if self.accepted != (self.modified_fraction <= self.reject_threshold):
            raise ValueError("accepted flag inconsistent with the threshold")
        return self


class QuantifierTriple(BaseModel):
    """The three network quantifiers of one (series, m, tau, direction)."""

    model_config = ConfigDict(frozen=True)

    series_id: str
    params: EmbeddingParams
    direction: Direction
    h_pe: float = Field(ge=0.0)
    h_cpe: float = Field(ge=0.0)
    h_gne: float = Field(ge=0.0)
    n_nodes: int = Field(default=0, ge=0)
    n_edges: int = Field(default=0, ge=0)
    self_loop_weight: int = Field(default=0, ge=0)
    forbidden_patterns: Optional[int] = None

    def value(self, statistic: Statistic) -> float:
        """The quantifier named by ``statistic``."""
        return float(getattr(self, Statistic(statistic).value))


class SurrogateEnsemble(BaseModel):
    """N surrogate realizations of one series under one null hypothesis."""

    model_config = ConfigDict(frozen=True)

    algorithm: SurrogateAlgorithm
    members: tuple[TimeSeries, ...]
    source_id: str
    seed: int = Field(ge=0, lt=2**64)

    def __len__(self) -> int:
        return len(self.members)


class SurrogateTestResult(BaseModel):
    """Rank-order and parametric outcome of one surrogate test."""

    model_config = ConfigDict(frozen=True)

    q_d: float
    q_surr: tuple[float, ...]
    rank: int = Field(ge=1)
    alpha: float
    alpha_degenerate: bool = False  # surrogate spread was zero
    rejected: bool
    significance_level: float
    statistic: Optional[Statistic] = None
    algorithm: Optional[SurrogateAlgorithm] = None
    series_id: Optional[str] = None
    seed: Optional[int] = None

    @property
    def n_surrogates(self) -> int:
        return len(self.q_surr)


class MannWhitneyResult(BaseModel):
    """Two-sided Mann-Whitney U test outcome."""

    model_config = ConfigDict(frozen=True)

    u_statistic: float
    p_value: float = Field(ge=0.0, le=1.0)
    method: MannWhitneyMethod


class GridCell(BaseModel):
    """One (m, tau) entry of a p-value grid; p_value None marks an invalid cell."""

    model_config = ConfigDict(frozen=True)

    m: int
    tau: int
    p_value: Optional[float] = None
    u_statistic: Optional[float] = None
    method: Optional[MannWhitneyMethod] = None
    n_a: int = 0
    n_b: int = 0
    reason: Optional[str] = None

    @property
    def is_valid(self) -> bool:
        return self.p_value is not None


class PValueGrid(BaseModel):
    """Mann-Whitney p-values over an (m, tau) sweep."""

    model_config = ConfigDict(frozen=True)

    comparison: Comparison
    statistic: Statistic
    groups: tuple[str, ...]
    direction: Optional[Direction] = None
    algorithm: Optional[SurrogateAlgorithm] = None
    mode: Optional[SurrogateMode] = None
    cells: tuple[GridCell, ...]

    @model_validator(mode="after")
    def _check_unique_cells(self) -> "PValueGrid":
        keys = [(c.m, c.tau) for c in self.cells]
        if len(set(keys)) != len(keys):
            raise ValueError("every (m, tau) may appear only once in a grid")
        return self

    @property
    def entries(self) -> dict[tuple[int, int], Optional[float]]:
        """Mapping (m, tau) -> p-value (None for invalid cells)."""
        return {(c.m, c.tau): c.p_value for c in self.cells}

    def p_value(self, m: int, tau: int) -> Optional[float]:
        """p-value of one cell."""
        return self.entries[(m, tau)]

    @property
    def name(self) -> str:
        """File-friendly identifier, e.g. ``intergroup_PNB-FNB_h_pe_forward``."""
        parts = [self.comparison.value, "-".join(self.groups), self.statistic.value]
        if self.direction is not None:
            parts.append(self.direction.value)
        if self.algorithm is not None:
            parts.append(self.algorithm.value)
        if self.mode is not None:
            parts.append(self.mode.value)
        return "_".join(parts)


class LorenzParams(BaseModel):
    """Lorenz system parameters and integration settings."""

    model_config = ConfigDict(frozen=True)

    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = Field(default=0.025, gt=0.0)
    n_transient: int = Field(default=1000, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    integrator: Literal["rk4", "rk45"] = "rk4"


class GroupSummary(BaseModel):
    """Mean and spread of one statistic within one group and cell."""

    model_config = ConfigDict(frozen=True)

    group: str
    m: int
    tau: int
    direction: Direction
    statistic: Statistic
    n: int
    mean: float
    std: float


class Provenance(BaseModel):
    """How a report was produced."""

    tool: str = "opnet"
    version: str
    generated_at: datetime = Field(default_factory=utcnow)
    seed: int
    seed_derivation: str = "SeedSequence(entropy=seed, spawn_key=(crc32(purpose), *index))"
    config: dict[str, Any] = Field(default_factory=dict)


class AnalysisReport(BaseModel):
    """Everything one pipeline run produced."""

    schema_version: str = "1.0"
    provenance: Provenance
    reference_p: float = REFERENCE_P
    quantifiers: list[QuantifierTriple] = Field(default_factory=list)
    grids: list[PValueGrid] = Field(default_factory=list)
    filter_reports: dict[str, FilterReport] = Field(default_factory=dict)
    rejected: dict[str, str] = Field(default_factory=dict)
    groups: dict[str, list[str]] = Field(default_factory=dict)
    group_summaries: list[GroupSummary] = Field(default_factory=list)
    skipped_comparisons: dict[str, str] = Field(default_factory=dict)


class RejectionCount(BaseModel):
    """How many series rejected one null for one statistic."""

    model_config = ConfigDict(frozen=True)

    algorithm: SurrogateAlgorithm
    statistic: Statistic
    rejected: int = Field(ge=0)
    total: int = Field(ge=0)


class SurrogateReport(BaseModel):
    """Rank-order surrogate tests of one or more series at one (m, tau)."""

    schema_version: str = "1.0"
    provenance: Provenance
    embedding: EmbeddingParams
    n_surrogates: int
    lorenz: Optional[LorenzParams] = None
    results: list[SurrogateTestResult] = Field(default_factory=list)
    rejections: list[RejectionCount] = Field(default_factory=list)
