"""Data models for opnet."""

from .schemas import (
    MAX_EMBEDDING_DIMENSION,
    REFERENCE_P,
    AnalysisReport,
    Comparison,
    Direction,
    EmbeddingParams,
    FilterReport,
    GridCell,
    GroupedDataset,
    GroupSummary,
    LorenzParams,
    MannWhitneyMethod,
    MannWhitneyResult,
    Provenance,
    PValueGrid,
    QuantifierTriple,
    RejectionCount,
    Statistic,
    SurrogateAlgorithm,
    SurrogateEnsemble,
    SurrogateMode,
    SurrogateReport,
    SurrogateTestResult,
    Sweep,
    TimeSeries,
    utcnow,
)

__all__ = [
    "MAX_EMBEDDING_DIMENSION",
    "REFERENCE_P",
    "AnalysisReport",
    "Comparison",
    "Direction",
    "EmbeddingParams",
    "FilterReport",
    "GridCell",
    "GroupedDataset",
    "GroupSummary",
    "LorenzParams",
    "MannWhitneyMethod",
    "MannWhitneyResult",
    "Provenance",
    "PValueGrid",
    "QuantifierTriple",
    "RejectionCount",
    "Statistic",
    "SurrogateAlgorithm",
    "SurrogateEnsemble",
    "SurrogateMode",
    "SurrogateReport",
    "SurrogateTestResult",
    "Sweep",
    "TimeSeries",
    "utcnow",
]
