"""End-to-end pipeline and its output files.

A run writes into the output directory::

    quantifiers.csv          one row per (series, m, tau, direction)
    grids/<name>.csv         one file per p-value grid
    grids/<name>.png         optional plot (needs the ``plot`` extra)
    report.json              AnalysisReport
    report.schema.json       JSON Schema of report.json

Floats in CSV files are written with ``repr`` so reruns with the same
configuration are byte-identical.
"""

import csv
import json
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, Optional, Union

from pydantic import ValidationError

from opnet import __version__
from opnet.config import ComparisonSpec, RunConfig
from opnet.datasets import load_dataset, save_series, truncate
from opnet.errors import ConfigError, DatasetError, FilterError, OpnetError, PipelineError
from opnet.models import (
    REFERENCE_P,
    AnalysisReport,
    Direction,
    EmbeddingParams,
    FilterReport,
    GroupedDataset,
    LorenzParams,
    Provenance,
    PValueGrid,
    QuantifierTriple,
    RejectionCount,
    Statistic,
    SurrogateAlgorithm,
    SurrogateReport,
    SurrogateTestResult,
    TimeSeries,
)
from opnet.network import quantify_many
from opnet.preprocess import adaptive_filter
from opnet.stats import (
    SurrogateQuantifiers,
    intergroup_grid,
    intragroup_asymmetry_grid,
    quantify_surrogates,
    summarize_groups,
    surrogate_comparison_grid,
)
from opnet.surrogates import run_surrogate_tests

logger = logging.getLogger(__name__)

QUANTIFIER_COLUMNS = [
    "series_id",
    "group",
    "m",
    "tau",
    "direction",
    "h_pe",
    "h_cpe",
    "h_gne",
    "n_nodes",
    "n_edges",
    "self_loop_weight",
    "forbidden_patterns",
]
GRID_COLUMNS = ["m", "tau", "p_value", "statistic", "comparison", "direction"]
MISSING = "NA"


def _number(value: Optional[float]) -> str:
    return MISSING if value is None else repr(float(value))


def prepare_dataset(
    dataset: GroupedDataset, config: RunConfig
) -> tuple[GroupedDataset, dict[str, FilterReport], dict[str, str]]:
    """Filter and truncate every series.

    Returns:
        The accepted dataset, the filter reports and, per rejected series,
        the reason it was dropped
    """
    settings = config.filter.to_settings()
    reports: dict[str, FilterReport] = {}
    rejected: dict[str, str] = {}
    kept: list[TimeSeries] = []

    for series in dataset.series:
        if config.filter.enabled:
            try:
                series, report = adaptive_filter(series, settings)
            except FilterError as e:
                rejected[series.id] = str(e)
                continue
            reports[series.id] = report
            if not report.accepted:
                rejected[series.id] = (
                    f"filter modified {100 * report.modified_fraction:.1f}% of beats "
                    f"(limit {100 * report.reject_threshold:.1f}%)"
                )
                continue
        if config.series_length is not None:
            if len(series) < config.series_length:
                rejected[series.id] = (
                    f"{len(series)} samples, {config.series_length} required"
                )
                continue
            series = truncate(series, config.series_length)
        kept.append(series)

    for series_id, reason in rejected.items():
        logger.warning("Rejected %s: %s", series_id, reason)
    if not kept:
        raise PipelineError("no series accepted", reasons=rejected)

    accepted = dataset.restricted_to({s.id for s in kept}).replace_series(kept)
    return accepted, reports, rejected


def _comparison_label(spec: ComparisonSpec) -> str:
    label = f"{spec.kind}:{'-'.join(spec.groups)}"
    return f"{label}:{spec.direction}" if spec.direction else label


def run_pipeline(config: RunConfig, dataset: Optional[GroupedDataset] = None) -> AnalysisReport:
    """Load, filter, quantify and compare; nothing is written to disk.

    Raises:
        ConfigError: invalid configuration or unknown groups
        DatasetError: manifest problems, e.g. missing series files
        PipelineError: every series rejected (reasons per series)
    """
    config.validate()
    if dataset is None:
        if not config.manifest:
            raise ConfigError("no manifest given")
        dataset = load_dataset(config.manifest)
    config.validate(groups=dataset.groups)

    prepared, filter_reports, rejected = prepare_dataset(dataset, config)
    sweep = config.sweep
    directions = config.direction_values
    statistics = config.statistic_values
    self_loops = config.gne_self_loops

    table = quantify_many(prepared.series, sweep, directions, self_loops, config.n_jobs)

    grids: list[PValueGrid] = []
    skipped: dict[str, str] = {}
    surrogate_cache: dict[tuple[SurrogateAlgorithm, str], SurrogateQuantifiers] = {}

    for spec in config.resolved_comparisons(prepared.groups):
        label = _comparison_label(spec)
        try:
            if spec.kind == "intragroup":
                if set(directions) != set(Direction):
                    raise DatasetError("intragroup comparison needs both directions")
                for statistic in statistics:
                    grids.append(
                        intragroup_asymmetry_grid(prepared, spec.groups[0], sweep, statistic, table)
                    )
            elif spec.kind == "intergroup":
                group_a, group_b = spec.groups
                wanted = (Direction(spec.direction),) if spec.direction else directions
                for direction in wanted:
                    for statistic in statistics:
                        grids.append(
                            intergroup_grid(
                                prepared, group_a, group_b, direction, sweep, statistic, table
                            )
                        )
            else:
                group = spec.groups[0]
                for algorithm in config.algorithm_values:
                    key = (algorithm, group)
                    if key not in surrogate_cache:
                        surrogate_cache[key] = quantify_surrogates(
                            prepared.members(group),
                            algorithm,
                            config.surrogates.n_surrogates,
                            sweep,
                            config.seed,
                            self_loops,
                            config.n_jobs,
                        )
                    for statistic in statistics:
                        grids.append(
                            surrogate_comparison_grid(
                                prepared,
                                group,
                                algorithm,
                                sweep,
                                statistic,
                                n_surrogates=config.surrogates.n_surrogates,
                                mode=config.surrogates.mode,
                                seed=config.seed,
                                table=table,
                                surrogates=surrogate_cache[key],
                                self_loops=self_loops,
                            )
                        )
        except DatasetError as e:
            logger.warning("Skipping %s: %s", label, e)
            skipped[label] = str(e)

    logger.info("Pipeline produced %d quantifier rows and %d grids", len(table), len(grids))
    return AnalysisReport(
        provenance=Provenance(version=__version__, seed=config.seed, config=config.to_dict()),
        quantifiers=list(table),
        grids=grids,
        filter_reports=filter_reports,
        rejected=rejected,
        groups={label: list(ids) for label, ids in prepared.groups.items()},
        group_summaries=summarize_groups(prepared, table, sweep, directions, statistics),
        skipped_comparisons=skipped,
    )


def write_quantifier_csv(
    triples: Iterable[QuantifierTriple],
    path: Union[str, Path],
    groups: Optional[dict[str, list[str]]] = None,
) -> Path:
    """One row per triple, columns as in QUANTIFIER_COLUMNS."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = {i: label for label, ids in (groups or {}).items() for i in ids}
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(QUANTIFIER_COLUMNS)
        for t in triples:
            writer.writerow(
                [
                    t.series_id,
                    labels.get(t.series_id, ""),
                    t.params.m,
                    t.params.tau,
                    t.direction.value,
                    _number(t.h_pe),
                    _number(t.h_cpe),
                    _number(t.h_gne),
                    t.n_nodes,
                    t.n_edges,
                    t.self_loop_weight,
                    MISSING if t.forbidden_patterns is None else t.forbidden_patterns,
                ]
            )
    return path


def write_grid_csv(grid: PValueGrid, path: Union[str, Path]) -> Path:
    """Grid cells sorted by (m, tau); invalid cells read ``NA``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    direction = grid.direction.value if grid.direction is not None else "both"
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(GRID_COLUMNS)
        for cell in sorted(grid.cells, key=lambda c: (c.m, c.tau)):
            writer.writerow(
                [
                    cell.m,
                    cell.tau,
                    _number(cell.p_value),
                    grid.statistic.value,
                    grid.comparison.value,
                    direction,
                ]
            )
    return path


def _render_grid_plot(grid: PValueGrid, path: Path) -> Optional[Path]:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib not installed; skipping plot %s (pip install opnet[plot])", path)
        return None

    fig, ax = plt.subplots(figsize=(6, 4))
    for tau in sorted({c.tau for c in grid.cells}):
        cells = sorted((c for c in grid.cells if c.tau == tau and c.is_valid), key=lambda c: c.m)
        ax.scatter([c.m for c in cells], [c.p_value for c in cells], label=f"τ={tau}", s=16)
    ax.axhline(REFERENCE_P, color="tab:blue", linewidth=1)
    ax.set_xlabel("m")
    ax.set_ylabel("p-value")
    ax.set_title(grid.name, fontsize=8)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(
        path,
        format="png",
        metadata={"Software": f"opnet {__version__}", "reference_p": repr(REFERENCE_P)},
    )
    plt.close(fig)
    return path


def emit_plot_data(
    report: AnalysisReport,
    output_dir: Union[str, Path],
    plot: bool = False,
) -> list[Path]:
    """Write one CSV per grid, plus a PNG per grid when ``plot`` is set.

    Raises:
        OpnetError: output directory cannot be written
    """
    grid_dir = Path(output_dir) / "grids"
    try:
        grid_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OpnetError(f"cannot write to {grid_dir}: {e}") from None

    written = []
    for grid in report.grids:
        written.append(write_grid_csv(grid, grid_dir / f"{grid.name}.csv"))
        if plot:
            image = _render_grid_plot(grid, grid_dir / f"{grid.name}.png")
            if image is not None:
                written.append(image)
    return written


def report_schema() -> dict[str, Any]:
    """JSON Schema of report.json."""
    return AnalysisReport.model_json_schema()


def write_report(
    report: AnalysisReport,
    output_dir: Union[str, Path],
    plot: bool = False,
) -> list[Path]:
    """Write every output file of a pipeline run."""
    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OpnetError(f"cannot write to {output_dir}: {e}") from None

    written = [write_quantifier_csv(report.quantifiers, output_dir / "quantifiers.csv", report.groups)]
    written += emit_plot_data(report, output_dir, plot)

    report_path = output_dir / "report.json"
    report_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    schema_path = output_dir / "report.schema.json"
    schema_path.write_text(json.dumps(report_schema(), indent=2) + "\n", encoding="utf-8")
    written += [report_path, schema_path]
    logger.info("Wrote %d files to %s", len(written), output_dir)
    return written


def load_report(path: Union[str, Path]) -> AnalysisReport:
    """Read a report.json back."""
    return AnalysisReport.model_validate_json(Path(path).read_text(encoding="utf-8"))


def validate_report(report: dict) -> tuple[bool, list[str]]:
    """Validate a report dictionary.

    Args:
        report: Parsed report.json

    Returns:
        Tuple of (is_valid, list of error messages)
    """
    try:
        parsed = AnalysisReport.model_validate(report)
    except ValidationError as e:
        return False, [
            f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}"
            for err in e.errors()
        ]

    errors = []
    ids = {t.series_id for t in parsed.quantifiers}
    for label, members in parsed.groups.items():
        missing = [i for i in members if i not in ids]
        if missing:
            errors.append(f"group '{label}' members without quantifiers: {', '.join(missing)}")
    return len(errors) == 0, errors


def count_rejections(results: Iterable[SurrogateTestResult]) -> list[RejectionCount]:
    """Rejections per (algorithm, statistic), in first-seen order."""
    counts: dict[tuple[SurrogateAlgorithm, Statistic], list[int]] = {}
    for result in results:
        if result.algorithm is None or result.statistic is None:
            continue
        tally = counts.setdefault((result.algorithm, result.statistic), [0, 0])
        tally[0] += int(result.rejected)
        tally[1] += 1
    return [
        RejectionCount(algorithm=a, statistic=s, rejected=r, total=t)
        for (a, s), (r, t) in counts.items()
    ]


def surrogate_report(
    series: Sequence[TimeSeries],
    params: EmbeddingParams,
    algorithms: Sequence[SurrogateAlgorithm],
    n_surrogates: int = 100,
    statistics: Sequence[Statistic] = tuple(Statistic),
    seed: int = 0,
    n_jobs: int = 1,
    self_loops: str = "exclude",
    lorenz: Optional[LorenzParams] = None,
    config: Optional[dict[str, Any]] = None,
) -> SurrogateReport:
    """Surrogate battery of every series under every algorithm, with rejection counts."""
    results: list[SurrogateTestResult] = []
    for s in series:
        for algorithm in algorithms:
            tests = run_surrogate_tests(
                s, params, algorithm, n_surrogates, statistics, seed, n_jobs, self_loops
            )
            results.extend(tests.values())
    return SurrogateReport(
        provenance=Provenance(version=__version__, seed=seed, config=config or {}),
        embedding=params,
        n_surrogates=n_surrogates,
        lorenz=lorenz,
        results=results,
        rejections=count_rejections(results),
    )


def write_surrogate_report(
    report: SurrogateReport,
    output_dir: Union[str, Path],
    series: Sequence[TimeSeries] = (),
    name: str = "surrogates",
) -> list[Path]:
    """Write ``<name>.json``, ``<name>_rejections.csv`` and any series files."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    json_path = output_dir / f"{name}.json"
    json_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")

    table_path = output_dir / f"{name}_rejections.csv"
    with open(table_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["algorithm", "statistic", "rejected", "total"])
        for row in report.rejections:
            writer.writerow([row.algorithm.value, row.statistic.value, row.rejected, row.total])

    written = [json_path, table_path]
    for s in series:
        written.append(save_series(s, output_dir / "series" / f"{s.id}.txt"))
    return written
