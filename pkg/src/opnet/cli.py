"""Click CLI for opnet."""

import json
import logging
from pathlib import Path
from typing import Optional

import click
from trogon import tui

from opnet import __version__
from opnet.config import RunConfig
from opnet.datasets import load_series, save_series
from opnet.dynsys import make_lorenz_peak_ensemble
from opnet.errors import ConfigError, OpnetError, PipelineError
from opnet.models import (
    Direction,
    EmbeddingParams,
    LorenzParams,
    Statistic,
    SurrogateAlgorithm,
    SurrogateMode,
    SurrogateReport,
)
from opnet.network import build_network, extract_patterns, quantify, write_edge_list
from opnet.preprocess import FilterSettings, adaptive_filter
from opnet.report import report_schema, run_pipeline, surrogate_report, write_report, write_surrogate_report

ALGORITHM_CHOICES = [a.value for a in SurrogateAlgorithm] + ["all"]
STATISTIC_CHOICES = [s.value for s in Statistic] + ["all"]
DIRECTION_CHOICES = [d.value for d in Direction] + ["both"]


def _abort(message: object) -> None:
    click.echo(click.style(f"✗ {message}", fg="red"), err=True)
    raise SystemExit(1)


def _algorithms(choice: str) -> list[SurrogateAlgorithm]:
    return list(SurrogateAlgorithm) if choice == "all" else [SurrogateAlgorithm(choice)]


def _statistics(choice: str) -> list[Statistic]:
    return list(Statistic) if choice == "all" else [Statistic(choice)]


def _directions(choice: str) -> list[Direction]:
    return list(Direction) if choice == "both" else [Direction(choice)]


def _print_rejections(report: SurrogateReport) -> None:
    statistics = list(dict.fromkeys(r.statistic for r in report.rejections))
    algorithms = list(dict.fromkeys(r.algorithm for r in report.rejections))
    counts = {(r.algorithm, r.statistic): r for r in report.rejections}
    click.echo("rejected   " + "".join(f"{s.value:>10}" for s in statistics))
    for algorithm in algorithms:
        cells = []
        for statistic in statistics:
            row = counts.get((algorithm, statistic))
            cells.append(f"{row.rejected}/{row.total}" if row else "-")
        click.echo(f"{algorithm.value:<11}" + "".join(f"{c:>10}" for c in cells))


@tui()
@click.group()
@click.version_option(version=__version__, prog_name="opnet")
@click.option("--verbose", "-v", count=True, help="Log progress (-v info, -vv debug)")
def cli(verbose: int) -> None:
    """opnet - ordinal partition networks for time series.

    Map series onto forward and time-reversed ordinal networks, compute
    h_pe, h_cpe and h_gne, and compare groups or surrogates with p-value
    grids over (m, tau).

    Quick start:
        opnet analyze manifest.csv     Full pipeline over a group manifest
        opnet quantify rr.txt -m 3     Quantifiers of one series
        opnet lorenz-demo              Lorenz peaks vs surrogate nulls
        opnet tui                      Launch command explorer (Trogon)
    """
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "-c", "config_path", type=click.Path(exists=True, dir_okay=False), help="YAML or TOML run configuration")
@click.option("--output", "-o", "output_dir", help="Output directory")
@click.option("--m-min", type=int, help="Smallest embedding dimension")
@click.option("--m-max", type=int, help="Largest embedding dimension (≤ 20)")
@click.option("--tau-min", type=int, help="Smallest time lag")
@click.option("--tau-max", type=int, help="Largest time lag")
@click.option("--direction", type=click.Choice(DIRECTION_CHOICES), help="Mapping direction(s)")
@click.option("--statistic", type=click.Choice(STATISTIC_CHOICES), help="Quantifier(s) to compare")
@click.option("--series-length", type=int, help="Truncate every series to this many samples")
@click.option("--no-truncate", is_flag=True, help="Keep series at full length")
@click.option("--filter/--no-filter", "use_filter", default=None, help="Apply the adaptive RR filter")
@click.option("--filter-window", type=int, help="Running-mean window of the filter")
@click.option("--filter-reject-threshold", type=float, help="Largest modified fraction accepted")
@click.option("--surrogates/--no-surrogates", default=None, help="Run surrogate comparisons")
@click.option("--surrogate-alg", type=click.Choice(ALGORITHM_CHOICES), help="Surrogate algorithm(s)")
@click.option("--n-surrogates", type=int, help="Surrogates per series")
@click.option("--surrogate-mode", type=click.Choice([m.value for m in SurrogateMode]), help="Surrogate sample entering the group test")
@click.option("--gne-self-loops", type=click.Choice(["exclude", "include"]), help="Self-loop weight in the h_gne node weights")
@click.option("--seed", type=int, help="Top-level random seed")
@click.option("--n-jobs", "-j", type=int, help="Parallel workers (-1 for all cores)")
@click.option("--plot", is_flag=True, help="Render a PNG per grid (needs matplotlib)")
def analyze(
    manifest: str,
    config_path: Optional[str],
    output_dir: Optional[str],
    m_min: Optional[int],
    m_max: Optional[int],
    tau_min: Optional[int],
    tau_max: Optional[int],
    direction: Optional[str],
    statistic: Optional[str],
    series_length: Optional[int],
    no_truncate: bool,
    use_filter: Optional[bool],
    filter_window: Optional[int],
    filter_reject_threshold: Optional[float],
    surrogates: Optional[bool],
    surrogate_alg: Optional[str],
    n_surrogates: Optional[int],
    surrogate_mode: Optional[str],
    gne_self_loops: Optional[str],
    seed: Optional[int],
    n_jobs: Optional[int],
    plot: bool,
) -> None:
    """Run the full pipeline over a group manifest.

    Filters and truncates every series, quantifies it over the (m, tau)
    sweep in both directions, and writes quantifiers.csv, one CSV per
    p-value grid and report.json into the output directory. Flags
    override values from --config.
    """
    try:
        config = RunConfig.load(config_path) if config_path else RunConfig()
    except ConfigError as e:
        raise click.UsageError(str(e)) from None

    config.manifest = manifest
    overrides = {
        "output_dir": output_dir,
        "m_min": m_min,
        "m_max": m_max,
        "tau_min": tau_min,
        "tau_max": tau_max,
        "series_length": series_length,
        "gne_self_loops": gne_self_loops,
        "seed": seed,
        "n_jobs": n_jobs,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(config, name, value)
    if plot:
        config.plot = True
    if no_truncate:
        config.series_length = None
    if direction:
        config.directions = [d.value for d in _directions(direction)]
    if statistic:
        config.statistics = [s.value for s in _statistics(statistic)]
    if use_filter is not None:
        config.filter.enabled = use_filter
    if filter_window is not None:
        config.filter.window = filter_window
    if filter_reject_threshold is not None:
        config.filter.reject_threshold = filter_reject_threshold
    if surrogates is not None:
        config.surrogates.enabled = surrogates
    if surrogate_alg:
        config.surrogates.algorithms = [a.value for a in _algorithms(surrogate_alg)]
    if n_surrogates is not None:
        config.surrogates.n_surrogates = n_surrogates
    if surrogate_mode:
        config.surrogates.mode = surrogate_mode

    try:
        config.validate()
    except ConfigError as e:
        raise click.UsageError(str(e)) from None

    try:
        report = run_pipeline(config)
    except ConfigError as e:
        raise click.UsageError(str(e)) from None
    except PipelineError as e:
        for series_id, reason in e.reasons.items():
            click.echo(click.style(f"  {series_id}: {reason}", fg="yellow"), err=True)
        _abort(e)
    except OpnetError as e:
        _abort(e)

    for series_id, reason in report.rejected.items():
        click.echo(click.style(f"⏭ {series_id}: {reason}", fg="yellow"))
    for label, reason in report.skipped_comparisons.items():
        click.echo(click.style(f"⏭ {label}: {reason}", fg="yellow"))

    try:
        written = write_report(report, config.output_dir, plot=config.plot)
    except OpnetError as e:
        _abort(e)

    accepted = len({t.series_id for t in report.quantifiers})
    click.echo(click.style(f"✓ {accepted} series accepted, {len(report.rejected)} rejected", fg="green"))
    click.echo(click.style(f"✓ {len(report.grids)} grids, {len(written)} files in {config.output_dir}", fg="green"))


@cli.command("lorenz-demo")
@click.option("--n-series", default=10, show_default=True, help="Independent Lorenz runs")
@click.option("--n-peaks", default=1490, show_default=True, help="Peaks per series")
@click.option("-m", "m", default=3, show_default=True, help="Embedding dimension")
@click.option("--tau", default=1, show_default=True, help="Time lag")
@click.option("--surrogate-alg", type=click.Choice(ALGORITHM_CHOICES), default="all", show_default=True)
@click.option("--n-surrogates", type=click.IntRange(min=2), default=100, show_default=True, help="Surrogates per series")
@click.option("--statistic", type=click.Choice(STATISTIC_CHOICES), default="all", show_default=True)
@click.option("--seed", default=0, show_default=True, help="Top-level random seed")
@click.option("--dt", default=0.025, show_default=True, help="Integration step")
@click.option("--integrator", type=click.Choice(["rk4", "rk45"]), default="rk4", show_default=True)
@click.option("--n-jobs", "-j", default=1, show_default=True, help="Parallel workers")
@click.option("--output", "-o", "output_dir", default="opnet-lorenz", show_default=True)
def lorenz_demo(
    n_series: int,
    n_peaks: int,
    m: int,
    tau: int,
    surrogate_alg: str,
    n_surrogates: int,
    statistic: str,
    seed: int,
    dt: float,
    integrator: str,
    n_jobs: int,
    output_dir: str,
) -> None:
    """Test Lorenz x-peak series against all three surrogate nulls.

    Writes the peak series, lorenz_demo.json and a rejection-count table,
    and prints how many realizations rejected each null.
    """
    try:
        params = LorenzParams(dt=dt, seed=seed, integrator=integrator)
        embedding = EmbeddingParams(m=m, tau=tau)
    except ValueError as e:
        raise click.UsageError(str(e)) from None

    try:
        series = make_lorenz_peak_ensemble(params, n_series, n_peaks, n_jobs=n_jobs)
        report = surrogate_report(
            series,
            embedding,
            _algorithms(surrogate_alg),
            n_surrogates,
            _statistics(statistic),
            seed=seed,
            n_jobs=n_jobs,
            lorenz=params,
            config={"n_series": n_series, "n_peaks": n_peaks, "m": m, "tau": tau},
        )
        write_surrogate_report(report, output_dir, series, name="lorenz_demo")
    except OpnetError as e:
        _abort(e)

    _print_rejections(report)
    click.echo(click.style(f"✓ Wrote results to {output_dir}", fg="green"))


@cli.command("filter")
@click.argument("series_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "-o", help="Where to write the filtered series")
@click.option("--filter-window", default=5, show_default=True, help="Running-mean window")
@click.option("--filter-reject-threshold", default=0.10, show_default=True, help="Largest modified fraction accepted")
def filter_cmd(
    series_path: str,
    output: Optional[str],
    filter_window: int,
    filter_reject_threshold: float,
) -> None:
    """Apply the adaptive RR-interval filter to one tachogram."""
    try:
        settings = FilterSettings(window=filter_window, reject_threshold=filter_reject_threshold)
        series = load_series(series_path)
        filtered, report = adaptive_filter(series, settings)
    except OpnetError as e:
        _abort(e)

    click.echo(f"Series:    {report.series_id} ({report.original_length} beats)")
    click.echo(f"Removed:   {report.removed_count}")
    click.echo(f"Replaced:  {report.replaced_count}")
    click.echo(f"Modified:  {100 * report.modified_fraction:.2f}%")
    if report.accepted:
        click.echo(click.style("✓ Accepted", fg="green"))
    else:
        click.echo(click.style("✗ Rejected (too many modified beats)", fg="yellow"))
    if output:
        save_series(filtered, output)
        click.echo(f"Wrote {output}")


@cli.command()
@click.argument("series_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-m", "m", default=3, show_default=True, help="Embedding dimension")
@click.option("--tau", default=1, show_default=True, help="Time lag")
@click.option("--surrogate-alg", type=click.Choice(ALGORITHM_CHOICES), default="all", show_default=True)
@click.option("--n-surrogates", type=click.IntRange(min=2), default=100, show_default=True, help="Surrogates per algorithm")
@click.option("--statistic", type=click.Choice(STATISTIC_CHOICES), default="all", show_default=True)
@click.option("--seed", default=0, show_default=True, help="Top-level random seed")
@click.option("--n-jobs", "-j", default=1, show_default=True, help="Parallel workers")
@click.option("--output", "-o", "output_dir", help="Directory for surrogates.json")
def surrogate(
    series_path: str,
    m: int,
    tau: int,
    surrogate_alg: str,
    n_surrogates: int,
    statistic: str,
    seed: int,
    n_jobs: int,
    output_dir: Optional[str],
) -> None:
    """Rank-order surrogate test of a single series (forward direction)."""
    try:
        embedding = EmbeddingParams(m=m, tau=tau)
    except ValueError as e:
        raise click.UsageError(str(e)) from None

    try:
        series = load_series(series_path)
        report = surrogate_report(
            [series],
            embedding,
            _algorithms(surrogate_alg),
            n_surrogates,
            _statistics(statistic),
            seed=seed,
            n_jobs=n_jobs,
        )
        if output_dir:
            write_surrogate_report(report, output_dir)
    except OpnetError as e:
        _abort(e)

    for result in report.results:
        verdict = click.style("rejected", fg="red") if result.rejected else "not rejected"
        click.echo(
            f"{result.algorithm.value}  {result.statistic.value:<6} "
            f"q={result.q_d:.6f}  rank={result.rank}/{result.n_surrogates + 1}  "
            f"alpha={result.alpha:.2f}  {verdict}"
        )


@cli.command("quantify")
@click.argument("series_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-m", "m", default=3, show_default=True, help="Embedding dimension")
@click.option("--tau", default=1, show_default=True, help="Time lag")
@click.option("--gne-self-loops", type=click.Choice(["exclude", "include"]), default="exclude", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print JSON")
def quantify_cmd(series_path: str, m: int, tau: int, gne_self_loops: str, as_json: bool) -> None:
    """Print h_pe, h_cpe and h_gne of one series in both directions."""
    try:
        params = EmbeddingParams(m=m, tau=tau)
    except ValueError as e:
        raise click.UsageError(str(e)) from None

    try:
        series = load_series(series_path)
        triples = [quantify(series, params, d, gne_self_loops) for d in Direction]
    except OpnetError as e:
        _abort(e)

    if as_json:
        click.echo(json.dumps([t.model_dump(mode="json") for t in triples], indent=2))
        return
    click.echo(f"{series.id}  {params}")
    for t in triples:
        click.echo(
            f"  {t.direction.value:<8} h_pe={t.h_pe:.6f}  h_cpe={t.h_cpe:.6f}  "
            f"h_gne={t.h_gne:.6f}  nodes={t.n_nodes}  edges={t.n_edges}"
        )


@cli.command()
@click.argument("series_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-m", "m", default=3, show_default=True, help="Embedding dimension")
@click.option("--tau", default=1, show_default=True, help="Time lag")
@click.option("--direction", type=click.Choice([d.value for d in Direction]), default="forward", show_default=True)
@click.option("--output", "-o", help="Edge-list CSV path (default: <id>_m<m>_tau<tau>_<direction>.csv)")
def network(series_path: str, m: int, tau: int, direction: str, output: Optional[str]) -> None:
    """Export the ordinal network of one series as an edge-list CSV."""
    try:
        params = EmbeddingParams(m=m, tau=tau)
    except ValueError as e:
        raise click.UsageError(str(e)) from None

    try:
        series = load_series(series_path)
        net = build_network(extract_patterns(series, params, Direction(direction)))
        path = Path(output or f"{series.id}_m{m}_tau{tau}_{direction}.csv")
        write_edge_list(net, path)
    except OpnetError as e:
        _abort(e)

    click.echo(f"{net.n_nodes} nodes, {net.n_edges} edges, {net.forbidden_patterns} forbidden patterns")
    click.echo(click.style(f"✓ Wrote {path}", fg="green"))


@cli.command()
@click.option("--output", "-o", help="Write to a file instead of stdout")
def schema(output: Optional[str]) -> None:
    """Print the JSON Schema of report.json."""
    text = json.dumps(report_schema(), indent=2)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
        click.echo(click.style(f"✓ Wrote {output}", fg="green"))
    else:
        click.echo(text)


@cli.group()
def config() -> None:
    """Create and inspect run configuration files."""
    pass


@config.command("init")
@click.argument("path", default="opnet.yaml")
@click.option("--force", "-f", is_flag=True, help="Overwrite an existing file")
def config_init(path: str, force: bool) -> None:
    """Write a configuration file with every default."""
    if Path(path).exists() and not force:
        _abort(f"{path} already exists (use --force to overwrite)")
    RunConfig().save(path)
    click.echo(click.style(f"✓ Wrote {path}", fg="green"))


@config.command("show")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def config_show(path: str) -> None:
    """Validate a configuration file and print the effective values."""
    try:
        loaded = RunConfig.load(path)
    except ConfigError as e:
        _abort(e)
    click.echo(json.dumps(loaded.to_dict(), indent=2))


def main() -> None:
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
