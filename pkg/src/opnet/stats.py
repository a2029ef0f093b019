"""Mann-Whitney U test and the (m, tau) p-value grids built on it."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import norm, rankdata, tiecorrect

from opnet.errors import DatasetError, OpnetError
from opnet.models import (
    Comparison,
    Direction,
    EmbeddingParams,
    GridCell,
    GroupedDataset,
    GroupSummary,
    MannWhitneyMethod,
    MannWhitneyResult,
    PValueGrid,
    Statistic,
    SurrogateAlgorithm,
    SurrogateMode,
    Sweep,
    TimeSeries,
)
from opnet.network.quantifiers import QuantifierTable, SelfLoops, quantify_many, quantify_series
from opnet.surrogates.testing import generate_ensemble

logger = logging.getLogger(__name__)

# Largest n1 * n2 for which "auto" uses the exact null distribution
EXACT_MAX_PRODUCT = 400

# Largest n1 * n2 accepted when the exact method is forced
EXACT_FORCED_MAX_PRODUCT = 10_000


def _rank_sum_distribution(doubled_ranks: np.ndarray, n1: int) -> np.ndarray:
    """Counts of every doubled rank sum over all size-n1 subsets of the ranks.

    Index s of the result is the number of subsets whose doubled ranks add
    up to s. Doubling keeps midranks integral.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros((n1 + 1, total + 1), dtype=np.float64)
    counts[0, 0] = 1.0
    for r in doubled_ranks:
        r = int(r)
        # Overlapping in-place ufunc: numpy buffers, so each rank is used once
        counts[1:, r:] += counts[:-1, : total + 1 - r]
    return counts[n1]


def _exact_p_value(ranks: np.ndarray, n1: int) -> float:
    doubled = np.rint(2 * ranks).astype(np.int64)
    observed = int(doubled[:n1].sum())
    distribution = _rank_sum_distribution(doubled, n1)
    total = distribution.sum()
    lower = distribution[: observed + 1].sum() / total
    upper = distribution[observed:].sum() / total
    return min(1.0, 2.0 * min(lower, upper))


def _normal_p_value(ranks: np.ndarray, u: float, n1: int, n2: int) -> float:
    correction = tiecorrect(ranks)
    if correction == 0:
        return 1.0
    sd = math.sqrt(correction * n1 * n2 * (n1 + n2 + 1) / 12.0)
    distance = max(abs(u - n1 * n2 / 2.0) - 0.5, 0.0)
    return min(1.0, float(2.0 * norm.sf(distance / sd)))


def mann_whitney(
    sample_a: Sequence[float],
    sample_b: Sequence[float],
    method: Union[MannWhitneyMethod, str] = "auto",
) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test.

    U is reported for ``sample_a`` (the number of pairs a > b, ties counting
    one half). With ``method="auto"`` the exact permutation distribution is
    used when n1 * n2 <= 400 and there are no ties, otherwise the normal
    approximation with continuity and tie correction. Forcing ``"exact"``
    also handles ties, through the distribution of midrank sums.

    Raises:
        OpnetError: a sample is empty, or exact is forced on samples too large
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise OpnetError("Mann-Whitney test needs two non-empty samples")

    ranks = rankdata(np.concatenate((a, b)))
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    has_ties = np.unique(ranks).size < ranks.size

    if method == "auto":
        exact = n1 * n2 <= EXACT_MAX_PRODUCT and not has_ties
    else:
        exact = MannWhitneyMethod(method) is MannWhitneyMethod.EXACT
        if exact and n1 * n2 > EXACT_FORCED_MAX_PRODUCT:
            raise OpnetError(
                f"exact Mann-Whitney supports n1*n2 <= {EXACT_FORCED_MAX_PRODUCT}, got {n1 * n2}"
            )

    if exact:
        return MannWhitneyResult(
            u_statistic=u, p_value=_exact_p_value(ranks, n1), method=MannWhitneyMethod.EXACT
        )
    return MannWhitneyResult(
        u_statistic=u,
        p_value=_normal_p_value(ranks, u, n1, n2),
        method=MannWhitneyMethod.NORMAL_APPROX,
    )


def _require_members(dataset: GroupedDataset, group: str, minimum: int = 2) -> list[TimeSeries]:
    members = dataset.members(group)
    if len(members) < minimum:
        raise DatasetError(
            f"group '{group}' has {len(members)} member(s); need ≥ {minimum} members"
        )
    return members


def _too_short(members: Sequence[TimeSeries], params: EmbeddingParams) -> Optional[str]:
    short = [s.id for s in members if not params.is_valid_for(len(s))]
    if not short:
        return None
    return f"series too short for m={params.m}, tau={params.tau}: {', '.join(short)}"


def _invalid_cell(params: EmbeddingParams, reason: str) -> GridCell:
    logger.warning("Invalid cell (m=%d, tau=%d): %s", params.m, params.tau, reason)
    return GridCell(m=params.m, tau=params.tau, reason=reason)


def _test_cell(
    params: EmbeddingParams,
    a: Optional[list[float]],
    b: Optional[list[float]],
) -> GridCell:
    if a is None or b is None:
        return _invalid_cell(params, "quantifiers missing")
    result = mann_whitney(a, b)
    return GridCell(
        m=params.m,
        tau=params.tau,
        p_value=result.p_value,
        u_statistic=result.u_statistic,
        method=result.method,
        n_a=len(a),
        n_b=len(b),
    )


def _ensure_table(
    table: Optional[QuantifierTable],
    members: Sequence[TimeSeries],
    sweep: Sweep,
    directions: Sequence[Direction],
    self_loops: SelfLoops,
    n_jobs: int,
) -> QuantifierTable:
    if table is not None:
        return table
    return quantify_many(members, sweep, directions, self_loops, n_jobs)


def intragroup_asymmetry_grid(
    dataset: GroupedDataset,
    group: str,
    sweep: Sweep,
    statistic: Statistic,
    table: Optional[QuantifierTable] = None,
    self_loops: SelfLoops = "exclude",
    n_jobs: int = 1,
) -> PValueGrid:
    """Forward vs reverse quantifiers of one group, per (m, tau)."""
    members = _require_members(dataset, group)
    ids = [s.id for s in members]
    table = _ensure_table(
        table, members, sweep, (Direction.FORWARD, Direction.REVERSE), self_loops, n_jobs
    )

    cells = []
    for params in sweep.pairs():
        reason = _too_short(members, params)
        if reason:
            cells.append(_invalid_cell(params, reason))
            continue
        forward = table.values(ids, params, Direction.FORWARD, statistic)
        reverse = table.values(ids, params, Direction.REVERSE, statistic)
        cells.append(_test_cell(params, forward, reverse))

    return PValueGrid(
        comparison=Comparison.INTRAGROUP,
        statistic=statistic,
        groups=(group,),
        cells=tuple(cells),
    )


def intergroup_grid(
    dataset: GroupedDataset,
    group_a: str,
    group_b: str,
    direction: Direction,
    sweep: Sweep,
    statistic: Statistic,
    table: Optional[QuantifierTable] = None,
    self_loops: SelfLoops = "exclude",
    n_jobs: int = 1,
) -> PValueGrid:
    """Group A vs group B quantifiers in one direction, per (m, tau)."""
    members_a = _require_members(dataset, group_a)
    members_b = _require_members(dataset, group_b)
    ids_a = [s.id for s in members_a]
    ids_b = [s.id for s in members_b]
    direction = Direction(direction)
    table = _ensure_table(table, members_a + members_b, sweep, (direction,), self_loops, n_jobs)

    cells = []
    for params in sweep.pairs():
        reason = _too_short(members_a + members_b, params)
        if reason:
            cells.append(_invalid_cell(params, reason))
            continue
        cells.append(
            _test_cell(
                params,
                table.values(ids_a, params, direction, statistic),
                table.values(ids_b, params, direction, statistic),
            )
        )

    return PValueGrid(
        comparison=Comparison.INTERGROUP,
        statistic=statistic,
        groups=(group_a, group_b),
        direction=direction,
        cells=tuple(cells),
    )


@dataclass
class SurrogateQuantifiers:
    """Forward quantifiers of every surrogate, grouped by source series."""

    algorithm: SurrogateAlgorithm
    member_ids: dict[str, tuple[str, ...]] = field(default_factory=dict)
    table: QuantifierTable = field(default_factory=QuantifierTable)

    def sample(
        self,
        source_ids: Sequence[str],
        params: EmbeddingParams,
        statistic: Statistic,
        mode: SurrogateMode = SurrogateMode.SUBJECT_MEANS,
    ) -> Optional[list[float]]:
        """Surrogate sample for a group: one mean per subject, or every value pooled."""
        sample: list[float] = []
        for source_id in source_ids:
            values = self.table.values(
                self.member_ids.get(source_id, ()), params, Direction.FORWARD, statistic
            )
            if not values:
                return None
            if SurrogateMode(mode) is SurrogateMode.SUBJECT_MEANS:
                sample.append(float(np.mean(values)))
            else:
                sample.extend(values)
        return sample


def quantify_surrogates(
    series: Sequence[TimeSeries],
    algorithm: Union[SurrogateAlgorithm, str],
    n_surrogates: int,
    sweep: Sweep,
    seed: int = 0,
    self_loops: SelfLoops = "exclude",
    n_jobs: int = 1,
) -> SurrogateQuantifiers:
    """Draw an ensemble per series and quantify every member over the sweep."""
    algorithm = SurrogateAlgorithm(algorithm)
    result = SurrogateQuantifiers(algorithm=algorithm)
    pairs = sweep.pairs()
    for s in series:
        ensemble = generate_ensemble(s, algorithm, n_surrogates, seed, n_jobs)
        result.member_ids[s.id] = tuple(member.id for member in ensemble.members)
        per_member = Parallel(n_jobs=n_jobs)(
            delayed(quantify_series)(member, pairs, (Direction.FORWARD,), self_loops)
            for member in ensemble.members
        )
        for triples in per_member:
            for triple in triples:
                result.table.add(triple)
    logger.info(
        "Quantified %d %s surrogates for each of %d series",
        n_surrogates,
        algorithm.value,
        len(series),
    )
    return result


def surrogate_comparison_grid(
    dataset: GroupedDataset,
    group: str,
    algorithm: Union[SurrogateAlgorithm, str],
    sweep: Sweep,
    statistic: Statistic,
    n_surrogates: int = 100,
    mode: Union[SurrogateMode, str] = SurrogateMode.SUBJECT_MEANS,
    seed: int = 0,
    table: Optional[QuantifierTable] = None,
    surrogates: Optional[SurrogateQuantifiers] = None,
    self_loops: SelfLoops = "exclude",
    n_jobs: int = 1,
) -> PValueGrid:
    """Original quantifiers of a group vs their surrogates, per (m, tau).

    Forward direction only. ``mode`` picks the surrogate sample: per-subject
    means (default) or all surrogate values pooled.
    """
    members = _require_members(dataset, group, minimum=1)
    ids = [s.id for s in members]
    algorithm = SurrogateAlgorithm(algorithm)
    mode = SurrogateMode(mode)
    table = _ensure_table(table, members, sweep, (Direction.FORWARD,), self_loops, n_jobs)
    if surrogates is None:
        surrogates = quantify_surrogates(
            members, algorithm, n_surrogates, sweep, seed, self_loops, n_jobs
        )
    elif surrogates.algorithm is not algorithm:
        raise OpnetError(
            f"surrogate quantifiers are for {surrogates.algorithm.value}, not {algorithm.value}"
        )

    cells = []
    for params in sweep.pairs():
        reason = _too_short(members, params)
        if reason:
            cells.append(_invalid_cell(params, reason))
            continue
        cells.append(
            _test_cell(
                params,
                table.values(ids, params, Direction.FORWARD, statistic),
                surrogates.sample(ids, params, statistic, mode),
            )
        )

    return PValueGrid(
        comparison=Comparison.SURROGATE,
        statistic=statistic,
        groups=(group,),
        direction=Direction.FORWARD,
        algorithm=algorithm,
        mode=mode,
        cells=tuple(cells),
    )


def summarize_groups(
    dataset: GroupedDataset,
    table: QuantifierTable,
    sweep: Sweep,
    directions: Sequence[Direction] = (Direction.FORWARD, Direction.REVERSE),
    statistics: Sequence[Statistic] = tuple(Statistic),
) -> list[GroupSummary]:
    """Mean and sample standard deviation per (group, m, tau, direction, statistic)."""
    summaries = []
    for group, ids in dataset.groups.items():
        for params in sweep.pairs():
            for direction in directions:
                for statistic in statistics:
                    values = table.values(ids, params, direction, statistic)
                    if not values:
                        continue
                    summaries.append(
                        GroupSummary(
                            group=group,
                            m=params.m,
                            tau=params.tau,
                            direction=direction,
                            statistic=statistic,
                            n=len(values),
                            mean=float(np.mean(values)),
                            std=float(np.std(values, ddof=1)) if len(values) > 1 else 0.0,
                        )
                    )
    return summaries
