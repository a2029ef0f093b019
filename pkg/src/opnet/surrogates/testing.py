"""Surrogate ensembles and the rank-order significance test."""

import logging
import math
from collections.abc import Sequence
from typing import Optional, Union

import numpy as np
from joblib import Parallel, delayed

from opnet.errors import OpnetError
from opnet.models import (
    Direction,
    EmbeddingParams,
    QuantifierTriple,
    Statistic,
    SurrogateAlgorithm,
    SurrogateEnsemble,
    SurrogateTestResult,
    TimeSeries,
)
from opnet.network.quantifiers import SelfLoops, quantify
from opnet.surrogates.base import SurrogateRegistry

logger = logging.getLogger(__name__)

# Smallest ensemble for which a two-sided rank test can reach p = 0.05
MIN_SURROGATES_TWO_SIDED = 39
# Below two values a tie has no rank strictly between the extremes
MIN_SURROGATES = 2


def generate_ensemble(
    series: TimeSeries,
    algorithm: Union[SurrogateAlgorithm, str],
    n_surrogates: int,
    seed: int = 0,
    n_jobs: int = 1,
    registry: Optional[SurrogateRegistry] = None,
) -> SurrogateEnsemble:
    """Draw ``n_surrogates`` realizations of one null hypothesis.

    Surrogate i uses the stream derived from (seed, algorithm, series id, i),
    so the ensemble does not depend on ``n_jobs``.
    """
    if n_surrogates < 1:
        raise OpnetError("n_surrogates must be at least 1")
    generator = (registry or SurrogateRegistry.default()).get(algorithm)
    members = Parallel(n_jobs=n_jobs)(
        delayed(generator.surrogate)(series, seed, i) for i in range(n_surrogates)
    )
    return SurrogateEnsemble(
        algorithm=generator.algorithm,
        members=tuple(members),
        source_id=series.id,
        seed=seed,
    )


def rank_order_test(
    q_d: float,
    q_surr: Sequence[float],
    statistic: Optional[Statistic] = None,
    algorithm: Optional[SurrogateAlgorithm] = None,
    series_id: Optional[str] = None,
    seed: Optional[int] = None,
) -> SurrogateTestResult:
    """Two-sided rank-order test of ``q_d`` against surrogate values.

    The null is rejected iff q_d is strictly below or strictly above every
    surrogate value. Without ties ``rank`` is q_d's 1-based position in the
    pooled ascending list. Ties place q_d in the middle of its tie block,
    kept inside [2, N] so a tie never counts as an extreme. ``alpha`` is
    |q_d - mean| / std (ddof=1); a zero spread gives infinity (0 when q_d
    equals the mean) and sets ``alpha_degenerate``.
    """
    values = np.asarray(q_surr, dtype=np.float64)
    n = values.size
    if n < MIN_SURROGATES:
        raise OpnetError(f"q_surr needs at least {MIN_SURROGATES} values, got {n}")
    if n < MIN_SURROGATES_TWO_SIDED:
        logger.warning(
            "%d surrogates cannot reach a two-sided 0.05 level (need %d)",
            n,
            MIN_SURROGATES_TWO_SIDED,
        )

    less = int(np.count_nonzero(values < q_d))
    ties = int(np.count_nonzero(values == q_d))
    greater = n - less - ties
    rejected = less == n or greater == n

    rank = 1 + less
    if ties:
        rank += math.ceil(ties / 2)
        rank = min(max(rank, 2), n)

    mean = float(values.mean())
    spread = float(values.std(ddof=1)) if n > 1 else 0.0
    if spread > 0:
        alpha, degenerate = abs(q_d - mean) / spread, False
    else:
        alpha, degenerate = (0.0 if q_d == mean else math.inf), True

    return SurrogateTestResult(
        q_d=float(q_d),
        q_surr=tuple(values.tolist()),
        rank=rank,
        alpha=alpha,
        alpha_degenerate=degenerate,
        rejected=rejected,
        significance_level=2.0 / (n + 1),
        statistic=statistic,
        algorithm=algorithm,
        series_id=series_id,
        seed=seed,
    )


def quantify_ensemble(
    ensemble: SurrogateEnsemble,
    params: EmbeddingParams,
    self_loops: SelfLoops = "exclude",
    n_jobs: int = 1,
) -> list[QuantifierTriple]:
    """Forward-direction quantifiers of every ensemble member."""
    return Parallel(n_jobs=n_jobs)(
        delayed(quantify)(member, params, Direction.FORWARD, self_loops)
        for member in ensemble.members
    )


def run_surrogate_tests(
    series: TimeSeries,
    params: EmbeddingParams,
    algorithm: Union[SurrogateAlgorithm, str],
    n_surrogates: int = 100,
    statistics: Sequence[Statistic] = tuple(Statistic),
    seed: int = 0,
    n_jobs: int = 1,
    self_loops: SelfLoops = "exclude",
) -> dict[Statistic, SurrogateTestResult]:
    """Test several statistics against one shared surrogate ensemble.

    Quantifiers use the forward direction only.
    """
    params.check_length(len(series))
    algorithm = SurrogateAlgorithm(algorithm)
    ensemble = generate_ensemble(series, algorithm, n_surrogates, seed, n_jobs)
    original = quantify(series, params, Direction.FORWARD, self_loops)
    surrogates = quantify_ensemble(ensemble, params, self_loops, n_jobs)
    logger.info(
        "Surrogate test %s on %s at %s with %d surrogates",
        algorithm.value,
        series.id,
        params,
        n_surrogates,
    )
    return {
        Statistic(stat): rank_order_test(
            original.value(stat),
            [t.value(stat) for t in surrogates],
            statistic=Statistic(stat),
            algorithm=algorithm,
            series_id=series.id,
            seed=seed,
        )
        for stat in statistics
    }


def run_surrogate_battery(
    series: TimeSeries,
    params: EmbeddingParams,
    algorithm: Union[SurrogateAlgorithm, str],
    n_surrogates: int = 100,
    statistic: Statistic = Statistic.H_PE,
    seed: int = 0,
    n_jobs: int = 1,
    self_loops: SelfLoops = "exclude",
) -> SurrogateTestResult:
    """Rank-order test of one statistic of ``series`` against its surrogates."""
    statistic = Statistic(statistic)
    results = run_surrogate_tests(
        series, params, algorithm, n_surrogates, (statistic,), seed, n_jobs, self_loops
    )
    return results[statistic]
