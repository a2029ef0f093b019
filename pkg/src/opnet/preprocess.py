"""Adaptive RR-interval filter.

Pass 1 drops physiologically impossible beats (outside 350..1200 ms).
Pass 2 walks the surviving beats left to right and replaces a beat that
differs by more than 20% from BOTH neighbours with the mean of the last
``window`` accepted beats. The replacement is pulled to within the
adjacency threshold of its left neighbour, so refiltering the output
changes nothing. The first and last beats only face pass 1.
A series whose modified fraction exceeds ``reject_threshold`` is flagged
as not accepted.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass

from opnet.errors import FilterError
from opnet.models import FilterReport, TimeSeries

logger = logging.getLogger(__name__)

DEFAULT_MIN_RR_MS = 350.0
DEFAULT_MAX_RR_MS = 1200.0
DEFAULT_ADJACENT_CHANGE = 0.20
DEFAULT_WINDOW = 5
DEFAULT_REJECT_THRESHOLD = 0.10


@dataclass(frozen=True)
class FilterSettings:
    """Adaptive filter parameters."""

    min_rr_ms: float = DEFAULT_MIN_RR_MS
    max_rr_ms: float = DEFAULT_MAX_RR_MS
    adjacent_change: float = DEFAULT_ADJACENT_CHANGE
    window: int = DEFAULT_WINDOW
    reject_threshold: float = DEFAULT_REJECT_THRESHOLD

    def __post_init__(self) -> None:
        if self.window < 1:
            raise FilterError("filter window must be at least 1")
        if not 0.0 <= self.reject_threshold <= 1.0:
            raise FilterError("reject threshold must lie in [0, 1]")
        if self.min_rr_ms >= self.max_rr_ms:
            raise FilterError("min_rr_ms must be below max_rr_ms")


def _relative_change(value: float, reference: float) -> float:
    return abs(value - reference) / reference


def _close(a: float, b: float, limit: float) -> bool:
    return _relative_change(a, b) <= limit and _relative_change(b, a) <= limit


def _pull_towards(value: float, anchor: float, limit: float) -> float:
    """Clamp ``value`` into the band where it and ``anchor`` are mutually close."""
    candidate = min(max(value, anchor / (1 + limit)), anchor * (1 + limit))
    while not _close(candidate, anchor, limit):
        candidate = math.nextafter(candidate, anchor)
    return candidate


def adaptive_filter(
    series: TimeSeries,
    settings: FilterSettings = FilterSettings(),
) -> tuple[TimeSeries, FilterReport]:
    """Filter a tachogram.

    Args:
        series: RR intervals in milliseconds, at least 3 samples
        settings: Bounds, adjacency threshold, running-mean window and
            rejection threshold

    Returns:
        The filtered series and its FilterReport

    Raises:
        FilterError: fewer than 3 samples on input, or fewer than 2 left
            after pass 1
    """
    original_length = len(series)
    if original_length < 3:
        raise FilterError(f"series '{series.id}' needs at least 3 samples to filter")

    kept = [v for v in series.values if settings.min_rr_ms <= v <= settings.max_rr_ms]
    removed = original_length - len(kept)
    if len(kept) < 2:
        raise FilterError(
            f"series '{series.id}' has {len(kept)} samples inside "
            f"[{settings.min_rr_ms:g}, {settings.max_rr_ms:g}] ms"
        )

    output = [kept[0]]
    accepted: deque[float] = deque([kept[0]], maxlen=settings.window)
    replaced = 0
    for i in range(1, len(kept) - 1):
        value = kept[i]
        # Left neighbour is the already-filtered beat, right one the raw beat
        outlier = (
            _relative_change(value, output[-1]) > settings.adjacent_change
            and _relative_change(value, kept[i + 1]) > settings.adjacent_change
        )
        if outlier:
            mean = sum(accepted) / len(accepted)
            output.append(_pull_towards(mean, output[-1], settings.adjacent_change))
            replaced += 1
        else:
            output.append(value)
            accepted.append(value)
    output.append(kept[-1])

    modified_fraction = (removed + replaced) / original_length
    report = FilterReport(
        series_id=series.id,
        original_length=original_length,
        removed_count=removed,
        replaced_count=replaced,
        modified_fraction=modified_fraction,
        reject_threshold=settings.reject_threshold,
        accepted=modified_fraction <= settings.reject_threshold,
    )
    if not report.accepted:
        logger.warning(
            "Series %s: %.1f%% of beats modified (limit %.1f%%)",
            series.id,
            100 * modified_fraction,
            100 * settings.reject_threshold,
        )
    return series.with_values(output), report
