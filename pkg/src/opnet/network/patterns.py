"""Ordinal patterns, their Lehmer-code encoding and pattern extraction.

A pattern of length m is stored as its Lehmer-code index in 0..m!-1, so a
sequence of patterns is a plain int64 array whatever m is. ``m!`` itself is
never materialized.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from opnet.errors import EmbeddingError
from opnet.models import MAX_EMBEDDING_DIMENSION, Direction, EmbeddingParams, TimeSeries

_FACTORIALS = tuple(math.factorial(k) for k in range(MAX_EMBEDDING_DIMENSION + 1))


@dataclass(frozen=True)
class OrdinalPattern:
    """Rank permutation of one embedding vector; rank 1 is the smallest sample."""

    ranks: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.ranks) != list(range(1, len(self.ranks) + 1)):
            raise ValueError(f"{self.ranks} is not a permutation of 1..{len(self.ranks)}")

    @property
    def m(self) -> int:
        return len(self.ranks)

    @property
    def code(self) -> int:
        """Lehmer-code index of this pattern."""
        return encode_pattern(self)

    @classmethod
    def from_values(cls, window: Iterable[float]) -> "OrdinalPattern":
        """Rank one window; ties go to the earlier sample."""
        values = list(window)
        order = sorted(range(len(values)), key=values.__getitem__)
        ranks = [0] * len(values)
        for rank, position in enumerate(order, start=1):
            ranks[position] = rank
        return cls(tuple(ranks))

    def __str__(self) -> str:
        return "{" + ",".join(str(r) for r in self.ranks) + "}"


def _check_dimension(m: int) -> None:
    if m < 1:
        raise EmbeddingError("pattern length must be at least 1")
    if m > MAX_EMBEDDING_DIMENSION:
        raise EmbeddingError(
            f"m={m} exceeds {MAX_EMBEDDING_DIMENSION}: m! does not fit a 64-bit code"
        )


def encode_pattern(pattern: Union[OrdinalPattern, Iterable[int]]) -> int:
    """Lehmer-code index of a pattern, a bijection onto 0..m!-1.

    Digit k counts the later positions holding a smaller rank.
    """
    ranks = pattern.ranks if isinstance(pattern, OrdinalPattern) else tuple(pattern)
    m = len(ranks)
    _check_dimension(m)
    code = 0
    for k, rank in enumerate(ranks):
        smaller_later = sum(1 for r in ranks[k + 1 :] if r < rank)
        code += smaller_later * _FACTORIALS[m - 1 - k]
    return code


@lru_cache(maxsize=65536)
def decode_pattern(code: int, m: int) -> OrdinalPattern:
    """Inverse of encode_pattern."""
    _check_dimension(m)
    if not 0 <= code < _FACTORIALS[m]:
        raise ValueError(f"code {code} out of range for m={m}")
    available = list(range(1, m + 1))
    ranks = []
    for k in range(m):
        digit, code = divmod(code, _FACTORIALS[m - 1 - k])
        ranks.append(available.pop(digit))
    return OrdinalPattern(tuple(ranks))


def encode_windows(windows: np.ndarray) -> np.ndarray:
    """Lehmer codes of every row of a (L, m) window matrix.

    The digit for position k is the number of later samples strictly
    smaller than sample k, which is the rank comparison with ties broken
    by order of appearance.
    """
    n_windows, m = windows.shape
    _check_dimension(m)
    codes = np.zeros(n_windows, dtype=np.int64)
    for k in range(m - 1):
        smaller_later = (windows[:, k + 1 :] < windows[:, k : k + 1]).sum(axis=1)
        codes += smaller_later.astype(np.int64) * np.int64(_FACTORIALS[m - 1 - k])
    return codes


@dataclass(frozen=True, eq=False)
class PatternSequence:
    """Time-ordered ordinal patterns of one series, as Lehmer codes."""

    codes: np.ndarray
    params: EmbeddingParams
    direction: Direction = Direction.FORWARD
    series_id: str = ""

    def __post_init__(self) -> None:
        codes = np.array(self.codes, dtype=np.int64)
        if codes.ndim != 1:
            raise ValueError("codes must be one-dimensional")
        if codes.size and (codes.min() < 0 or codes.max() >= _FACTORIALS[self.params.m]):
            raise ValueError(f"codes out of range for m={self.params.m}")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    def __len__(self) -> int:
        return int(self.codes.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatternSequence):
            return NotImplemented
        return (
            self.params == other.params
            and self.direction == other.direction
            and np.array_equal(self.codes, other.codes)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def symbols(self) -> tuple[OrdinalPattern, ...]:
        """Decoded patterns, in order."""
        m = self.params.m
        return tuple(decode_pattern(int(c), m) for c in self.codes)

    @classmethod
    def from_patterns(
        cls,
        patterns: Iterable[OrdinalPattern],
        params: EmbeddingParams,
        direction: Direction = Direction.FORWARD,
    ) -> "PatternSequence":
        patterns = list(patterns)
        if any(p.m != params.m for p in patterns):
            raise ValueError(f"every pattern must have length m={params.m}")
        return cls(np.array([p.code for p in patterns], dtype=np.int64), params, direction)


def extract_patterns(
    series: Union[TimeSeries, np.ndarray],
    params: EmbeddingParams,
    direction: Direction = Direction.FORWARD,
) -> PatternSequence:
    """Map a series to its ordinal pattern sequence.

    Forward uses z_i = (x_i, x_{i+tau}, ..., x_{i+(m-1)tau}) for every i
    (stride 1). Reverse runs the same procedure on (x_N, ..., x_1).

    Raises:
        EmbeddingError: fewer than two embedding vectors
    """
    if isinstance(series, TimeSeries):
        values, series_id = series.to_array(), series.id
    else:
        values, series_id = np.asarray(series, dtype=np.float64).ravel(), ""
    params.check_length(values.size)

    if Direction(direction) is Direction.REVERSE:
        values = values[::-1]
    windows = sliding_window_view(values, params.span)[:, :: params.tau]
    return PatternSequence(encode_windows(windows), params, Direction(direction), series_id)
