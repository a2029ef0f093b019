"""Tests for ordinal patterns and their encoding."""

import math
from itertools import permutations

import numpy as np
import pytest

from opnet.errors import EmbeddingError
from opnet.models import Direction, EmbeddingParams, TimeSeries
from opnet.network import (
    OrdinalPattern,
    PatternSequence,
    decode_pattern,
    encode_pattern,
    encode_windows,
    extract_patterns,
)


def ranks_of(series, m: int, tau: int = 1, direction=Direction.FORWARD) -> list[tuple[int, ...]]:
    symbols = extract_patterns(
        TimeSeries.from_array(series, id="s"), EmbeddingParams(m=m, tau=tau), direction
    )
    return [p.ranks for p in symbols.symbols]


class TestOrdinalPattern:
    """Tests for OrdinalPattern."""

    def test_from_values(self) -> None:
        """Test a (high, low, mid) window ranks as {3,1,2}."""
        assert OrdinalPattern.from_values([9.0, 1.0, 4.0]).ranks == (3, 1, 2)

    def test_ties_go_to_earlier_sample(self) -> None:
        """Test equal samples rank in order of appearance."""
        assert OrdinalPattern.from_values([7, 7]).ranks == (1, 2)
        assert OrdinalPattern.from_values([2, 1, 2]).ranks == (2, 1, 3)

    def test_not_a_permutation(self) -> None:
        """Test invalid rank tuples are rejected."""
        with pytest.raises(ValueError):
            OrdinalPattern((1, 1, 2))

    def test_str(self) -> None:
        """Test the brace notation."""
        assert str(OrdinalPattern((3, 1, 2))) == "{3,1,2}"


class TestEncoding:
    """Tests for encode_pattern and decode_pattern."""

    def test_identity_is_zero(self) -> None:
        """Test the identity permutation encodes to 0."""
        assert encode_pattern(OrdinalPattern((1, 2, 3))) == 0

    def test_last_permutation(self) -> None:
        """Test {3,2,1} is the last code for m=3."""
        assert encode_pattern((3, 2, 1)) == 5

    def test_m4_covers_all_codes(self) -> None:
        """Test all 24 patterns of length 4 map onto 0..23."""
        codes = {encode_pattern(p) for p in permutations(range(1, 5))}
        assert codes == set(range(24))

    def test_injective_up_to_m8(self) -> None:
        """Test distinct permutations get distinct codes for every m <= 8."""
        for m in range(1, 9):
            codes = {encode_pattern(p) for p in permutations(range(1, m + 1))}
            assert len(codes) == math.factorial(m)
            assert max(codes) == math.factorial(m) - 1

    def test_decode_inverts_encode(self) -> None:
        """Test decode is the exact inverse for m <= 5."""
        for m in range(1, 6):
            for p in permutations(range(1, m + 1)):
                assert decode_pattern(encode_pattern(p), m).ranks == p

    def test_m20_fits(self) -> None:
        """Test the largest pattern length still encodes."""
        reversed_20 = tuple(range(20, 0, -1))
        assert encode_pattern(reversed_20) == math.factorial(20) - 1
        assert decode_pattern(math.factorial(20) - 1, 20).ranks == reversed_20

    def test_m21_rejected(self) -> None:
        """Test m above 20 is an error."""
        with pytest.raises(EmbeddingError):
            encode_pattern(tuple(range(1, 22)))

    def test_code_out_of_range(self) -> None:
        """Test decoding a code outside 0..m!-1."""
        with pytest.raises(ValueError):
            decode_pattern(6, 3)

    def test_windows_match_single_patterns(self, rng: np.random.Generator) -> None:
        """Test vectorized encoding agrees with per-window ranking, ties included."""
        windows = rng.integers(0, 3, size=(200, 4)).astype(float)
        codes = encode_windows(windows)
        expected = [OrdinalPattern.from_values(w).code for w in windows]
        assert codes.tolist() == expected


class TestExtractPatterns:
    """Tests for extract_patterns."""

    def test_monotone_series(self) -> None:
        """Test a rising series yields one repeated pattern."""
        assert ranks_of([1, 2, 3, 4], m=3) == [(1, 2, 3), (1, 2, 3)]

    def test_worked_example(self) -> None:
        """Test hand-ranked m=2 patterns."""
        assert ranks_of([0.5, 0.2, 0.9, 0.1], m=2) == [(2, 1), (1, 2), (2, 1)]

    def test_tie(self) -> None:
        """Test a tie is broken by order of appearance."""
        assert ranks_of([7, 7], m=2) == [(1, 2)]

    def test_lagged_windows(self) -> None:
        """Test windows skip tau - 1 samples between entries."""
        series = [9, 5, 1, 3, 4, 8, 2]
        assert ranks_of(series, m=3, tau=2)[:2] == [(3, 1, 2), (2, 1, 3)]

    def test_reverse_direction(self) -> None:
        """Test the reverse direction reads the series right to left."""
        series = [9, 5, 1, 3, 4, 8, 2]
        # Reversed: 2, 8, 4, 3, 1, 5, 9
        assert ranks_of(series, m=3, tau=2, direction=Direction.REVERSE)[:2] == [
            (2, 3, 1),
            (3, 1, 2),
        ]

    def test_symbol_count(self, rng: np.random.Generator) -> None:
        """Test |symbols| = N - (m-1) tau."""
        values = rng.standard_normal(50)
        for m in range(1, 6):
            for tau in range(1, 4):
                symbols = extract_patterns(values, EmbeddingParams(m=m, tau=tau))
                assert len(symbols) == 50 - (m - 1) * tau

    def test_too_short(self) -> None:
        """Test a single embedding vector is not enough."""
        with pytest.raises(EmbeddingError):
            extract_patterns(np.array([1.0, 2.0, 3.0]), EmbeddingParams(m=3, tau=1))

    def test_reversal_identity(self, rng: np.random.Generator) -> None:
        """Test reverse direction equals forward on the reversed series."""
        for i in range(100):
            series = TimeSeries.from_array(rng.standard_normal(40), id=f"s{i}")
            for m in range(1, 6):
                for tau in range(1, 4):
                    params = EmbeddingParams(m=m, tau=tau)
                    reverse = extract_patterns(series, params, Direction.REVERSE)
                    forward = extract_patterns(series.reversed(), params, Direction.FORWARD)
                    assert np.array_equal(reverse.codes, forward.codes)

    def test_monotone_transform_invariance(self, rng: np.random.Generator) -> None:
        """Test x -> exp(x) leaves every pattern unchanged."""
        for _ in range(50):
            values = rng.standard_normal(60)
            for m, tau in [(2, 1), (3, 2), (5, 1)]:
                params = EmbeddingParams(m=m, tau=tau)
                assert np.array_equal(
                    extract_patterns(values, params).codes,
                    extract_patterns(np.exp(values), params).codes,
                )

    def test_series_id_and_direction(self) -> None:
        """Test the sequence remembers where it came from."""
        series = TimeSeries.from_array([1, 3, 2, 4], id="subject")
        symbols = extract_patterns(series, EmbeddingParams(m=2, tau=1), Direction.REVERSE)
        assert symbols.series_id == "subject"
        assert symbols.direction is Direction.REVERSE


class TestPatternSequence:
    """Tests for PatternSequence."""

    def test_from_patterns(self) -> None:
        """Test building from decoded patterns."""
        params = EmbeddingParams(m=3, tau=1)
        patterns = [OrdinalPattern((1, 2, 3)), OrdinalPattern((3, 2, 1))]
        sequence = PatternSequence.from_patterns(patterns, params)
        assert sequence.codes.tolist() == [0, 5]
        assert sequence.symbols == tuple(patterns)

    def test_wrong_length_pattern(self) -> None:
        """Test all patterns must have length m."""
        with pytest.raises(ValueError):
            PatternSequence.from_patterns([OrdinalPattern((1, 2))], EmbeddingParams(m=3, tau=1))

    def test_codes_read_only(self) -> None:
        """Test codes cannot be modified in place."""
        sequence = PatternSequence(np.array([0, 1]), EmbeddingParams(m=2, tau=1))
        with pytest.raises(ValueError):
            sequence.codes[0] = 1

    def test_out_of_range_code(self) -> None:
        """Test codes must lie in 0..m!-1."""
        with pytest.raises(ValueError):
            PatternSequence(np.array([0, 2]), EmbeddingParams(m=2, tau=1))
