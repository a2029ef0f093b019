"""Tests for the Mann-Whitney test and the p-value grids."""

from itertools import combinations

import numpy as np
import pytest

from opnet.errors import DatasetError, OpnetError
from opnet.models import (
    Comparison,
    Direction,
    GroupedDataset,
    MannWhitneyMethod,
    Statistic,
    SurrogateAlgorithm,
    SurrogateMode,
    Sweep,
    TimeSeries,
)
from opnet.network import quantify_many
from opnet.stats import (
    intergroup_grid,
    intragroup_asymmetry_grid,
    mann_whitney,
    quantify_surrogates,
    summarize_groups,
    surrogate_comparison_grid,
)
from tests.synthetic import logistic_map


def brute_force_p(a: list[float], b: list[float]) -> float:
    """Two-sided exact p-value by enumerating every split of the pooled ranks."""
    pooled = sorted(a + b)
    ranks = {v: i + 1 for i, v in enumerate(pooled)}
    observed = sum(ranks[v] for v in a)
    sums = [sum(c) for c in combinations(range(1, len(pooled) + 1), len(a))]
    lower = sum(s <= observed for s in sums) / len(sums)
    upper = sum(s >= observed for s in sums) / len(sums)
    return min(1.0, 2 * min(lower, upper))


def dataset(groups: dict[str, list[np.ndarray]]) -> GroupedDataset:
    series = [
        TimeSeries.from_array(values, id=f"{label}{i}", group_label=label)
        for label, members in groups.items()
        for i, values in enumerate(members)
    ]
    return GroupedDataset.from_series(series)


class TestMannWhitney:
    """Tests for mann_whitney."""

    def test_two_by_two(self) -> None:
        """Test [1,2] vs [3,4] gives U = 0 and p = 1/3."""
        result = mann_whitney([1, 2], [3, 4])
        assert result.u_statistic == 0.0
        assert result.p_value == pytest.approx(1 / 3, abs=1e-15)
        assert result.method is MannWhitneyMethod.EXACT

    def test_five_by_five(self) -> None:
        """Test complete separation of two samples of five gives p = 2/252."""
        result = mann_whitney([1, 2, 3, 4, 5], [6, 7, 8, 9, 10])
        assert result.u_statistic == 0.0
        assert result.p_value == pytest.approx(2 / 252, abs=1e-15)

    def test_identical_samples(self) -> None:
        """Test perfectly overlapping samples give p = 1 under both methods."""
        assert mann_whitney([1, 2, 3], [1, 2, 3]).p_value == 1.0
        assert mann_whitney([1, 2, 3], [1, 2, 3], method="exact").p_value == 1.0

    def test_constant_samples(self) -> None:
        """Test all-tied samples give p = 1."""
        assert mann_whitney([5, 5], [5, 5, 5]).p_value == 1.0

    def test_brute_force_oracle(self, rng: np.random.Generator) -> None:
        """Test the exact p against enumeration for every n1, n2 <= 6."""
        for n1 in range(1, 7):
            for n2 in range(1, 7):
                for _ in range(3):
                    values = rng.permutation(n1 + n2).astype(float)
                    a, b = values[:n1].tolist(), values[n1:].tolist()
                    result = mann_whitney(a, b, method="exact")
                    assert result.p_value == pytest.approx(brute_force_p(a, b), abs=1e-12)

    def test_u_counts_pairs(self) -> None:
        """Test U counts pairs a > b with ties as one half."""
        assert mann_whitney([3, 5], [1, 4]).u_statistic == 3.0
        assert mann_whitney([2, 3], [2, 1]).u_statistic == 3.5

    def test_symmetric(self, rng: np.random.Generator) -> None:
        """Test swapping the samples leaves p unchanged."""
        for size in (5, 30):
            a = rng.standard_normal(size)
            b = rng.standard_normal(size) + 0.5
            assert mann_whitney(a, b).p_value == pytest.approx(mann_whitney(b, a).p_value)

    def test_monotone_transform_invariance(self, rng: np.random.Generator) -> None:
        """Test a common increasing transform leaves p unchanged."""
        a, b = rng.standard_normal(12), rng.standard_normal(15)
        assert mann_whitney(a, b).p_value == pytest.approx(
            mann_whitney(np.exp(a), np.exp(b)).p_value
        )

    def test_large_samples_use_normal_approximation(self, rng: np.random.Generator) -> None:
        """Test n1 * n2 above 400 switches to the normal approximation."""
        result = mann_whitney(rng.standard_normal(30), rng.standard_normal(30) + 2.0)
        assert result.method is MannWhitneyMethod.NORMAL_APPROX
        assert result.p_value < 1e-6

    def test_ties_use_normal_approximation(self) -> None:
        """Test tied samples fall back to the normal approximation."""
        result = mann_whitney([1, 2, 2], [2, 3, 4])
        assert result.method is MannWhitneyMethod.NORMAL_APPROX

    def test_normal_close_to_exact(self, rng: np.random.Generator) -> None:
        """Test the two methods roughly agree at moderate sizes."""
        a, b = rng.standard_normal(15), rng.standard_normal(15) + 0.8
        exact = mann_whitney(a, b, method="exact").p_value
        approx = mann_whitney(a, b, method="normal_approx").p_value
        assert approx == pytest.approx(exact, abs=0.01)

    def test_empty_sample(self) -> None:
        """Test an empty sample is an error."""
        with pytest.raises(OpnetError):
            mann_whitney([], [1.0])

    def test_forced_exact_too_large(self) -> None:
        """Test forcing the exact method on huge samples is refused."""
        with pytest.raises(OpnetError, match="exact"):
            mann_whitney(np.arange(200.0), np.arange(200.0) + 0.5, method="exact")


class TestIntragroupGrid:
    """Tests for intragroup_asymmetry_grid."""

    def test_structure(self, rng: np.random.Generator) -> None:
        """Test one cell per (m, tau) with forward and reverse sample sizes."""
        data = dataset({"G": [rng.standard_normal(60) for _ in range(5)]})
        sweep = Sweep.from_ranges(1, 4, 1, 2)
        grid = intragroup_asymmetry_grid(data, "G", sweep, Statistic.H_CPE)
        assert grid.comparison is Comparison.INTRAGROUP
        assert grid.direction is None
        assert len(grid.cells) == 8
        assert all(c.n_a == 5 and c.n_b == 5 for c in grid.cells)

    def test_single_member(self, rng: np.random.Generator) -> None:
        """Test a group of one is refused."""
        data = dataset({"G": [rng.standard_normal(60)]})
        with pytest.raises(DatasetError, match="need ≥ 2 members"):
            intragroup_asymmetry_grid(data, "G", Sweep.from_ranges(3, 3, 1, 1), Statistic.H_PE)

    def test_invalid_cells(self, rng: np.random.Generator) -> None:
        """Test pairs too long for the series are absent with a reason."""
        data = dataset({"G": [rng.standard_normal(10) for _ in range(3)]})
        grid = intragroup_asymmetry_grid(data, "G", Sweep.from_ranges(5, 6, 1, 2), Statistic.H_PE)
        assert grid.p_value(5, 1) is not None
        assert grid.p_value(6, 2) is None
        invalid = [c for c in grid.cells if not c.is_valid]
        assert all("too short" in c.reason for c in invalid)

    def test_uses_given_table(self, rng: np.random.Generator) -> None:
        """Test a precomputed table gives the same grid."""
        data = dataset({"G": [rng.standard_normal(60) for _ in range(4)]})
        sweep = Sweep.from_ranges(2, 3, 1, 1)
        table = quantify_many(data.series, sweep)
        assert intragroup_asymmetry_grid(
            data, "G", sweep, Statistic.H_GNE, table
        ) == intragroup_asymmetry_grid(data, "G", sweep, Statistic.H_GNE)

    @pytest.mark.slow
    def test_reversible_noise(self) -> None:
        """Test Gaussian noise rarely looks time-irreversible."""
        rng = np.random.default_rng(7)
        data = dataset({"G": [rng.standard_normal(1490) for _ in range(30)]})
        sweep = Sweep.from_ranges(1, 16, 1, 4)
        for statistic in Statistic:
            grid = intragroup_asymmetry_grid(data, "G", sweep, statistic)
            valid = [c for c in grid.cells if c.is_valid]
            share = sum(c.p_value > 0.05 for c in valid) / len(valid)
            assert share >= 0.85


class TestIntergroupGrid:
    """Tests for intergroup_grid."""

    def test_identical_groups(self, rng: np.random.Generator) -> None:
        """Test a group compared with itself gives p = 1 everywhere."""
        series = tuple(
            TimeSeries.from_array(rng.standard_normal(50), id=f"s{i}") for i in range(4)
        )
        ids = tuple(s.id for s in series)
        data = GroupedDataset(series=series, groups={"A": ids, "B": ids})
        grid = intergroup_grid(
            data, "A", "B", Direction.FORWARD, Sweep.from_ranges(2, 4, 1, 2), Statistic.H_PE
        )
        assert all(c.p_value == 1.0 for c in grid.cells)
        assert grid.groups == ("A", "B")

    def test_logistic_vs_noise(self, rng: np.random.Generator) -> None:
        """Test a chaotic map is separated from white noise at m = 4."""
        data = dataset(
            {
                "logistic": [logistic_map(x0, 400) for x0 in rng.uniform(0.05, 0.95, 8)],
                "noise": [rng.standard_normal(400) for _ in range(8)],
            }
        )
        grid = intergroup_grid(
            data, "logistic", "noise", "forward", Sweep.from_ranges(4, 4, 1, 1), Statistic.H_PE
        )
        assert grid.p_value(4, 1) < 0.05

    def test_small_group(self, rng: np.random.Generator) -> None:
        """Test both groups need two members."""
        data = dataset(
            {"A": [rng.standard_normal(30) for _ in range(3)], "B": [rng.standard_normal(30)]}
        )
        with pytest.raises(DatasetError):
            intergroup_grid(data, "A", "B", "forward", Sweep.from_ranges(2, 2, 1, 1), "h_pe")


class TestSurrogateGrid:
    """Tests for surrogate_comparison_grid."""

    def test_chaotic_group_vs_shuffles(self, rng: np.random.Generator) -> None:
        """Test a logistic-map group differs from its shuffled surrogates."""
        data = dataset({"L": [logistic_map(x0, 300) for x0 in rng.uniform(0.05, 0.95, 6)]})
        sweep = Sweep.from_ranges(3, 3, 1, 1)
        surrogates = quantify_surrogates(data.members("L"), "alg0", 20, sweep, seed=1)
        means = surrogate_comparison_grid(
            data, "L", "alg0", sweep, Statistic.H_PE, surrogates=surrogates
        )
        pooled = surrogate_comparison_grid(
            data, "L", "alg0", sweep, Statistic.H_PE, mode="pooled", surrogates=surrogates
        )
        assert means.p_value(3, 1) < 0.05
        assert pooled.p_value(3, 1) < 0.05
        assert means.p_value(3, 1) != pooled.p_value(3, 1)
        assert means.cells[0].n_b == 6
        assert pooled.cells[0].n_b == 120
        assert means.mode is SurrogateMode.SUBJECT_MEANS
        assert means.algorithm is SurrogateAlgorithm.ALG0

    def test_draws_surrogates_when_not_given(self, rng: np.random.Generator) -> None:
        """Test the grid draws its own seeded ensembles."""
        data = dataset({"G": [rng.standard_normal(80) for _ in range(3)]})
        sweep = Sweep.from_ranges(2, 3, 1, 1)
        a = surrogate_comparison_grid(data, "G", "alg1", sweep, "h_cpe", n_surrogates=5, seed=4)
        b = surrogate_comparison_grid(data, "G", "alg1", sweep, "h_cpe", n_surrogates=5, seed=4)
        assert a == b
        assert a.direction is Direction.FORWARD

    def test_mismatched_algorithm(self, rng: np.random.Generator) -> None:
        """Test surrogate quantifiers must match the requested algorithm."""
        data = dataset({"G": [rng.standard_normal(40) for _ in range(2)]})
        sweep = Sweep.from_ranges(2, 2, 1, 1)
        surrogates = quantify_surrogates(data.members("G"), "alg0", 3, sweep)
        with pytest.raises(OpnetError, match="alg0"):
            surrogate_comparison_grid(data, "G", "alg2", sweep, "h_pe", surrogates=surrogates)


class TestSummaries:
    """Tests for summarize_groups."""

    def test_mean_and_std(self, rng: np.random.Generator) -> None:
        """Test per-group mean and sample standard deviation."""
        data = dataset({"G": [rng.standard_normal(50) for _ in range(3)]})
        sweep = Sweep.from_ranges(3, 3, 1, 1)
        table = quantify_many(data.series, sweep)
        summaries = summarize_groups(data, table, sweep, statistics=(Statistic.H_PE,))
        assert len(summaries) == 2
        forward = next(s for s in summaries if s.direction is Direction.FORWARD)
        values = [t.h_pe for t in table if t.direction is Direction.FORWARD]
        assert forward.n == 3
        assert forward.mean == pytest.approx(np.mean(values))
        assert forward.std == pytest.approx(np.std(values, ddof=1))
