"""Surrogate data generation and significance testing."""

from opnet.surrogates.algorithms import (
    AmplitudeAdjustedFourier,
    PhaseRandomized,
    Shuffle,
    alg0_shuffle,
    alg1_phase_randomize,
    alg2_aaft,
    randomize_phases,
    stable_ranks,
)
from opnet.surrogates.base import SurrogateGenerator, SurrogateRegistry, surrogate_purpose
from opnet.surrogates.testing import (
    MIN_SURROGATES,
    MIN_SURROGATES_TWO_SIDED,
    generate_ensemble,
    quantify_ensemble,
    rank_order_test,
    run_surrogate_battery,
    run_surrogate_tests,
)

__all__ = [
    "MIN_SURROGATES",
    "MIN_SURROGATES_TWO_SIDED",
    "AmplitudeAdjustedFourier",
    "PhaseRandomized",
    "Shuffle",
    "SurrogateGenerator",
    "SurrogateRegistry",
    "alg0_shuffle",
    "alg1_phase_randomize",
    "alg2_aaft",
    "generate_ensemble",
    "quantify_ensemble",
    "randomize_phases",
    "rank_order_test",
    "run_surrogate_battery",
    "run_surrogate_tests",
    "stable_ranks",
    "surrogate_purpose",
]
