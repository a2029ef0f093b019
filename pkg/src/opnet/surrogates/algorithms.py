"""Shuffle, phase-randomized and amplitude-adjusted Fourier surrogates.

numpy's FFT handles any length, so series are never zero-padded.
"""

import numpy as np

from opnet.models import SurrogateAlgorithm, TimeSeries
from opnet.surrogates.base import RandomSource, SurrogateGenerator


def stable_ranks(values: np.ndarray) -> np.ndarray:
    """0-based ranks; equal values keep their order of appearance."""
    return np.argsort(np.argsort(values, kind="stable"), kind="stable")


def randomize_phases(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Real series with the amplitude spectrum of ``values`` and uniform random phases.

    Bins 0 < k < n/2 get i.i.d. phases on [0, 2pi); the DC bin and, for
    even n, the Nyquist bin keep their original (real) values.
    """
    n = values.size
    spectrum = np.fft.rfft(values)
    phases = rng.uniform(0.0, 2.0 * np.pi, spectrum.size)
    randomized = np.abs(spectrum) * np.exp(1j * phases)
    randomized[0] = spectrum[0]
    if n % 2 == 0:
        randomized[-1] = spectrum[-1]
    return np.fft.irfft(randomized, n=n)


class Shuffle(SurrogateGenerator):
    """Random permutation of the samples (i.i.d. noise null)."""

    @property
    def algorithm(self) -> SurrogateAlgorithm:
        return SurrogateAlgorithm.ALG0

    def generate(self, values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return rng.permutation(values)


class PhaseRandomized(SurrogateGenerator):
    """Fourier phase randomization (linear Gaussian process null)."""

    min_length = 4

    @property
    def algorithm(self) -> SurrogateAlgorithm:
        return SurrogateAlgorithm.ALG1

    def generate(self, values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return randomize_phases(values, rng)


class AmplitudeAdjustedFourier(SurrogateGenerator):
    """AAFT: phase randomization of a Gaussianized copy, mapped back onto the data values.

    Null hypothesis: a linear Gaussian process seen through a static
    monotone transform. The output is a permutation of the input.
    """

    min_length = 4

    @property
    def algorithm(self) -> SurrogateAlgorithm:
        return SurrogateAlgorithm.ALG2

    def generate(self, values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        # Gaussian sample reordered to follow the rank order of the data
        gaussian = np.sort(rng.standard_normal(values.size))
        gaussianized = gaussian[stable_ranks(values)]

        shuffled = randomize_phases(gaussianized, rng)

        # Data values reordered to follow the rank order of the surrogate
        return np.sort(values, kind="stable")[stable_ranks(shuffled)]


def alg0_shuffle(series: TimeSeries, seed: RandomSource = 0, index: int = 0) -> TimeSeries:
    """Shuffled surrogate of ``series``."""
    return Shuffle().surrogate(series, seed, index)


def alg1_phase_randomize(series: TimeSeries, seed: RandomSource = 0, index: int = 0) -> TimeSeries:
    """Phase-randomized surrogate of ``series`` (length at least 4)."""
    return PhaseRandomized().surrogate(series, seed, index)


def alg2_aaft(series: TimeSeries, seed: RandomSource = 0, index: int = 0) -> TimeSeries:
    """AAFT surrogate of ``series`` (length at least 4)."""
    return AmplitudeAdjustedFourier().surrogate(series, seed, index)
