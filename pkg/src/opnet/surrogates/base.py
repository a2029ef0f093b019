"""Base class and registry for surrogate generators."""

from abc import ABC, abstractmethod
from typing import Optional, Union

import numpy as np

from opnet.errors import OpnetError
from opnet.models import SurrogateAlgorithm, TimeSeries
from opnet.seeding import derive_rng

RandomSource = Union[int, np.random.Generator]


def surrogate_purpose(algorithm: SurrogateAlgorithm, source_id: str) -> str:
    """Seed-derivation tag for the surrogates of one series."""
    return f"surrogate/{SurrogateAlgorithm(algorithm).value}/{source_id}"


class SurrogateGenerator(ABC):
    """Produces one surrogate realization of a series under a null hypothesis."""

    min_length: int = 2

    @property
    @abstractmethod
    def algorithm(self) -> SurrogateAlgorithm:
        """Null hypothesis this generator samples from."""
        pass

    @abstractmethod
    def generate(self, values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Surrogate values of the same length as ``values``."""
        pass

    def rng_for(self, series: TimeSeries, random: RandomSource, index: int = 0) -> np.random.Generator:
        """Generator as given, or the stream derived from (seed, series, index)."""
        if isinstance(random, np.random.Generator):
            return random
        return derive_rng(random, surrogate_purpose(self.algorithm, series.id), index)

    def surrogate(
        self,
        series: TimeSeries,
        random: RandomSource = 0,
        index: int = 0,
        id: Optional[str] = None,
    ) -> TimeSeries:
        """Surrogate of ``series`` as a new TimeSeries.

        Raises:
            OpnetError: series shorter than this generator accepts
        """
        if len(series) < self.min_length:
            raise OpnetError(
                f"{self.algorithm.value} needs at least {self.min_length} samples, "
                f"series '{series.id}' has {len(series)}"
            )
        values = self.generate(series.to_array(), self.rng_for(series, random, index))
        return series.with_values(values, id=id or f"{series.id}~{self.algorithm.value}-{index}")


class SurrogateRegistry:
    """Registry of surrogate generators keyed by algorithm."""

    def __init__(self) -> None:
        self._generators: dict[SurrogateAlgorithm, SurrogateGenerator] = {}

    def register(self, generator: SurrogateGenerator) -> None:
        """Register a generator, replacing any for the same algorithm."""
        self._generators[generator.algorithm] = generator

    def get(self, algorithm: Union[SurrogateAlgorithm, str]) -> SurrogateGenerator:
        """Generator for an algorithm."""
        algorithm = SurrogateAlgorithm(algorithm)
        if algorithm not in self._generators:
            raise OpnetError(f"no surrogate generator registered for {algorithm.value}")
        return self._generators[algorithm]

    @property
    def algorithms(self) -> list[SurrogateAlgorithm]:
        return list(self._generators)

    @classmethod
    def default(cls) -> "SurrogateRegistry":
        """Create registry with the shuffle, phase-randomized and AAFT generators."""
        from opnet.surrogates.algorithms import (
            AmplitudeAdjustedFourier,
            PhaseRandomized,
            Shuffle,
        )

        registry = cls()
        registry.register(Shuffle())
        registry.register(PhaseRandomized())
        registry.register(AmplitudeAdjustedFourier())
        return registry
