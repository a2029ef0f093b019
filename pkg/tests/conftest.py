"""Pytest configuration and shared fixtures."""

from pathlib import Path

import numpy as np
import pytest

from opnet.datasets import write_manifest
from opnet.models import GroupedDataset
from tests.synthetic import make_rr_series


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so every test run draws the same data."""
    return np.random.default_rng(20240611)


@pytest.fixture
def two_groups(rng: np.random.Generator) -> GroupedDataset:
    """Two groups of four 200-beat tachograms each."""
    series = [make_rr_series(rng, 200, f"a{i}", "A") for i in range(4)]
    series += [make_rr_series(rng, 200, f"b{i}", "B") for i in range(4)]
    return GroupedDataset.from_series(series)


@pytest.fixture
def manifest(tmp_path: Path, two_groups: GroupedDataset) -> Path:
    """Manifest plus series files for ``two_groups`` on disk."""
    return write_manifest(two_groups, tmp_path / "data" / "manifest.csv", series_dir="series")


@pytest.fixture
def series_file(tmp_path: Path, rng: np.random.Generator) -> Path:
    """One 300-beat tachogram in the plain format."""
    path = tmp_path / "rr.txt"
    values = make_rr_series(rng, 300, "rr").values
    path.write_text("\n".join(repr(v) for v in values) + "\n", encoding="utf-8")
    return path
