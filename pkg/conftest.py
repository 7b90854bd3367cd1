"""
Shared pytest setup: put src/ on the import path and expose common fixtures.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent / "src"))


@pytest.fixture
def rng():
    """Seeded generator so randomised properties are reproducible."""
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def lambda_star_m1():
    """Positive root of -l^6 + 6 l^2 + 7 (the M = 1 invertibility loss)."""
    return 1.7031065366
