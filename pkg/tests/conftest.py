import numpy as np
import pytest

from handleopt import default_segments


@pytest.fixture
def rng():
    """Fresh seeded generator per test, so property tests are repeatable."""
    return np.random.default_rng(20260818)


@pytest.fixture(scope="session")
def segments():
    return default_segments()
