import numpy as np
import pytest

from naeopt.core import StepFunction


def random_step_function(rng: np.random.Generator, max_breaks: int = 4,
                         monotone: bool = False) -> StepFunction:
    """Random odd step function; oddness is structural in the representation."""
    l = int(rng.integers(0, max_breaks + 1))
    breaks = np.sort(np.abs(rng.normal(0.0, 1.5, size=l)))
    while l and np.any(np.diff(breaks) <= 1e-9) or (l and breaks[0] <= 1e-9):
        breaks = np.sort(np.abs(rng.normal(0.0, 1.5, size=l)))
    values = rng.uniform(-1.0, 1.0, size=l + 1)
    if monotone:
        values = np.sort(np.abs(values))
    return StepFunction(tuple(breaks), tuple(values))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
