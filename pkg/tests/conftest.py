import warnings

import pytest

from ptcompacton.params import ModelParams

# the energy-momentum grid used throughout: (l, p, m)
EXACT_GRID = [(3, 1, 2), (4, 1, 2), (5, 1, 4), (6, 2, 4), (8, 2, 4), (4, 1, 6), (5, 2, 6)]
SPEEDS = (0.5, 1.0, 2.0)


@pytest.fixture
def sin2_params():
    return ModelParams(3, 1, 2, c=1.0)


@pytest.fixture(autouse=True)
def _strict_tolerance_warnings():
    # a quadrature that silently misses its tolerance should fail loudly in tests
    from ptcompacton.errors import ToleranceNotReached

    with warnings.catch_warnings():
        warnings.simplefilter("error", ToleranceNotReached)
        yield
