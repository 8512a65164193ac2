import numpy as np
import pytest

from polymer_lab import weights as wts
from polymer_lab.utils.common_utils import make_stream, set_quiet


@pytest.fixture(autouse=True)
def quiet():
    set_quiet(True)
    yield
    set_quiet(False)


@pytest.fixture
def stream():
    """Factory for keyed Philox streams: ``stream(1, 2)``."""
    return make_stream


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def gaussian():
    return wts.from_name("gaussian")


@pytest.fixture
def rademacher():
    return wts.from_name("rademacher")


@pytest.fixture(params=["gaussian", "rademacher", "uniform", "shifted_exponential"])
def named_spec(request):
    return wts.from_name(request.param)
