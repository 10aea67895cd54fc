import numpy as np
import pytest

from nlsevqa import kernels

BACKENDS = ["python"]
try:
    kernels.get_backend("compiled")
    BACKENDS.append("compiled")
except ImportError:
    pass


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    monkeypatch.setattr(kernels, "backend", kernels.get_backend(request.param))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng, q):
    v = rng.normal(size=2 ** q) + 1j * rng.normal(size=2 ** q)
    return v / np.linalg.norm(v)
