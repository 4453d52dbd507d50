import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_addoption(parser):
    parser.addoption(
        "--kernel-backend",
        default=None,
        help="force a conv kernel backend for the whole run (numpy|cython)",
    )


@pytest.fixture(scope="session", autouse=True)
def _force_backend(request):
    name = request.config.getoption("--kernel-backend")
    if name:
        from eitventlab.ndtensor import set_kernel_backend

        set_kernel_backend(name)
