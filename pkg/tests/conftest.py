import numpy as np
import pytest
from hypothesis import settings

from ridge_anatomy.dataset import dataset_from_arrays, load_hospital_manpower, standardize

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def hospital():
    return standardize(load_hospital_manpower())


def random_model(rng, n=12, k=4, collinearity=0.0):
    """Correlation-form model from Gaussian data.

    ``collinearity`` in [0, 1) mixes a shared factor into every column.
    """
    shared = rng.standard_normal((n, 1))
    x = (1 - collinearity) * rng.standard_normal((n, k)) + collinearity * shared
    x = x * rng.uniform(0.5, 50.0, size=k) + rng.uniform(-10, 10, size=k)
    y = x @ rng.standard_normal(k) + rng.standard_normal(n) * rng.uniform(0.1, 5.0)
    return standardize(dataset_from_arrays(y, x))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def centered_orthonormal(rng, n, k):
    """``n x k`` matrix with centered, mutually orthogonal unit columns."""
    a = rng.standard_normal((n, k))
    a -= a.mean(axis=0)
    q, _ = np.linalg.qr(a)
    return q



# Acceptance criteria append their verdict lines here; they are echoed in
# the terminal summary so they appear even when output is captured.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
