import numpy as np
import pytest

from flowmat.hypermat import HyperMatrix, build_arrays


def random_matrix(rng: np.random.Generator, max_entries: int = 200) -> HyperMatrix:
    n = int(rng.integers(0, max_entries + 1))
    rows = rng.integers(0, 1 << 32, size=n, dtype=np.uint64).astype(np.uint32)
    cols = rng.integers(0, 1 << 32, size=n, dtype=np.uint64).astype(np.uint32)
    vals = rng.integers(1, 1 << 20, size=n, dtype=np.uint64)
    return build_arrays(rows, cols, vals)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
