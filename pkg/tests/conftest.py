import numpy as np
import pytest


def compositions(total, parts):
    """All ordered splits of `total` into `parts` positive integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
