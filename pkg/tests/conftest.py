import itertools
import math

import numpy as np
import pytest
from hypothesis import settings

from isocount.algebra import RandomStream

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return RandomStream(12345)


def brute_aut_order(U) -> int:
    """|Aut(U)| by trying every relabeling of the adjacency matrix."""
    A = U.adjacency()
    n = U.n
    return sum(1 for perm in itertools.permutations(range(n))
               if np.array_equal(A[np.ix_(perm, perm)], A))


def trial_division_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))
