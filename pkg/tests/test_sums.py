import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from sio_lab.sums import pairwise_sum


def test_empty_and_scalar():
    assert pairwise_sum(np.asarray([])) == 0.0
    assert pairwise_sum(np.asarray([3.5])) == 3.5


def test_matches_fsum_closely():
    rng = np.random.default_rng(0)
    x = rng.normal(size=10_001)
    import math
    assert abs(pairwise_sum(x) - math.fsum(x)) <= 1e-12 * np.abs(x).sum()


def test_parallel_bit_identical():
    rng = np.random.default_rng(1)
    for n in (1 << 16, (1 << 17) + 311):
        x = rng.normal(size=n)
        serial = pairwise_sum(x)
        for workers in (2, 4, 8):
            assert pairwise_sum(x, workers=workers) == serial


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=0, max_size=200))
def test_permutation_of_padding_irrelevant(xs):
    x = np.asarray(xs)
    # appending explicit zeros must not change the tree result
    padded = np.concatenate([x, np.zeros(3)])
    assert pairwise_sum(padded) == pairwise_sum(x) or np.isnan(pairwise_sum(x))
