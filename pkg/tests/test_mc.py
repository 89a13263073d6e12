import numpy as np
import pytest
from hypothesis import given, strategies as st

from omlab import mc


@given(st.integers(1, 500_000))
def test_block_sizes_partition(n):
    sizes = mc.block_sizes(n)
    assert sum(sizes) == n
    assert all(0 < s <= mc.BLOCK_SIZE for s in sizes)


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_run_blocks_order_independent_of_workers(workers):
    ref = mc.run_blocks(1, 200_000, lambda rng, size: rng.standard_normal(size), 1)
    got = mc.run_blocks(1, 200_000, lambda rng, size: rng.standard_normal(size), workers)
    assert np.concatenate(ref).tobytes() == np.concatenate(got).tobytes()


def test_proportion_estimate():
    est = mc.proportion_estimate(250, 1000, seed=0)
    assert est.mean == 0.25
    assert est.stderr == pytest.approx(np.sqrt(0.25 * 0.75 / 1000))
