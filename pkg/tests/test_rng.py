import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prepivot import ParameterError, RngStream

paths = st.lists(st.integers(0, 2**31), max_size=4).map(tuple)


@given(st.integers(0, 2**32), paths)
def test_same_seed_and_path_reproduce(seed, path):
    a = RngStream(seed, path).generator().standard_normal(64)
    b = RngStream(seed, path).generator().standard_normal(64)
    assert np.array_equal(a, b)


def test_split_is_path_concatenation():
    s = RngStream(7)
    assert s.split(0, 3).split(1) == RngStream(7, (0, 3, 1))
    u = s.split(0, 3).split(1).generator().random(5)
    assert np.array_equal(u, RngStream(7, (0, 3, 1)).generator().random(5))


def test_distinct_paths_are_uncorrelated():
    base = RngStream(11)
    draws = [base.split(*p).generator().standard_normal(100_000) for p in [(0,), (1,), (0, 0), (0, 1), (1, 0)]]
    for i in range(len(draws)):
        for j in range(i + 1, len(draws)):
            assert abs(np.corrcoef(draws[i], draws[j])[0, 1]) < 0.02


def test_distinct_seeds_differ():
    assert not np.array_equal(RngStream(1).generator().random(8), RngStream(2).generator().random(8))


def test_order_of_requests_is_irrelevant():
    s = RngStream(3)
    first = [s.split(r).generator().random(3) for r in range(5)]
    second = [s.split(r).generator().random(3) for r in reversed(range(5))][::-1]
    assert all(np.array_equal(a, b) for a, b in zip(first, second))


@pytest.mark.parametrize("seed,path", [(-1, ()), (0, (-2,))])
def test_negative_keys_rejected(seed, path):
    with pytest.raises(ParameterError):
        RngStream(seed, path)
