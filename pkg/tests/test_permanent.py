import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_permanent
from polscat.errors import ResourceCapError, ShapeError
from polscat.permanent import permanent, permanent_naive, permanent_repeated


def _random(n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def test_small_known_values():
    assert permanent([[1, 2], [3, 4]]) == 10
    assert permanent(np.ones((4, 4))) == pytest.approx(24)
    assert permanent(np.zeros((0, 0))) == 1


@pytest.mark.parametrize("method", ["ryser", "glynn"])
@pytest.mark.parametrize("n", range(1, 8))
def test_against_naive(method, n):
    M = _random(n, n)
    ref = naive_permanent(M)
    assert abs(permanent(M, method=method) - ref) <= 1e-12 * max(1.0, abs(ref))


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_thread_count_does_not_change_bits(threads):
    M = _random(10, 0)
    assert permanent(M, threads=threads) == permanent(M, threads=1)
    assert permanent(M, method="glynn", threads=threads) == permanent(M, method="glynn")


def test_caps_and_shapes():
    with pytest.raises(ResourceCapError):
        permanent(np.eye(13))
    with pytest.raises(ShapeError):
        permanent(np.ones((2, 3)))
    with pytest.raises(ValueError):
        permanent(np.eye(2), method="bogus")


def test_repeated_rows_and_columns():
    M = _random(2, 5)
    full = M[np.ix_([0, 0, 1], [1, 1, 1])]
    assert permanent_repeated(M, [2, 1], [0, 3]) == pytest.approx(permanent_naive(full))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_permutation_and_scaling_invariance(n, seed):
    rng = np.random.default_rng(seed)
    M = _random(n, seed)
    p = permanent(M)
    rows, cols = rng.permutation(n), rng.permutation(n)
    assert permanent(M[rows][:, cols]) == pytest.approx(p, rel=1e-10, abs=1e-10)
    assert permanent(M.T) == pytest.approx(p, rel=1e-10, abs=1e-10)
    d = rng.standard_normal(n) + 1j
    assert permanent(d[:, None] * M) == pytest.approx(np.prod(d) * p, rel=1e-10, abs=1e-10)
