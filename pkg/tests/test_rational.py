from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szegedy_search.rational import solve_sparse


def test_small_system():
    # 2x + y = 3, x + 3y = 5  ->  x = 4/5, y = 7/5
    x = solve_sparse([{0: 2, 1: 1}, {0: 1, 1: 3}], [3, 5])
    assert x == [Fraction(4, 5), Fraction(7, 5)]


def test_needs_row_swap():
    x = solve_sparse([{1: 1}, {0: 1}], [2, 3])
    assert x == [3, 2]


def test_singular():
    with pytest.raises(ZeroDivisionError):
        solve_sparse([{0: 1, 1: 1}, {0: 2, 1: 2}], [1, 2])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.lists(st.integers(-4, 4), min_size=n * n + n, max_size=n * n + n)))
def test_agrees_with_float_solve(vals):
    n = int((np.sqrt(1 + 4 * len(vals)) - 1) / 2)
    a = np.array(vals[: n * n], dtype=float).reshape(n, n) + 10 * np.eye(n)
    b = np.array(vals[n * n :], dtype=float)
    rows = [{j: Fraction(int(a[i, j])) for j in range(n) if a[i, j]} for i in range(n)]
    x = solve_sparse(rows, [Fraction(int(v)) for v in b])
    np.testing.assert_allclose([float(v) for v in x], np.linalg.solve(a, b), rtol=1e-12, atol=1e-12)
