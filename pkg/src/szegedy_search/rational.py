"""Exact Gaussian elimination over the rationals for sparse systems."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def solve_sparse(rows: Sequence[dict[int, Fraction]], rhs: Sequence[Fraction]) -> list[Fraction]:
    """
    Solve ``A x = b`` exactly, with ``A`` given as one ``{column: value}`` dict per row.

    Pivots are chosen per column as the remaining row with the fewest
    nonzeros (ties broken by row index), which keeps banded systems such as
    the cycle's free of fill-in.

    Raises
    ------
    ZeroDivisionError
        If the matrix is singular.
    """
    n = len(rows)
    if len(rhs) != n:
        raise ValueError("rhs length does not match the number of rows")
    a = [{j: Fraction(v) for j, v in r.items() if v != 0} for r in rows]
    b = [Fraction(v) for v in rhs]
    in_col: list[set[int]] = [set() for _ in range(n)]
    for i, r in enumerate(a):
        for j in r:
            in_col[j].add(i)

    done = [False] * n
    pivot_of = [0] * n
    for c in range(n):
        cand = sorted(i for i in in_col[c] if not done[i])
        if not cand:
            raise ZeroDivisionError(f"matrix is singular (no pivot in column {c})")
        p = min(cand, key=lambda i: (len(a[i]), i))
        done[p] = True
        pivot_of[c] = p
        prow, pv = a[p], a[p][c]
        for i in cand:
            if i == p:
                continue
            r = a[i]
            f = r[c] / pv
            for j, v in prow.items():
                new = r.get(j, 0) - f * v
                if new == 0:
                    if j in r:
                        del r[j]
                        in_col[j].discard(i)
                else:
                    if j not in r:
                        in_col[j].add(i)
                    r[j] = new
            b[i] -= f * b[p]

    # pivot row of column c only holds columns >= c
    x: list[Fraction] = [Fraction(0)] * n
    for c in reversed(range(n)):
        p = pivot_of[c]
        s = b[p]
        for j, v in a[p].items():
            if j != c:
                s -= v * x[j]
        x[c] = s / a[p][c]
    return x
