"""Small dense exact matrices (tuples of row tuples) and exact rank."""
from __future__ import annotations

from typing import Sequence

from gmpy2 import mpq

Matrix = tuple[tuple, ...]


def zeros(n: int, m: int | None = None) -> Matrix:
    m = n if m is None else m
    return tuple((mpq(0),) * m for _ in range(n))


def identity(n: int) -> Matrix:
    return tuple(tuple(mpq(1) if i == j else mpq(0) for j in range(n)) for i in range(n))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = list(zip(*b)) if b else []
    return tuple(
        tuple(sum((x * y for x, y in zip(row, col) if x and y), mpq(0)) for col in bt) for row in a
    )


def matadd(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a, b))


def matsub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(a, b))


def matscale(c, a: Matrix) -> Matrix:
    return tuple(tuple(c * x for x in r) for r in a)


def matvec(a: Matrix, v: Sequence) -> tuple:
    return tuple(sum((x * y for x, y in zip(row, v) if x and y), mpq(0)) for row in a)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def is_zero(a: Matrix) -> bool:
    return not any(x for r in a for x in r)


def matpow(a: Matrix, k: int) -> Matrix:
    out = identity(len(a))
    for _ in range(k):
        out = matmul(out, a)
    return out


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    rows = [list(r) + [mpq(1) if i == j else mpq(0) for j in range(n)] for i, r in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        rows[col], rows[piv] = rows[piv], rows[col]
        p = rows[col][col]
        rows[col] = [x / p for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return tuple(tuple(r[n:]) for r in rows)


def rank(rows: list[dict[int, object]]) -> int:
    """Exact rank of a sparse matrix given as a list of {column: value} rows."""
    pivots: dict[int, dict[int, object]] = {}
    r = 0
    for row in rows:
        row = {k: v for k, v in row.items() if v}
        while row:
            lead = min(row)
            if lead not in pivots:
                pivots[lead] = row
                r += 1
                break
            prow = pivots[lead]
            f = row[lead] / prow[lead]
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
    return r
