"""Exact linear algebra over the rationals (row reduction, rank, kernels)."""

from __future__ import annotations

from typing import Sequence

from .poly import ZERO, to_rational


def _matrix(rows) -> list[list]:
    return [[to_rational(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence], coerce: bool = True) -> tuple[list[list], list[int]]:
    """Reduced row echelon form and the pivot columns.

    With ``coerce=False`` entries are used as given (any exact field type).
    """
    m = _matrix(rows) if coerce else [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(m)):
            if m[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence], coerce: bool = True) -> int:
    return len(rref(rows, coerce)[1]) if rows and len(rows[0]) else 0


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list]:
    """Basis of {v : rows . v = 0}."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [[1 if i == j else ZERO for i in range(ncols)] for j in range(ncols)]
    red, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for fcol in free:
        v = [ZERO] * ncols
        v[fcol] = to_rational(1)
        for r, pc in enumerate(piv):
            v[pc] = -red[r][fcol]
        basis.append(v)
    return basis


def matmul(a, b):
    return [[sum((x * y for x, y in zip(row, col)), ZERO) for col in zip(*b)] for row in a]


def solve(rows: Sequence[Sequence], rhs: Sequence):
    """Particular solution and kernel basis of rows . x = rhs, or None if inconsistent."""
    ncols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = rref(aug)
    if ncols in piv:
        return None
    x = [ZERO] * ncols
    for r, pc in enumerate(piv):
        x[pc] = red[r][ncols]
    return x, nullspace(rows, ncols)
