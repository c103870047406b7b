"""Smith normal form over the integers, with exact (big) integer arithmetic."""

from __future__ import annotations


def smith_normal_form(matrix):
    """Nonzero invariant factors d_1 | d_2 | ... (all >= 1) of an integer matrix.

    The matrix is a list of rows.  len(result) equals the rank of the matrix;
    the divisibility chain d_1 | d_2 | ... holds.
    """
    a = [list(map(int, row)) for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    for row in a:
        if len(row) != cols:
            raise ValueError("ragged matrix")
    factors = []
    top = 0
    while top < rows and top < cols:
        pivot = _smallest_nonzero(a, top)
        if pivot is None:
            break
        _swap_to_pivot(a, top, pivot)
        _diagonalise_at(a, top, rows, cols)
        if a[top][top] < 0:
            for j in range(top, cols):
                a[top][j] = -a[top][j]
        factors.append(a[top][top])
        top += 1
    return factors


def _smallest_nonzero(a, top):
    best = None
    best_val = None
    for i in range(top, len(a)):
        for j in range(top, len(a[0])):
            v = abs(a[i][j])
            if v and (best_val is None or v < best_val):
                best, best_val = (i, j), v
    return best


def _swap_to_pivot(a, top, pivot):
    i, j = pivot
    a[top], a[i] = a[i], a[top]
    for row in a:
        row[top], row[j] = row[j], row[top]


def _diagonalise_at(a, top, rows, cols):
    """Clear row and column `top` and make the pivot divide the rest."""
    while True:
        d = a[top][top]
        dirty = False
        for i in range(top + 1, rows):
            if a[i][top]:
                q = a[i][top] // d
                for j in range(top, cols):
                    a[i][j] -= q * a[top][j]
                if a[i][top]:
                    # Euclidean step: the remainder is strictly smaller.
                    a[top], a[i] = a[i], a[top]
                    dirty = True
                    break
        if dirty:
            continue
        for j in range(top + 1, cols):
            if a[top][j]:
                q = a[top][j] // d
                for i in range(top, rows):
                    a[i][j] -= q * a[i][top]
                if a[top][j]:
                    for i in range(top, rows):
                        a[i][top], a[i][j] = a[i][j], a[i][top]
                    dirty = True
                    break
        if dirty:
            continue
        bad = _non_divisible_row(a, top, rows, cols)
        if bad is None:
            return
        for j in range(top, cols):
            a[top][j] += a[bad][j]


def _non_divisible_row(a, top, rows, cols):
    d = a[top][top]
    for i in range(top + 1, rows):
        for j in range(top + 1, cols):
            if a[i][j] % d:
                return i
    return None
