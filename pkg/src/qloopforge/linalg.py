"""Exact dense linear algebra over any field-like scalar type.

Scalars only need +, -, *, /, == and truthiness (zero is falsy), which the
ground-field elements and the rational-function entries used elsewhere all
provide.  Everything is fraction-free in spirit but plain Gauss-Jordan in
practice; matrices here are small.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

Row = List
Matrix = List[Row]


def rref(rows: Sequence[Sequence], zero) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form; returns (rows, pivot column indices).

    Zero rows are dropped.  ``zero`` is the scalar zero of the entry field.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(m)):
            if m[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = m[r][c]
        m[r] = [x / inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [row for row in m[:r]], pivots


def reduce_against(basis: Matrix, pivots: Sequence[int], vec: Sequence) -> Row:
    """Remainder of ``vec`` after elimination against an rref basis."""
    v = list(vec)
    for row, c in zip(basis, pivots):
        if v[c]:
            f = v[c]
            v = [a - f * b for a, b in zip(v, row)]
    return v


def in_span(basis: Matrix, pivots: Sequence[int], vec: Sequence) -> bool:
    return not any(reduce_against(basis, pivots, vec))


def nullspace(rows: Sequence[Sequence], zero, one) -> Matrix:
    """Basis of the right kernel of the matrix."""
    if not rows:
        return []
    ncols = len(rows[0])
    red, pivots = rref(rows, zero)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [zero] * ncols
        v[fc] = one
        for row, pc in zip(red, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence, zero) -> Optional[Row]:
    """One solution of A x = b, or None if inconsistent."""
    if not rows:
        return [] if not any(rhs) else None
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, zero)
    x = [zero] * ncols
    for row, c in zip(red, pivots):
        if c == ncols:
            return None  # pivot in the rhs column
        x[c] = row[-1]
    return x


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if not a or not b:
        return []
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = None
            for p in range(k):
                term = a[i][p] * b[p][j]
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(row)
    return out


def mat_vec(a: Matrix, v: Sequence) -> Row:
    return [sum_entries([a[i][j] * v[j] for j in range(len(v))]) for i in range(len(a))]


def sum_entries(entries: Sequence):
    acc = entries[0]
    for e in entries[1:]:
        acc = acc + e
    return acc


def identity(n: int, zero, one) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_inv(a: Matrix, zero, one) -> Matrix:
    """Exact inverse; raises ValueError on a singular matrix."""
    n = len(a)
    aug = [list(row) + ident_row for row, ident_row in zip(a, identity(n, zero, one))]
    red, pivots = rref(aug, zero)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in red[:n]]
