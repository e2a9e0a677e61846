"""Positive definite quadratic forms over exact rationals.

A form is kept as its symmetric coefficient matrix.  The module provides
the recursive (Gram-Schmidt style) decomposition Q = sum_i b_i (x_i +
sum_{j>i} mu_ij x_j)^2, the leading/bordered minors B_ij and their
companions C_i, shift/swap substitutions with their closed-form effect on
the recursive data, LLL reduction (full and partial) and the explicit
Minkowski reducedness tests for two and three variables.

All indices in the public API are 1-based, matching the usual notation
for b_i, mu_ij, B_ij.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    IterationCapExceeded,
    NotPositiveDefinite,
    NotSymmetric,
    OmegaOutOfRange,
    ShiftDirectionInvalid,
    UnsupportedDimension,
)
from .ratutil import HALF, nearest_int

Matrix = tuple[tuple[Fraction, ...], ...]

# A violated reduction condition: ("size", i, j) or ("lovasz", i).
Condition = tuple


@dataclass(frozen=True)
class FormMatrix:
    n: int
    entries: Matrix

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.entries[i - 1][j - 1]

    @property
    def determinant(self) -> Fraction:
        return det([list(row) for row in self.entries])


@dataclass(frozen=True)
class RecursiveForm:
    n: int
    b: dict  # i -> Fraction, 1 <= i <= n
    mu: dict  # (i, j) -> Fraction, 1 <= i < j <= n


@dataclass(frozen=True)
class Minors:
    n: int
    B: dict  # (i, j) -> Fraction, 1 <= i <= j <= n, plus the (0, 0) = 1 convention
    C: dict  # i -> Fraction, 1 <= i < n


@dataclass(frozen=True)
class ReductionResult:
    reduced: FormMatrix
    transform: tuple  # integer matrix T, reduced(x) == original(T x)
    swap_count: int
    shift_count: int


def det(rows) -> Fraction:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(rows)
    rows = [[Fraction(x) for x in row] for row in rows]
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            result = -result
        result *= rows[col][col]
        inv = rows[col][col]
        for r in range(col + 1, n):
            if rows[r][col] != 0:
                factor = rows[r][col] / inv
                for c in range(col, n):
                    rows[r][c] -= factor * rows[col][c]
    return result


def form_from_matrix(grid: Sequence[Sequence]) -> FormMatrix:
    """Validate a rational grid as a positive definite symmetric form."""
    n = len(grid)
    if n < 1 or any(len(row) != n for row in grid):
        raise DimensionMismatch("matrix must be square and non-empty")
    entries = tuple(tuple(Fraction(x) for x in row) for row in grid)
    for i in range(n):
        for j in range(i + 1, n):
            if entries[i][j] != entries[j][i]:
                raise NotSymmetric(f"entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) differ")
    for k in range(1, n + 1):
        if det([row[:k] for row in entries[:k]]) <= 0:
            raise NotPositiveDefinite(k)
    return FormMatrix(n, entries)


def evaluate(Q: FormMatrix, x: Sequence) -> Fraction:
    if len(x) != Q.n:
        raise DimensionMismatch(f"vector of length {len(x)} against form of size {Q.n}")
    xs = [Fraction(v) for v in x]
    total = Fraction(0)
    for i in range(Q.n):
        for j in range(Q.n):
            total += Q.entries[i][j] * xs[i] * xs[j]
    return total


def recursive_form(Q: FormMatrix) -> RecursiveForm:
    """Decompose Q as sum_i b_i (x_i + sum_{j>i} mu_ij x_j)^2, exactly."""
    n = Q.n
    work = [[Q.entries[i][j] for j in range(n)] for i in range(n)]
    b: dict = {}
    mu: dict = {}
    for i in range(n):
        pivot = work[i][i]
        b[i + 1] = pivot
        for j in range(i + 1, n):
            mu[(i + 1, j + 1)] = work[i][j] / pivot
        for r in range(i + 1, n):  # Schur complement of the pivot
            for c in range(i + 1, n):
                work[r][c] -= work[i][r] * work[i][c] / pivot
    return RecursiveForm(n, b, mu)


def matrix_from_recursive(rf: RecursiveForm) -> FormMatrix:
    n = rf.n
    rows = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        coeff = [Fraction(0)] * n
        coeff[k - 1] = Fraction(1)
        for j in range(k + 1, n + 1):
            coeff[j - 1] = rf.mu[(k, j)]
        for i in range(n):
            for j in range(n):
                rows[i][j] += rf.b[k] * coeff[i] * coeff[j]
    return FormMatrix(n, tuple(tuple(row) for row in rows))


def minors(Q: FormMatrix) -> Minors:
    """All bordered minors B_ij and deleted-row/column companions C_i."""
    n = Q.n
    B: dict = {(0, 0): Fraction(1)}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            rows = [
                [Q.entries[r][c] for c in range(i - 1)] + [Q.entries[r][j - 1]]
                for r in range(i)
            ]
            B[(i, j)] = det(rows)
    C: dict = {}
    for i in range(1, n):
        idx = [k for k in range(i + 1) if k != i - 1]  # rows/cols 1..i+1 minus i
        C[i] = det([[Q.entries[r][c] for c in idx] for r in idx])
    return Minors(n, B, C)


def _shift_matrix(n: int, r: int, s: int, a: int) -> list:
    m = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    m[r - 1][s - 1] = a
    return m


def _swap_matrix(n: int, r: int) -> list:
    m = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    m[r - 1][r - 1] = m[r][r] = 0
    m[r - 1][r] = m[r][r - 1] = 1
    return m


def transform(Q: FormMatrix, T: Sequence[Sequence[int]]) -> FormMatrix:
    """The form x -> Q(T x), i.e. the matrix T^t Q T."""
    n = Q.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = Fraction(0)
            for k in range(n):
                for l in range(n):
                    acc += T[k][i] * Q.entries[k][l] * T[l][j]
            row.append(acc)
        rows.append(tuple(row))
    return FormMatrix(n, tuple(rows))


def _check_shift_indices(n: int, r: int, s: int) -> None:
    if not (1 <= r <= n and 1 <= s <= n):
        raise IndexOutOfRange(f"shift indices ({r},{s}) for size {n}")
    if r >= s:
        raise ShiftDirectionInvalid(f"shift needs r < s, got ({r},{s})")


def apply_shift(Q: FormMatrix, r: int, s: int, a: int) -> FormMatrix:
    """Substitute x_r -> x_r + a x_s (r < s)."""
    _check_shift_indices(Q.n, r, s)
    return transform(Q, _shift_matrix(Q.n, r, s, a))


def apply_swap(Q: FormMatrix, r: int) -> FormMatrix:
    """Swap the variables x_r and x_{r+1}."""
    if not 1 <= r < Q.n:
        raise IndexOutOfRange(f"swap index {r} for size {Q.n}")
    return transform(Q, _swap_matrix(Q.n, r))


def shift_recursive(rf: RecursiveForm, r: int, s: int, a: int) -> RecursiveForm:
    """Closed-form effect of the shift x_r -> x_r + a x_s on (b, mu)."""
    _check_shift_indices(rf.n, r, s)
    mu = dict(rf.mu)
    mu[(r, s)] = rf.mu[(r, s)] + a
    for i in range(1, r):
        mu[(i, s)] = rf.mu[(i, s)] + a * rf.mu[(i, r)]
    return RecursiveForm(rf.n, dict(rf.b), mu)


def swap_recursive(rf: RecursiveForm, r: int) -> RecursiveForm:
    """Closed-form effect of swapping x_r and x_{r+1} on (b, mu)."""
    n = rf.n
    if not 1 <= r < n:
        raise IndexOutOfRange(f"swap index {r} for size {n}")
    b, mu = rf.b, rf.mu
    m = mu[(r, r + 1)]
    bt = dict(b)
    bt[r] = b[r + 1] + m * m * b[r]
    bt[r + 1] = b[r] * b[r + 1] / bt[r]
    nmu = dict(mu)
    for i in range(1, r):
        nmu[(i, r)] = mu[(i, r + 1)]
        nmu[(i, r + 1)] = mu[(i, r)]
    nmu[(r, r + 1)] = b[r] * m / bt[r]
    for j in range(r + 2, n + 1):
        nmu[(r, j)] = (b[r] * m * mu[(r, j)] + b[r + 1] * mu[(r + 1, j)]) / bt[r]
        nmu[(r + 1, j)] = mu[(r, j)] - m * mu[(r + 1, j)]
    return RecursiveForm(n, bt, nmu)


def _check_omega(omega: Fraction) -> Fraction:
    omega = Fraction(omega)
    if not Fraction(3, 4) <= omega <= 1:
        raise OmegaOutOfRange(f"omega must lie in [3/4, 1], got {omega}")
    return omega


def _size_pairs(n: int, partial: bool):
    for i in range(1, n + 1):
        if partial:
            if i + 1 <= n:
                yield (i, i + 1)
        else:
            for j in range(i + 1, n + 1):
                yield (i, j)


def is_lll_reduced(
    Q: FormMatrix, omega: Fraction, partial: bool = False
) -> tuple[bool, Optional[Condition]]:
    """Check the size and Lovasz conditions; report the first violation.

    Violations are scanned size conditions first in (i, j) order, then
    Lovasz conditions by index.
    """
    omega = _check_omega(omega)
    rf = recursive_form(Q)
    for (i, j) in _size_pairs(Q.n, partial):
        if abs(rf.mu[(i, j)]) > HALF:
            return False, ("size", i, j)
    for i in range(1, Q.n):
        m = rf.mu[(i, i + 1)]
        if rf.b[i + 1] + m * m * rf.b[i] < omega * rf.b[i]:
            return False, ("lovasz", i)
    return True, None


def _entry_bits(Q: FormMatrix) -> int:
    worst = 1
    for row in Q.entries:
        for x in row:
            worst = max(worst, abs(x.numerator).bit_length() + x.denominator.bit_length())
    return worst


def lll_reduce(
    Q: FormMatrix,
    omega: Fraction = Fraction(3, 4),
    partial: bool = False,
    iteration_cap: Optional[int] = None,
) -> ReductionResult:
    """Reduce Q by shifts and swaps until (partially) LLL-reduced.

    The loop always fixes the smallest index with a Lovasz violation; the
    shift coefficient is -round(mu) with half-integer ties toward zero.
    At omega == 1 a hard iteration cap guards against boundary stalling
    (the swap-count bound degenerates there); the default cap is
    10 * n^2 * (bit size of the largest entry).
    """
    omega = _check_omega(omega)
    n = Q.n
    rf = recursive_form(Q)
    T = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    swaps = shifts = 0

    def do_shift(r: int, s: int) -> None:
        nonlocal rf, shifts
        a = -nearest_int(rf.mu[(r, s)])
        if a == 0:
            return
        rf = shift_recursive(rf, r, s, a)
        for row in T:
            row[s - 1] += a * row[r - 1]
        shifts += 1

    for i in range(1, n):
        do_shift(i, i + 1)

    cap = iteration_cap if iteration_cap is not None else 10 * n * n * _entry_bits(Q)
    iterations = 0
    while True:
        bad = None
        for i in range(1, n):
            m = rf.mu[(i, i + 1)]
            if rf.b[i + 1] + m * m * rf.b[i] < omega * rf.b[i]:
                bad = i
                break
        if bad is None:
            break
        iterations += 1
        if omega == 1 and iterations > cap:
            raise IterationCapExceeded(f"no convergence within {cap} swaps at omega = 1")
        rf = swap_recursive(rf, bad)
        for row in T:
            row[bad - 1], row[bad] = row[bad], row[bad - 1]
        swaps += 1
        for (r, s) in ((bad - 1, bad), (bad, bad + 1), (bad + 1, bad + 2)):
            if 1 <= r and s <= n:
                do_shift(r, s)

    if not partial:
        for s in range(2, n + 1):
            for r in range(s - 1, 0, -1):
                do_shift(r, s)

    reduced = transform(Q, T)
    return ReductionResult(reduced, tuple(tuple(row) for row in T), swaps, shifts)


def minkowski_reduced_small(Q: FormMatrix) -> bool:
    """Minkowski reducedness for binary and ternary forms.

    Binary [[a,b],[b,c]]: 2|b| <= a <= c.  Ternary: the diagonal is
    sorted, twice each off-diagonal entry is bounded by its diagonal, and
    a + d + 2(+-b +-c +-e) >= 0 over the four sign patterns with zero or
    two minus signs.  Matrix entries are half the polynomial cross
    coefficients, hence the factors of two.
    """
    if Q.n == 2:
        a, b, c = Q[(1, 1)], Q[(1, 2)], Q[(2, 2)]
        return 2 * abs(b) <= a <= c
    if Q.n == 3:
        a, b, c = Q[(1, 1)], Q[(1, 2)], Q[(1, 3)]
        d, e, f = Q[(2, 2)], Q[(2, 3)], Q[(3, 3)]
        if not (a <= d <= f):
            return False
        if 2 * abs(b) > a or 2 * abs(c) > a or 2 * abs(e) > d:
            return False
        for sb, sc, se in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
            if a + d + 2 * (sb * b + sc * c + se * e) < 0:
                return False
        return True
    raise UnsupportedDimension(f"explicit test only for n in (2, 3), got {Q.n}")
