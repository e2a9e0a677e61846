"""Brute-force ground truth used by tests and cross-checks.

Nothing here is consumed by the sweep itself: these are independent,
exhaustive computations (direct scans, Euclid, bounded enumeration) that
the fast paths are validated against.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil, floor, gcd
from typing import Optional, Sequence

from .errors import BoundTooSmall, UnsupportedDimension
from .qform import FormMatrix, evaluate, recursive_form
from .ratutil import isqrt_floor, nearest_int


@dataclass(frozen=True)
class BestApproxRecord:
    q: int
    p: tuple  # nearest lattice point to q * alpha
    err2: Fraction  # ||q*alpha||^2, exact


@dataclass(frozen=True)
class MinimaReport:
    k: int
    values: tuple  # mu_1 <= ... <= mu_k
    witnesses: tuple  # independent integer vectors achieving the values


def best_approximations(alpha: Sequence[Fraction], q_max: int) -> list[BestApproxRecord]:
    """Strictly improving nearest-lattice-point records for q = 1..q_max."""
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    alpha = [Fraction(a) for a in alpha]
    records: list[BestApproxRecord] = []
    best: Optional[Fraction] = None
    for q in range(1, q_max + 1):
        p = tuple(nearest_int(q * a) for a in alpha)
        err2 = sum(((q * a - pi) ** 2 for a, pi in zip(alpha, p)), Fraction(0))
        if best is None or err2 < best:
            records.append(BestApproxRecord(q, p, err2))
            best = err2
            if best == 0:
                break
    return records


def classical_cf(alpha: Fraction) -> list[tuple[int, int]]:
    """Continued fraction convergents (p_k, q_k) of alpha, by Euclid."""
    alpha = Fraction(alpha)
    n, d = alpha.numerator, alpha.denominator
    convergents = []
    p2, p1 = 0, 1  # p_{-2}, p_{-1}
    q2, q1 = 1, 0
    while d != 0:
        a = n // d
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        convergents.append((p1, q1))
        n, d = d, n - a * d
    return convergents


def _enumerate_below(Q: FormMatrix, bound: Fraction):
    """All nonzero x with Q(x) <= bound, canonical sign (first nonzero > 0).

    Recursive-form back-substitution: at level i the remaining budget
    caps (x_i + c_i)^2 by (bound - spent)/b_i, so the integer range for
    x_i is exact.
    """
    rf = recursive_form(Q)
    n = Q.n
    xs = [0] * n
    found = []

    def descend(i: int, spent: Fraction) -> None:
        if i == 0:
            if any(xs):
                vec = tuple(xs)
                for v in vec:
                    if v > 0:
                        break
                    if v < 0:
                        vec = tuple(-w for w in vec)
                        break
                found.append((spent, vec))
            return
        c = sum((rf.mu[(i, j)] * xs[j - 1] for j in range(i + 1, n + 1)), Fraction(0))
        radius2 = (bound - spent) / rf.b[i]
        s = isqrt_floor(radius2)
        lo = ceil(-c) - s - 1
        hi = floor(-c) + s + 1
        for x in range(lo, hi + 1):
            off = x + c
            cost = rf.b[i] * off * off
            if cost + spent <= bound:
                xs[i - 1] = x
                descend(i - 1, spent + cost)
        xs[i - 1] = 0

    descend(n, Fraction(0))
    return sorted(set(found))


def _independent(vectors: list, candidate) -> bool:
    rows = [list(map(Fraction, v)) for v in vectors] + [list(map(Fraction, candidate))]
    rank = 0
    cols = len(rows[0])
    for col in range(cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(rank + 1, len(rows)):
            if rows[r][col] != 0:
                f = rows[r][col] / rows[rank][col]
                for c in range(col, cols):
                    rows[r][c] -= f * rows[rank][c]
        rank += 1
    return rank == len(rows)


def successive_minima(Q: FormMatrix, k: int, bound: Fraction) -> MinimaReport:
    """Exact mu_1..mu_k with witnesses, exhaustive over Q(x) <= bound.

    The caller must pass bound >= mu_k; with fewer than k independent
    vectors inside the bound this raises BoundTooSmall.
    """
    if not 1 <= k <= Q.n:
        raise ValueError(f"need 1 <= k <= {Q.n}")
    bound = Fraction(bound)
    values = []
    witnesses: list = []
    for value, vec in _enumerate_below(Q, bound):
        if _independent(witnesses, vec):
            witnesses.append(vec)
            values.append(value)
            if len(witnesses) == k:
                return MinimaReport(k, tuple(values), tuple(witnesses))
    raise BoundTooSmall(f"only {len(witnesses)} independent vectors with Q(x) <= {bound}")


def shortest_vector(Q: FormMatrix, bound: Fraction):
    """Convenience: (mu_1, witness) by exhaustive enumeration."""
    report = successive_minima(Q, 1, bound)
    return report.values[0], report.witnesses[0]


def relation_search(alpha: Sequence[Fraction], height: int) -> tuple[tuple[int, ...], Fraction]:
    """Best (l0, l) with max-norm <= height minimizing |l0 + l . alpha|.

    Exhaustive (exponential in d log height); intended as ground truth at
    small sizes only.  The winner is sign-normalized so the first nonzero
    entry of l (or l0 when l = 0) is positive; ties break by smaller
    Euclidean norm, then lexicographically on (l0, l).
    """
    if height < 1:
        raise ValueError("height must be >= 1")
    alpha = [Fraction(a) for a in alpha]
    best_vec = None
    best_key = None
    for cand in product(range(-height, height + 1), repeat=len(alpha) + 1):
        if not any(cand):
            continue
        l0, l = cand[0], cand[1:]
        value = abs(l0 + sum((li * a for li, a in zip(l, alpha)), Fraction(0)))
        for x in l:
            if x != 0:
                lead = x
                break
        else:
            lead = l0
        if lead < 0:
            cand = tuple(-x for x in cand)
        key = (value, sum(x * x for x in cand), cand)
        if best_key is None or key < best_key:
            best_key = key
            best_vec = cand
    return best_vec, best_key[0]


def minkowski_reduced_bruteforce(Q: FormMatrix, box: int = 3) -> bool:
    """Definition-level Minkowski check by enumeration over |m_i| <= box.

    For i = 1..n requires Q(e_i) <= Q(m) for every m in the box with
    gcd(m_i, ..., m_n) = 1.
    """
    if Q.n not in (2, 3):
        raise UnsupportedDimension("bruteforce validator covers n in (2, 3)")
    n = Q.n
    diag = [Q.entries[i][i] for i in range(n)]
    for m in product(range(-box, box + 1), repeat=n):
        if not any(m):
            continue
        value = evaluate(Q, m)
        g = 0
        for i in range(n - 1, -1, -1):  # g = gcd(m_i..m_n) as i walks down
            g = gcd(g, abs(m[i]))
            if g == 1 and value < diag[i]:
                return False
    return True
