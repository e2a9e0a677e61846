"""Parametric sweep state: minors of Q_t(P x) as affine functions of t.

The sweep form in the primary mode is

    Q_t = (x_1 - a_1 y)^2 + ... + (x_d - a_d y)^2 + t y^2

in the variable order (x_1, ..., x_d, y); decreasing t tightens the
approximation.  The dual mode uses

    t (y + a_1 x_1 + ... + a_d x_d)^2 + x_1^2 + ... + x_d^2

in the order (y, x_1, ..., x_d) and sweeps t upward, producing small
values of the linear form instead.

Every minor B_ij and companion C_i of the substituted form is affine in
t, so a DetState stores them as (slope, constant) pairs and the reduction
conditions become sign questions about affine functions.  Shift and swap
substitutions update the family in closed form; any division that a swap
requires is exact, and a nonzero remainder means the state is corrupt.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    ConfigInvalid,
    IndexOutOfRange,
    InexactDivision,
    InvalidStart,
    NonAffineMinor,
    NonPositiveT,
    ShiftDirectionInvalid,
    StateNotReduced,
)
from .qform import FormMatrix, Minors, form_from_matrix, minors as numeric_minors
from .ratutil import sign

PRIMARY = "primary"
DUAL = "dual"

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class AffineInT:
    """u*t + v with exact rational coefficients."""

    u: Fraction
    v: Fraction

    def at(self, t: Fraction) -> Fraction:
        return self.u * t + self.v

    def __add__(self, other: "AffineInT") -> "AffineInT":
        return AffineInT(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "AffineInT") -> "AffineInT":
        return AffineInT(self.u - other.u, self.v - other.v)

    def scaled(self, c: Fraction) -> "AffineInT":
        return AffineInT(self.u * c, self.v * c)

    def times(self, other: "AffineInT") -> "TPoly":
        return TPoly(
            self.v * other.v,
            self.u * other.v + self.v * other.u,
            self.u * other.u,
        )

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0


def affine(u, v) -> AffineInT:
    return AffineInT(Fraction(u), Fraction(v))


@dataclass(frozen=True)
class TPoly:
    """c0 + c1*t + c2*t^2; degree-2 intermediates from products of affines."""

    c0: Fraction
    c1: Fraction
    c2: Fraction

    def __add__(self, other: "TPoly") -> "TPoly":
        return TPoly(self.c0 + other.c0, self.c1 + other.c1, self.c2 + other.c2)

    def __sub__(self, other: "TPoly") -> "TPoly":
        return TPoly(self.c0 - other.c0, self.c1 - other.c1, self.c2 - other.c2)


def tpoly_exact_div(num: TPoly, den: AffineInT) -> AffineInT:
    """Divide a degree <= 2 polynomial by an affine one, requiring an
    affine quotient and zero remainder.  Failure signals a corrupted
    state, never bad user input."""
    if den.is_zero():
        raise InexactDivision("division by the zero polynomial")
    if den.u == 0:
        if num.c2 != 0:
            raise InexactDivision("quotient would have degree 2")
        return AffineInT(num.c1 / den.v, num.c0 / den.v)
    q = num.c2 / den.u
    w = (num.c1 - q * den.v) / den.u
    if num.c0 - w * den.v != 0:
        raise InexactDivision(f"remainder {num.c0 - w * den.v} is nonzero")
    return AffineInT(q, w)


def sign_below(f: AffineInT, t0: Fraction) -> int:
    """Sign of f at t0 - epsilon for infinitesimal epsilon > 0."""
    value = f.at(t0)
    if value != 0:
        return sign(value)
    if f.u != 0:
        return -sign(f.u)
    return 0


def sign_above(f: AffineInT, t0: Fraction) -> int:
    """Sign of f at t0 + epsilon for infinitesimal epsilon > 0."""
    value = f.at(t0)
    if value != 0:
        return sign(value)
    if f.u != 0:
        return sign(f.u)
    return 0


@dataclass(frozen=True)
class ParamSetup:
    """Normalized targets: |alpha_i| <= 1/2 with the integer offsets kept
    so results can be reported against the original inputs."""

    alpha: tuple
    offsets: tuple
    mode: str = PRIMARY

    @property
    def d(self) -> int:
        return len(self.alpha)

    @property
    def n(self) -> int:
        return self.d + 1

    def raw_alpha(self) -> tuple:
        return tuple(a + m for a, m in zip(self.alpha, self.offsets))


def make_setup(raw_alpha: Sequence[Fraction], mode: str = PRIMARY) -> ParamSetup:
    if mode not in (PRIMARY, DUAL):
        raise ConfigInvalid(f"unknown mode {mode!r}")
    raw = [Fraction(a) for a in raw_alpha]
    if not raw:
        raise ConfigInvalid("at least one target number is required")
    from .ratutil import nearest_int

    offsets = tuple(nearest_int(a) for a in raw)
    alpha = tuple(a - m for a, m in zip(raw, offsets))
    assert all(abs(a) <= Fraction(1, 2) for a in alpha)
    return ParamSetup(alpha, offsets, mode)


@dataclass(frozen=True)
class DetState:
    """The sweep's working state: every B_ij and C_i as affine-in-t, with
    the accumulated unimodular substitution P.  Treat as immutable."""

    setup: ParamSetup
    B: dict  # (i, j) -> AffineInT for 1 <= i <= j <= n, plus (0, 0) = 1
    C: dict  # i -> AffineInT for 1 <= i < n
    P: tuple  # n x n integer matrix, |det| = 1

    @property
    def n(self) -> int:
        return self.setup.n


def identity_matrix(n: int) -> tuple:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def int_det(M: Sequence[Sequence[int]]) -> int:
    from .qform import det

    d = det([list(row) for row in M])
    assert d.denominator == 1
    return d.numerator


def base_matrix(setup: ParamSetup, t: Fraction) -> list:
    """Matrix of the sweep form at a concrete t, before substitution."""
    d, t = setup.d, Fraction(t)
    a = setup.alpha
    if setup.mode == PRIMARY:
        rows = [[ONE if i == j else ZERO for j in range(d)] + [-a[i]] for i in range(d)]
        rows.append([-a[i] for i in range(d)] + [t + sum((x * x for x in a), ZERO)])
        return rows
    rows = [[t] + [t * a[j] for j in range(d)]]
    for i in range(d):
        rows.append([t * a[i]] + [(ONE if i == j else ZERO) + t * a[i] * a[j] for j in range(d)])
    return rows


def transformed_matrix(setup: ParamSetup, P: Sequence[Sequence[int]], t: Fraction) -> list:
    """Matrix of Q_t(P x), i.e. P^t M(t) P, exactly."""
    n = setup.n
    M = base_matrix(setup, t)
    MP = [[sum(M[i][k] * P[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return [[sum(P[k][i] * MP[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _validate_slopes(setup: ParamSetup, B: dict, C: dict) -> None:
    # Integer t-coefficients are a theorem for the primary form; a
    # non-integer slope can only come from a coding error.
    if setup.mode != PRIMARY:
        return
    for key, f in B.items():
        if f.u.denominator != 1:
            raise NonAffineMinor(f"B{key} has non-integer slope {f.u}")
    for key, f in C.items():
        if f.u.denominator != 1:
            raise NonAffineMinor(f"C{key} has non-integer slope {f.u}")


def init_state(setup: ParamSetup, t_start: Fraction) -> DetState:
    """Fresh state at P = identity, from closed forms of the initial minors."""
    t_start = Fraction(t_start)
    d, n, a = setup.d, setup.n, setup.alpha
    if setup.mode == PRIMARY:
        if t_start < 1:
            raise InvalidStart(f"primary sweep starts at t >= 1, got {t_start}")
        B = {(0, 0): affine(0, 1)}
        for i in range(1, d + 1):
            B[(i, i)] = affine(0, 1)
            for j in range(i + 1, d + 1):
                B[(i, j)] = affine(0, 0)
            B[(i, n)] = affine(0, -a[i - 1])
        B[(n, n)] = affine(1, 0)
        C = {i: affine(0, 1) for i in range(1, d)}
        C[d] = affine(1, a[d - 1] * a[d - 1])
    else:
        if t_start <= 0:
            raise InvalidStart(f"dual sweep starts at t > 0, got {t_start}")
        B = {(0, 0): affine(0, 1)}
        for i in range(1, n + 1):
            B[(i, i)] = affine(1, 0)
        for j in range(2, n + 1):
            B[(1, j)] = affine(a[j - 2], 0)
        for i in range(2, n + 1):
            for j in range(i + 1, n + 1):
                B[(i, j)] = affine(0, 0)
        C = {1: affine(a[0] * a[0], 1)}
        for i in range(2, n):
            C[i] = affine(1, 0)
    state = DetState(setup, B, C, identity_matrix(n))
    for _, g in conditions(state, ONE, partial=False):
        if g.at(t_start) < 0:
            raise InvalidStart(f"start form is not reduced at t = {t_start}")
    return state


def conditions(state: DetState, omega: Fraction, partial: bool = False) -> list:
    """Reducedness as affine inequalities g(t) >= 0.

    Size conditions 2|B_ij| <= B_ii split into the pair B_ii +- 2 B_ij >= 0
    (ids ("size", i, j, +-1)); Lovasz conditions are C_i - omega B_ii >= 0
    (ids ("lovasz", i)).  Order: sizes in (i, j) order, then Lovasz.
    """
    n = state.n
    out = []
    for i in range(1, n + 1):
        top = i + 2 if partial else n + 1
        for j in range(i + 1, min(top, n + 1)):
            bij2 = state.B[(i, j)].scaled(Fraction(2))
            out.append((("size", i, j, 1), state.B[(i, i)] + bij2))
            out.append((("size", i, j, -1), state.B[(i, i)] - bij2))
    for i in range(1, n):
        out.append((("lovasz", i), state.C[i] - state.B[(i, i)].scaled(Fraction(omega))))
    return out


def critical_t(
    state: DetState,
    omega: Fraction,
    partial: bool,
    t_now: Fraction,
) -> tuple[Optional[Fraction], list]:
    """Next event time when sweeping away from t_now, with the condition
    ids that become tight there.  None means the state stays reduced for
    the rest of the sweep (down to 0, or up to infinity in dual mode)."""
    t_now = Fraction(t_now)
    descending = state.setup.mode == PRIMARY
    conds = conditions(state, omega, partial)
    for cid, g in conds:
        if g.at(t_now) < 0:
            raise StateNotReduced(f"condition {cid} already violated at t = {t_now}")
    best: Optional[Fraction] = None
    hits: list = []
    for cid, g in conds:
        if descending:
            if g.u <= 0:
                continue  # never fails below t_now
            root = -g.v / g.u
            if root <= 0:
                continue  # holds on all of (0, t_now]
            better = best is None or root > best
        else:
            if g.u >= 0:
                continue  # never fails above t_now
            root = -g.v / g.u
            better = best is None or root < best
        if better:
            best, hits = root, [cid]
        elif root == best:
            hits.append(cid)
    return best, hits


def _mutate_cols_shift(P: tuple, r: int, s: int, a: int) -> tuple:
    return tuple(
        tuple(row[j] + a * row[r - 1] if j == s - 1 else row[j] for j in range(len(row)))
        for row in P
    )


def _mutate_cols_swap(P: tuple, r: int) -> tuple:
    def permute(row):
        row = list(row)
        row[r - 1], row[r] = row[r], row[r - 1]
        return tuple(row)

    return tuple(permute(row) for row in P)


def shift_update(state: DetState, r: int, s: int, a: int) -> DetState:
    """x_r -> x_r + a x_s: B_is gains a B_ir for i <= r; C_r follows when
    the shift is adjacent (s = r + 1); everything else is untouched."""
    n = state.n
    if not (1 <= r <= n and 1 <= s <= n):
        raise IndexOutOfRange(f"shift indices ({r},{s}) for size {n}")
    if r >= s:
        raise ShiftDirectionInvalid(f"shift needs r < s, got ({r},{s})")
    if a == 0:
        return state
    af = Fraction(a)
    B = dict(state.B)
    for i in range(1, r + 1):
        B[(i, s)] = state.B[(i, s)] + state.B[(i, r)].scaled(af)
    C = dict(state.C)
    if r == s - 1:
        C[r] = (
            state.C[r]
            + state.B[(r, s)].scaled(2 * af)
            + state.B[(r, r)].scaled(af * af)
        )
    _validate_slopes(state.setup, B, C)
    return DetState(state.setup, B, C, _mutate_cols_shift(state.P, r, s, a))


def swap_update(state: DetState, r: int) -> DetState:
    """x_r <-> x_{r+1}: closed-form update of the minor family.

    The divisions are exact on a consistent state; InexactDivision here
    means the state was corrupted earlier.
    """
    n = state.n
    if not 1 <= r < n:
        raise IndexOutOfRange(f"swap index {r} for size {n}")
    oB, oC = state.B, state.C
    B = dict(oB)
    B[(r, r)] = oC[r]
    for i in range(1, r):
        B[(i, r)] = oB[(i, r + 1)]
        B[(i, r + 1)] = oB[(i, r)]
    for j in range(r + 2, n + 1):
        num = oB[(r, r + 1)].times(oB[(r, j)]) + oB[(r - 1, r - 1)].times(oB[(r + 1, j)])
        B[(r, j)] = tpoly_exact_div(num, oB[(r, r)])
        num = oB[(r + 1, r + 1)].times(oB[(r, j)]) - oB[(r, r + 1)].times(oB[(r + 1, j)])
        B[(r + 1, j)] = tpoly_exact_div(num, oB[(r, r)])
    C = dict(oC)
    C[r] = oB[(r, r)]
    if r > 1:
        num = oB[(r - 2, r - 2)].times(oC[r]) + oB[(r - 1, r + 1)].times(oB[(r - 1, r + 1)])
        C[r - 1] = tpoly_exact_div(num, oB[(r - 1, r - 1)])
    if r < n - 1:
        num = oB[(r + 2, r + 2)].times(oC[r]) + B[(r + 1, r + 2)].times(B[(r + 1, r + 2)])
        C[r + 1] = tpoly_exact_div(num, oB[(r + 1, r + 1)])
    _validate_slopes(state.setup, B, C)
    return DetState(state.setup, B, C, _mutate_cols_swap(state.P, r))


def recompute_state(setup: ParamSetup, P: Sequence[Sequence[int]]) -> DetState:
    """From-scratch state for a given substitution, by sampling.

    Each minor of Q_t(P x) is affine in t, so its values at t = 1 and
    t = 2 determine it; the value at t = 3 cross-checks affineness.  This
    path shares nothing with the incremental updates and is the oracle
    they are validated against.
    """
    if abs(int_det(P)) != 1:
        raise ConfigInvalid("substitution matrix must be unimodular")
    n = setup.n
    samples = [Fraction(1), Fraction(2), Fraction(3)]
    mins = [numeric_minors(form_from_matrix(transformed_matrix(setup, P, t))) for t in samples]

    def fit(values) -> AffineInT:
        u = values[1] - values[0]
        v = values[0] - u
        if values[2] != 3 * u + v:
            raise NonAffineMinor("three-point affineness check failed")
        return AffineInT(u, v)

    B = {(0, 0): affine(0, 1)}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            B[(i, j)] = fit([m.B[(i, j)] for m in mins])
    C = {i: fit([m.C[i] for m in mins]) for i in range(1, n)}
    _validate_slopes(setup, B, C)
    return DetState(setup, B, C, tuple(tuple(int(x) for x in row) for row in P))


def eval_at(state: DetState, t: Fraction) -> tuple[FormMatrix, Minors]:
    """Concrete form Q_t(P x) and its minors at a positive rational t."""
    t = Fraction(t)
    if t <= 0:
        raise NonPositiveT(f"need t > 0, got {t}")
    form = form_from_matrix(transformed_matrix(state.setup, state.P, t))
    B = {key: f.at(t) for key, f in state.B.items()}
    C = {key: f.at(t) for key, f in state.C.items()}
    return form, Minors(state.n, B, C)


def assert_consistent(state: DetState) -> None:
    """Test hook: check the determinant identity coefficient-wise, the
    overall-determinant invariant and slope integrality."""
    n = state.n
    for i in range(1, n):
        lhs = state.C[i].times(state.B[(i, i)])
        rhs = state.B[(i + 1, i + 1)].times(state.B[(i - 1, i - 1)])
        rhs = rhs + state.B[(i, i + 1)].times(state.B[(i, i + 1)])
        if lhs != rhs:
            raise AssertionError(f"determinant identity fails at i = {i}")
    if state.setup.mode == PRIMARY and state.B[(n, n)] != affine(1, 0):
        raise AssertionError("overall determinant drifted from t")
    _validate_slopes(state.setup, state.B, state.C)
