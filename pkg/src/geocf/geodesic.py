"""The sweep driver: event loop, trace, convergents, certificates.

Starting from the reduced state at t = 1 the driver repeatedly asks for
the next critical t (where some reduction condition becomes tight),
re-reduces the form "just past" that t, and logs the substitution.  The
first column of the accumulated transform is the current simultaneous
approximation (primary mode) or the current small linear-form vector
(dual mode).

"Just past" is handled symbolically through sign_below/sign_above; no
numeric epsilon exists anywhere, which is what makes traces replayable
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    ConfigInvalid,
    InsufficientTrace,
    IterationCapExceeded,
    NonPositiveEpsilon,
    NonPositiveT,
    OmegaOutOfRange,
)
from .qform import form_from_matrix, is_lll_reduced
from .ratutil import nearest_int, vec_gcd
from .tform import (
    DUAL,
    PRIMARY,
    AffineInT,
    DetState,
    ParamSetup,
    conditions,
    critical_t,
    init_state,
    int_det,
    shift_update,
    sign_above,
    sign_below,
    swap_update,
    transformed_matrix,
)

FULL = "full"
PARTIAL = "partial"

T_START = Fraction(1)


@dataclass(frozen=True)
class RunConfig:
    setup: ParamSetup
    omega: Fraction = Fraction(3, 4)
    variant: str = FULL
    t_limit: Optional[Fraction] = None  # sweep bound in the travel direction
    max_events: Optional[int] = None
    q_max: Optional[int] = None
    trace_detail: str = "events"  # or "full"


@dataclass(frozen=True)
class Event:
    k: int
    t: Fraction
    ops: tuple  # ("swap", r) and ("shift", r, s, a) records, in applied order
    P_after: tuple


@dataclass(frozen=True)
class Convergent:
    p: tuple  # numerators against the original (denormalized) targets
    q: int
    err2: Fraction  # primary: |p - q alpha|^2; dual: (q + p . alpha)^2
    t_lo: Optional[Fraction]
    t_hi: Optional[Fraction]  # None = unbounded (dual tail window)


@dataclass(frozen=True)
class Trace:
    config: RunConfig
    events: tuple
    convergents: tuple
    termination: str  # exact | t_min | max_events | q_max
    snapshots: Optional[tuple] = None  # (B, C) dicts per event when detail == full


@dataclass(frozen=True)
class CertifyResult:
    verdict: str  # certified | inconclusive | refuted
    p: Optional[tuple] = None
    q: Optional[int] = None


@dataclass(frozen=True)
class RankProbeReport:
    rows: tuple  # (k, t, per-index form values), k = None for the closing row
    threshold: Fraction
    flagged: tuple  # 1-based indices whose value drops below the threshold
    relation_floor: Optional[Fraction] = None


def validate_config(config: RunConfig) -> None:
    if not Fraction(3, 4) <= Fraction(config.omega) <= 1:
        raise OmegaOutOfRange(f"omega must lie in [3/4, 1], got {config.omega}")
    if config.variant not in (FULL, PARTIAL):
        raise ConfigInvalid(f"unknown variant {config.variant!r}")
    if config.trace_detail not in ("events", "full"):
        raise ConfigInvalid(f"unknown trace detail {config.trace_detail!r}")
    if config.t_limit is not None and config.t_limit <= 0:
        raise ConfigInvalid("t limit must be positive")
    if config.max_events is not None and config.max_events < 1:
        raise ConfigInvalid("max-events must be >= 1")
    if config.q_max is not None and config.q_max < 1:
        raise ConfigInvalid("q-max must be >= 1")


def _boundary_sign(mode: str):
    return sign_below if mode == PRIMARY else sign_above


def _shift_coefficient(state: DetState, i: int, j: int, t0: Fraction) -> int:
    """-round(mu_ij just past t0), ties broken by the drift of mu."""
    bii = state.B[(i, i)].at(t0)
    m = state.B[(i, j)].at(t0) / bii
    residual = state.B[(i, j)] - state.B[(i, i)].scaled(m)  # vanishes at t0
    drift = _boundary_sign(state.setup.mode)(residual, t0)
    return -nearest_int(m, drift)


def _reduce_just_past(
    state: DetState, t0: Fraction, omega: Fraction, partial: bool
) -> tuple[DetState, tuple]:
    """Re-reduce the state for t infinitesimally past t0 (below in the
    primary sweep, above in the dual).  Violations are resolved in a
    fixed order: size conditions in (i, j) order first, then Lovasz by
    index, so traces are reproducible."""
    boundary = _boundary_sign(state.setup.mode)
    ops = []
    cap = 100 + 20 * state.n * state.n
    for _ in range(cap):
        offender = None
        for cid, g in conditions(state, omega, partial):
            if boundary(g, t0) < 0:
                offender = cid
                break
        if offender is None:
            return state, tuple(ops)
        if offender[0] == "size":
            _, i, j, _ = offender
            a = _shift_coefficient(state, i, j, t0)
            state = shift_update(state, i, j, a)
            ops.append(("shift", i, j, a))
        else:
            _, i = offender
            state = swap_update(state, i)
            ops.append(("swap", i))
    raise IterationCapExceeded(f"event at t = {t0} did not settle within {cap} operations")


def step(
    state: DetState, config: RunConfig, t_now: Fraction, k: int = 1
) -> tuple[DetState, Optional[Event]]:
    """One sweep event: find the critical t and re-reduce just past it.

    Returns the state unchanged with no event when the sweep has no
    further critical t (natural termination).
    """
    partial = config.variant == PARTIAL
    t_crit, _ = critical_t(state, config.omega, partial, t_now)
    if t_crit is None:
        return state, None
    state, ops = _reduce_just_past(state, t_crit, config.omega, partial)
    return state, Event(k, t_crit, ops, state.P)


def _q_slot(setup: ParamSetup) -> int:
    return setup.n - 1 if setup.mode == PRIMARY else 0


def _pe1(P: tuple) -> tuple:
    return tuple(row[0] for row in P)


def _exact_at_boundary(state: DetState) -> bool:
    # Value polynomial of the form at the first column: constant term is
    # the squared error at t = 0; the slope carries the dual-mode limit.
    pe1_value = state.B[(1, 1)]
    if state.setup.mode == PRIMARY:
        return pe1_value.v == 0
    return pe1_value.u == 0


def run(config: RunConfig) -> Trace:
    """Drive the sweep until a stop criterion or natural termination."""
    validate_config(config)
    setup = config.setup
    primary = setup.mode == PRIMARY
    partial = config.variant == PARTIAL
    state = init_state(setup, T_START)
    t_now = T_START
    events: list = []
    snapshots: list = []
    segments: list = []  # (pe1, window start) pending closure
    termination = None
    final_bound: Optional[Fraction] = None

    while True:
        t_crit, _ = critical_t(state, config.omega, partial, t_now)
        if t_crit is None:
            termination = "exact" if _exact_at_boundary(state) else "t_min"
            final_bound = Fraction(0) if primary else None
            break
        if config.t_limit is not None and (
            t_crit < config.t_limit if primary else t_crit > config.t_limit
        ):
            termination = "t_min"
            final_bound = t_crit
            break
        state, ops = _reduce_just_past(state, t_crit, config.omega, partial)
        k = len(events) + 1
        events.append(Event(k, t_crit, ops, state.P))
        if config.trace_detail == "full":
            snapshots.append((dict(state.B), dict(state.C)))
        segments.append((_pe1(state.P), t_crit))
        t_now = t_crit
        if config.max_events is not None and k >= config.max_events:
            termination = "max_events"
            break
        if config.q_max is not None and abs(_pe1(state.P)[_q_slot(setup)]) > config.q_max:
            termination = "q_max"
            break

    if final_bound is None and termination in ("max_events", "q_max"):
        # close the last window where the next event would have been
        t_next, _ = critical_t(state, config.omega, partial, t_now)
        final_bound = t_next if t_next is not None else (Fraction(0) if primary else None)

    convergents = _assemble_convergents(setup, events, final_bound)
    return Trace(
        config,
        tuple(events),
        convergents,
        termination,
        tuple(snapshots) if config.trace_detail == "full" else None,
    )


def _normalize_vector(p: tuple, q: int) -> tuple[tuple, int]:
    if q < 0 or (q == 0 and next((x for x in p if x != 0), 0) < 0):
        return tuple(-x for x in p), -q
    return p, q


def _assemble_convergents(
    setup: ParamSetup, events: Sequence[Event], final_bound: Optional[Fraction]
) -> tuple:
    """First-column vectors per window, denormalized, deduplicated.

    The identity-like columns (q = 0 in the primary sweep, p = 0 in the
    dual) carry no approximation and are skipped.
    """
    primary = setup.mode == PRIMARY
    windows: dict = {}
    order: list = []
    for idx, event in enumerate(events):
        start = event.t
        if idx + 1 < len(events):
            end = events[idx + 1].t
        else:
            end = final_bound
        lo, hi = (end, start) if primary else (start, end)
        column = _pe1(event.P_after)
        if primary:
            p, q = column[:-1], column[-1]
            if q == 0:
                continue
            p, q = _normalize_vector(p, q)
            p = tuple(pi + mi * q for pi, mi in zip(p, setup.offsets))
        else:
            q, p = column[0], column[1:]
            if all(x == 0 for x in p):
                continue
            q = q - sum(li * mi for li, mi in zip(p, setup.offsets))
            p, q = _normalize_vector(p, q)
        key = (p, q)
        if key in windows:
            old_lo, old_hi = windows[key]
            lo = old_lo if lo is None or (old_lo is not None and old_lo < lo) else lo
            hi = None if (old_hi is None or hi is None) else max(old_hi, hi)
            windows[key] = (lo, hi)
        else:
            windows[key] = (lo, hi)
            order.append(key)
    return tuple(
        Convergent(p, q, _exact_err2(setup, p, q), *windows[(p, q)]) for p, q in order
    )


def _exact_err2(setup: ParamSetup, p: tuple, q: int) -> Fraction:
    raw_alpha = setup.raw_alpha()
    if setup.mode == PRIMARY:
        return sum(((pi - q * a) ** 2 for pi, a in zip(p, raw_alpha)), Fraction(0))
    return (q + sum((li * a for li, a in zip(p, raw_alpha)), Fraction(0))) ** 2


def convergents(trace: Trace) -> tuple:
    return trace.convergents


def dirichlet_bound_holds(conv: Convergent, d: int) -> bool:
    """Exact check of err2 <= 2^(d/2) q^(-2/d), squared to integer powers:
    (err2^d q^2)^2 <= 2^(d^2)."""
    lhs = (conv.err2 ** d) * conv.q * conv.q
    return lhs * lhs <= 2 ** (d * d)


def certify_excellent(state: DetState, t: Fraction, epsilon: Fraction) -> CertifyResult:
    """Three-way excellence certificate at scale t.

    refuted: the first column is already too large for any epsilon-quality
    approximation to exist at this scale.  certified: the second column is
    so large that the excellent approximation, if one exists, can only be
    the first column.  All power comparisons are exact (cross-multiplied
    integer powers).
    """
    t = Fraction(t)
    epsilon = Fraction(epsilon)
    if t <= 0:
        raise NonPositiveT(f"need t > 0, got {t}")
    if epsilon <= 0:
        raise NonPositiveEpsilon(f"need epsilon > 0, got {epsilon}")
    setup = state.setup
    if setup.mode != PRIMARY:
        raise ConfigInvalid("certification applies to the primary sweep only")
    d = setup.d
    q1 = state.B[(1, 1)].at(t)
    matrix = transformed_matrix(setup, state.P, t)
    q2 = matrix[1][1]
    # threshold^(d+1) for 2^(d+1) eps^(2d/(d+1)) t^(1/(d+1))
    rhs = Fraction(2) ** ((d + 1) * (d + 1)) * epsilon ** (2 * d) * t
    if q1 ** (d + 1) > rhs:
        return CertifyResult("refuted")
    if q2 ** (d + 1) > rhs and q2 > 2 ** d * q1:
        column = _pe1(state.P)
        p, q = _normalize_vector(column[:-1], column[-1])
        p = tuple(pi + mi * q for pi, mi in zip(p, setup.offsets))
        return CertifyResult("certified", p, q)
    return CertifyResult("inconclusive")


def rank_probe(
    trace: Trace,
    threshold: Fraction = Fraction(1, 10 ** 6),
    relation: Optional[Sequence[int]] = None,
) -> RankProbeReport:
    """Per-index form values Q_t(P e_i) along the trace.

    Indices whose value dips below the threshold are candidates for a
    rational dependence among (1, alpha).  When the coefficient vector l
    of an exact relation is supplied, 1/|l|^2 is reported: no index
    beyond the dependence rank can ever fall below it.
    """
    if len(trace.events) < 2:
        raise InsufficientTrace("need at least two events to probe")
    setup = trace.config.setup
    rows = []
    for event in trace.events:
        matrix = transformed_matrix(setup, event.P_after, event.t)
        rows.append((event.k, event.t, tuple(matrix[i][i] for i in range(setup.n))))
    closing_t = None
    if trace.termination == "exact" and setup.mode == PRIMARY:
        closing_t = Fraction(0)
    elif trace.termination == "t_min" and trace.config.t_limit is not None:
        closing_t = Fraction(trace.config.t_limit)
    if closing_t is not None:
        matrix = transformed_matrix(setup, trace.events[-1].P_after, closing_t)
        rows.append((None, closing_t, tuple(matrix[i][i] for i in range(setup.n))))
    threshold = Fraction(threshold)
    flagged = tuple(
        i + 1
        for i in range(setup.n)
        if any(row[2][i] < threshold for row in rows)
    )
    floor = None
    if relation is not None:
        norm2 = sum(x * x for x in relation)
        if norm2 <= 0:
            raise ConfigInvalid("relation vector must be nonzero")
        floor = Fraction(1, norm2)
    return RankProbeReport(tuple(rows), threshold, flagged, floor)


def verify_trace(trace: Trace) -> list:
    """Replay the trace and check its invariants; returns human-readable
    problem strings (empty list means the trace verifies)."""
    problems = []
    setup = trace.config.setup
    primary = setup.mode == PRIMARY

    replayed = run(trace.config)
    for idx in range(max(len(replayed.events), len(trace.events))):
        if idx >= len(replayed.events):
            problems.append(f"event {trace.events[idx].k}: not reproduced by replay")
            break
        if idx >= len(trace.events):
            problems.append(f"event {replayed.events[idx].k}: missing from trace")
            break
        a, b = trace.events[idx], replayed.events[idx]
        if (a.k, a.t, a.ops, a.P_after) != (b.k, b.t, b.ops, b.P_after):
            problems.append(f"event {a.k}: differs from replay")
            break
    if not problems and trace.convergents != replayed.convergents:
        problems.append("convergents differ from replay")
    if not problems and trace.termination != replayed.termination:
        problems.append(
            f"termination {trace.termination!r} != replayed {replayed.termination!r}"
        )

    previous = None
    for event in trace.events:
        if previous is not None:
            ordered = event.t < previous if primary else event.t > previous
            if not ordered:
                problems.append(f"event {event.k}: time {event.t} is not monotone")
        previous = event.t
        if abs(int_det(event.P_after)) != 1:
            problems.append(f"event {event.k}: transform is not unimodular")

    for conv in trace.convergents:
        if primary:
            if conv.q <= 0:
                problems.append(f"convergent {conv.p}/{conv.q}: q is not positive")
            if vec_gcd(conv.p + (conv.q,)) != 1:
                problems.append(f"convergent {conv.p}/{conv.q}: not primitive")
            if not dirichlet_bound_holds(conv, setup.d):
                problems.append(f"convergent {conv.p}/{conv.q}: quality bound fails")

    partial = trace.config.variant == PARTIAL
    for idx, event in enumerate(trace.events):
        nxt = trace.events[idx + 1].t if idx + 1 < len(trace.events) else None
        if nxt is None:
            continue
        mid = (event.t + nxt) / 2
        form = form_from_matrix(transformed_matrix(setup, event.P_after, mid))
        ok, violation = is_lll_reduced(form, trace.config.omega, partial)
        if not ok:
            problems.append(f"event {event.k}: condition {violation} fails inside window")

    if trace.snapshots is not None:
        one = AffineInT(Fraction(0), Fraction(1))
        for event, snap in zip(trace.events, trace.snapshots):
            B, C = snap
            if B.get((0, 0)) != one:
                problems.append(f"event {event.k}: stored state lost the (0,0) anchor")
                continue
            for i in range(1, setup.n):
                lhs = C[i].times(B[(i, i)])
                rhs = B[(i + 1, i + 1)].times(B[(i - 1, i - 1)])
                rhs = rhs + B[(i, i + 1)].times(B[(i, i + 1)])
                if lhs != rhs:
                    problems.append(
                        f"event {event.k}: stored state violates the minor identity"
                    )
                    break

    return problems
