import random
from fractions import Fraction as F

import pytest

from geocf.errors import ConfigInvalid, InsufficientTrace, NonPositiveEpsilon, NonPositiveT
from geocf.geodesic import (
    RunConfig,
    certify_excellent,
    convergents,
    dirichlet_bound_holds,
    rank_probe,
    run,
    step,
    verify_trace,
)
from geocf.oracle import best_approximations, classical_cf, successive_minima
from geocf.qform import evaluate, form_from_matrix, is_lll_reduced
from geocf.tform import conditions, eval_at, init_state, make_setup, recompute_state

from conftest import trunc_sqrt

OMEGA = F(3, 4)


def d1_trace(alpha=F(2, 5), **kw):
    return run(RunConfig(make_setup([alpha]), **kw))


class TestHandComputedSweep:
    """The 2/5 sweep, fully worked by hand from the update rules."""

    def test_event_times(self):
        tr = d1_trace()
        assert [e.t for e in tr.events] == [
            F(59, 100), F(8, 75), F(8, 325), F(3, 200), F(1, 400), F(3, 2200),
        ]

    def test_first_event_is_swap_then_shift(self):
        tr = d1_trace()
        assert tr.events[0].ops == (("swap", 1), ("shift", 1, 2, 1))
        assert tr.events[0].P_after == ((0, 1), (1, 1))

    def test_convergent_ladder(self):
        tr = d1_trace()
        assert [(c.p, c.q, c.err2) for c in tr.convergents] == [
            ((0,), 1, F(4, 25)),
            ((1,), 2, F(1, 25)),
            ((2,), 5, F(0)),
        ]

    def test_exact_termination(self):
        tr = d1_trace()
        assert tr.termination == "exact"
        assert tr.convergents[-1].t_lo == 0

    def test_windows_chain(self):
        tr = d1_trace()
        cs = tr.convergents
        assert cs[0].t_hi == F(59, 100)
        for left, right in zip(cs, cs[1:]):
            assert left.t_lo == right.t_hi


class TestStep:
    def test_single_step_matches_run(self):
        config = RunConfig(make_setup([F(2, 5)]))
        state = init_state(config.setup, 1)
        state, event = step(state, config, F(1), k=1)
        assert event.t == F(59, 100)
        assert event.ops == (("swap", 1), ("shift", 1, 2, 1))
        # reduced just below the event time
        form, _ = eval_at(state, event.t - F(1, 1000))
        assert is_lll_reduced(form, OMEGA)[0]

    def test_no_event_when_settled(self):
        config = RunConfig(make_setup([F(0)]))
        state = init_state(config.setup, 1)
        state, event = step(state, config, F(1), k=1)
        assert event is not None  # the swap that moves the exact hit forward
        state, second = step(state, config, event.t, k=2)
        assert second is None


class TestRunTermination:
    def test_zero_targets_terminate_exactly(self):
        tr = run(RunConfig(make_setup([F(0), F(0)])))
        assert tr.termination == "exact"
        assert tr.convergents[-1].p == (0, 0)
        assert tr.convergents[-1].q == 1

    def test_rational_d2_recovers_input(self):
        tr = run(RunConfig(make_setup([F(2, 5), F(1, 3)])))
        assert tr.termination == "exact"
        final = tr.convergents[-1]
        assert final.err2 == 0
        assert [F(p, final.q) for p in final.p] == [F(2, 5), F(1, 3)]

    def test_fibonacci_ratio_emits_all_best_denominators(self):
        tr = d1_trace(F(610, 987))
        qs = {c.q for c in tr.convergents}
        assert {q for _, q in classical_cf(F(610, 987))} <= qs

    def test_every_swept_q_is_a_best_denominator(self):
        # the first column minimizes the sweep form inside its window, so
        # each emitted q strictly improves on every smaller denominator
        rng = random.Random(41)
        for omega in (F(1), F(3, 4)):
            for _ in range(12):
                alpha = F(rng.randint(-3 * 10 ** 4, 3 * 10 ** 4), rng.randint(1, 10 ** 4))
                tr = run(RunConfig(make_setup([alpha]), omega=omega))
                best_qs = {r.q for r in best_approximations([alpha], alpha.denominator)}
                assert {c.q for c in tr.convergents} <= best_qs

    def test_high_precision_input_reaches_t_min_unterminated(self):
        tr = run(RunConfig(make_setup([trunc_sqrt(2, 40)]), t_limit=F(1, 10 ** 12)))
        assert tr.termination == "t_min"
        assert all(c.err2 > 0 for c in tr.convergents)

    def test_max_events_stop(self):
        tr = d1_trace(F(610, 987), max_events=3)
        assert tr.termination == "max_events"
        assert len(tr.events) == 3

    def test_q_max_stop_emits_trigger(self):
        tr = d1_trace(F(610, 987), q_max=50)
        assert tr.termination == "q_max"
        assert tr.convergents[-1].q > 50
        assert all(c.q <= 50 for c in tr.convergents[:-1])

    def test_offsets_restored_in_output(self):
        tr = run(RunConfig(make_setup([F(7, 5)])))  # normalizes to 2/5 with offset 1
        final = tr.convergents[-1]
        assert F(final.p[0], final.q) == F(7, 5)
        assert final.err2 == 0

    def test_config_validation(self):
        with pytest.raises(ConfigInvalid):
            run(RunConfig(make_setup([F(1, 3)]), variant="fast"))


class TestConvergents:
    def test_identity_column_not_emitted(self):
        tr = d1_trace()
        assert all(c.q > 0 for c in convergents(tr))

    def test_quality_bound_exact(self):
        rng = random.Random(123)
        for _ in range(10):
            d = rng.choice([1, 2])
            alphas = [F(rng.randint(-400, 400), rng.randint(1, 300)) for _ in range(d)]
            tr = run(RunConfig(make_setup(alphas)))
            for c in tr.convergents:
                assert dirichlet_bound_holds(c, d)

    def test_dedup_unions_windows(self):
        tr = d1_trace()
        # event 2 repeats the (0, 1) column; its window must span both events
        first = tr.convergents[0]
        assert first.t_hi == tr.events[0].t
        assert first.t_lo == tr.events[2].t


class TestPartialVariant:
    def test_event_times_form_subsequence(self):
        rng = random.Random(31)
        for _ in range(8):
            d = rng.choice([1, 2])
            alphas = [F(rng.randint(-60, 60), rng.randint(1, 50)) for _ in range(d)]
            full = run(RunConfig(make_setup(alphas), variant="full", max_events=50))
            part = run(RunConfig(make_setup(alphas), variant="partial", max_events=50))
            full_times = {e.t for e in full.events}
            part_times = [e.t for e in part.events]
            horizon = min(e.t for e in full.events) if full.events else 0
            assert all(t in full_times for t in part_times if t >= horizon)

    def test_partial_reaches_same_exact_answer(self):
        tr = run(RunConfig(make_setup([F(2, 5), F(1, 3)]), variant="partial"))
        assert tr.termination == "exact"
        final = tr.convergents[-1]
        assert [F(p, final.q) for p in final.p] == [F(2, 5), F(1, 3)]


class TestDualMode:
    def test_rational_relation_found(self):
        tr = run(RunConfig(make_setup([F(2, 5)], mode="dual")))
        assert tr.termination == "exact"
        final = tr.convergents[-1]
        assert final.err2 == 0
        assert final.q + final.p[0] * F(2, 5) == 0

    def test_event_times_increase(self):
        tr = run(RunConfig(make_setup([F(2, 5), F(1, 3)], mode="dual"), max_events=30))
        times = [e.t for e in tr.events]
        assert all(a < b for a, b in zip(times, times[1:]))

    def test_planted_relation_recovered(self):
        a1 = trunc_sqrt(2, 30)
        a2 = (1 + a1) / 2
        tr = run(RunConfig(make_setup([a1, a2], mode="dual"), t_limit=F(10 ** 6)))
        exact = [c for c in tr.convergents if c.err2 == 0]
        assert ((1, -2), 1) in {(c.p, c.q) for c in exact}


class TestCertify:
    def _terminal_state(self, alpha=F(2, 5)):
        setup = make_setup([alpha])
        tr = run(RunConfig(setup))
        return setup, recompute_state(setup, tr.events[-1].P_after)

    def test_exact_convergent_certified(self):
        setup, state = self._terminal_state()
        # the scale associated with epsilon = 10^-3 at q = 5
        result = certify_excellent(state, F(1, 625 * 10 ** 6), F(1, 1000))
        assert result.verdict == "certified"
        assert (result.p, result.q) == ((2,), 5)

    def test_refuted_when_column_is_too_long(self):
        setup = make_setup([F(355, 113)])
        tr = run(RunConfig(setup, t_limit=F(1, 10 ** 4)))
        state = recompute_state(setup, tr.events[-1].P_after)
        result = certify_excellent(state, F(1, 10 ** 4), F(1, 10 ** 12))
        assert result.verdict == "refuted"

    def test_inconclusive_with_generous_epsilon(self):
        # epsilon so large that the scale threshold swamps the second column:
        # the excellence claim is trivially satisfiable but nothing is pinned
        setup, state = self._terminal_state()
        result = certify_excellent(state, F(1, 625 * 10 ** 6), F(1000))
        assert result.verdict == "inconclusive"

    def test_argument_guards(self):
        setup, state = self._terminal_state()
        with pytest.raises(NonPositiveT):
            certify_excellent(state, F(0), F(1, 10))
        with pytest.raises(NonPositiveEpsilon):
            certify_excellent(state, F(1, 10), F(0))


class TestRankProbe:
    def test_exact_run_hits_zero_at_the_boundary(self):
        report = rank_probe(d1_trace())
        final = report.rows[-1]
        assert final[0] is None and final[1] == 0
        assert final[2][0] == 0  # squared error of the exact convergent
        assert 1 in report.flagged

    def test_relation_floor(self):
        report = rank_probe(d1_trace(), relation=(1, 1, 2))
        assert report.relation_floor == F(1, 6)

    def test_insufficient_trace(self):
        tr = d1_trace(max_events=1)
        with pytest.raises(InsufficientTrace):
            rank_probe(tr)

    def test_probe_values_bracket_oracle_minima(self):
        # at each window the first two columns sandwich the true minima
        a1 = trunc_sqrt(2, 24)
        a2 = (1 + a1) / 2
        setup = make_setup([a1, a2])
        tr = run(RunConfig(setup, t_limit=F(1, 10 ** 8)))
        event = tr.events[-1]
        form, _ = eval_at(recompute_state(setup, event.P_after), event.t)
        q1, q2 = form.entries[0][0], form.entries[1][1]
        report = successive_minima(form, 2, max(q1, q2))
        mu1, mu2 = report.values
        n = setup.n
        assert mu1 <= q1 <= 2 ** (n - 1) * mu1
        assert mu2 <= max(q1, q2)
        assert q2 <= 2 ** (n - 1) * mu2


class TestInvariantsAndReplay:
    def test_replay_is_bit_identical(self):
        cfg = RunConfig(make_setup([F(355, 113), F(-2, 7)]))
        assert run(cfg) == run(cfg)

    def test_event_times_strictly_decrease(self):
        tr = run(RunConfig(make_setup([F(355, 113), F(-2, 7)])))
        times = [e.t for e in tr.events]
        assert all(a > b for a, b in zip(times, times[1:]))

    def test_window_midpoints_stay_reduced(self):
        tr = d1_trace(F(233, 377))
        for left, right in zip(tr.events, tr.events[1:]):
            state = recompute_state(tr.config.setup, left.P_after)
            mid = (left.t + right.t) / 2
            for _, g in conditions(state, OMEGA):
                assert g.at(mid) >= 0

    def test_verify_trace_clean(self):
        for alphas, mode in (
            ([F(2, 5)], "primary"),
            ([F(9, 11), F(-4, 7)], "primary"),
            ([F(2, 5)], "dual"),
        ):
            tr = run(RunConfig(make_setup(alphas, mode=mode), max_events=40))
            assert verify_trace(tr) == []

    def test_verify_catches_tampering(self):
        tr = d1_trace()
        bad_events = list(tr.events)
        e = bad_events[2]
        bad_events[2] = type(e)(e.k, e.t + F(1, 1000), e.ops, e.P_after)
        tampered = type(tr)(tr.config, tuple(bad_events), tr.convergents, tr.termination)
        problems = verify_trace(tampered)
        assert any("event 3" in p for p in problems)

    def test_minimizer_quality_at_event_times(self):
        # oracle minimizer of the numeric form at each event satisfies the
        # squared approximation inequality (err2^d) q^2 < (d+1)^d
        tr = d1_trace(F(17, 43))
        setup = tr.config.setup
        for event in tr.events[:4]:
            form, _ = eval_at(recompute_state(setup, event.P_after), event.t)
            bound = min(form.entries[i][i] for i in range(setup.n))
            witness = successive_minima(form, 1, bound).witnesses[0]
            # map the witness back to original coordinates
            P = event.P_after
            vec = tuple(sum(P[i][j] * witness[j] for j in range(setup.n)) for i in range(setup.n))
            q = abs(vec[-1])
            err2 = sum((vec[i] - vec[-1] * a) ** 2 for i, a in enumerate(setup.alpha))
            assert (err2 ** setup.d) * q * q < (setup.d + 1) ** setup.d
