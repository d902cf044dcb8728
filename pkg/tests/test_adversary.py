"""Adversarial release stream, interactive game, and counting analysis."""
import math

import pytest

from schedlab.adversary import (
    AdversaryState,
    actual_released,
    adversary_step,
    aggregate_game,
    alpha_edf_player,
    counting_bounds,
    crossover_n,
    offline_witness,
    play_game,
    resolve_rho,
    scaling_bound_report,
)
from schedlab.core import ContractViolation, Job
from schedlab.generators import adversary_instance
from schedlab.online_min import EULER
from schedlab.oracle import off_prefix_series


class TestAdversaryState:
    def test_release_counts(self):
        state = AdversaryState(n=4, N=16, rho=EULER)
        assert [len(state.release(t)) for t in range(4)] == [4, 5, 8, 16]

    def test_stop_rule_fires_on_scaled_count(self):
        state = AdversaryState(n=4, N=16, rho=EULER)
        state.release(0)
        state.observe(0, 3, 1)
        assert state.stopped_at == 0
        assert state.release(1) == []

    def test_below_threshold_keeps_releasing(self):
        state = AdversaryState(n=4, N=16, rho=EULER)
        state.release(0)
        state.observe(0, 2, 1)
        assert state.stopped_at is None
        assert len(state.release(1)) == 5

    def test_zero_off_never_stops(self):
        state = AdversaryState(n=4, N=16, rho=EULER)
        state.observe(0, 5, 0)
        assert state.stopped_at is None

    def test_step_past_horizon_rejected(self):
        state = AdversaryState(n=4, N=16, rho=EULER)
        with pytest.raises(ContractViolation):
            adversary_step(state, 4, 1, 1)

    def test_adversary_step_wrapper(self):
        state = AdversaryState(n=4, N=16, rho=None)
        jobs = adversary_step(state, 0, None, None)
        assert len(jobs) == 4
        assert all(j.d == 4 and j.p == 1 for j in jobs)
        assert len(adversary_step(state, 1, 1, 1)) == 5

    def test_resolve_rho_forms(self):
        assert resolve_rho(None) is None
        assert resolve_rho("none") is None
        assert resolve_rho("off") is None
        assert resolve_rho("e") == EULER
        assert resolve_rho(3) == 3


class TestPlayGame:
    def test_e_player_stopped_immediately(self):
        tr = play_game(alpha_edf_player("e", 4), 4, 16)
        assert tr.stopped_at == 0
        assert tr.cost == 3
        assert tr.off_final == 1
        assert tr.ratio == 3.0
        assert not tr.missed

    def test_alpha_one_runs_to_end_and_misses(self):
        tr = play_game(alpha_edf_player(1, 4), 4, 16)
        assert tr.stopped_at is None
        assert tr.released_total == 33
        assert tr.scheduled_total == 25
        assert tr.missed

    def test_stop_fires_at_zero_for_every_n(self):
        for n in (2, 5, 17, 40):
            tr = play_game(alpha_edf_player("e", n), n)
            assert tr.stopped_at == 0

    def test_full_stream_off_series_matches_oracle(self):
        tr = play_game(alpha_edf_player("e", 4), 4, 16, rho=None)
        inst = adversary_instance(4, 16)
        series = off_prefix_series(inst.jobs)
        assert [s["off"] for s in tr.steps] == [series[t] for t in range(4)]
        assert [s["off"] for s in tr.steps] == [1, 3, 5, 16]

    def test_e_player_never_misses_full_stream(self):
        for n in (3, 10, 37):
            tr = play_game(alpha_edf_player("e", n), n, rho=None)
            assert not tr.missed
            assert tr.ratio <= math.e + 1 / tr.off_final + 1e-12

    def test_overbooking_player_audited(self):
        class Cheat:
            def step(self, t, released):
                return 1, [j.id for j in released]

        with pytest.raises(ContractViolation):
            play_game(Cheat(), 4, 16)

    def test_unknown_job_audited(self):
        class Cheat:
            def step(self, t, released):
                return 5, [999]

        with pytest.raises(ContractViolation):
            play_game(Cheat(), 4, 16)

    def test_repeated_job_audited(self):
        class Cheat:
            def step(self, t, released):
                return 5, [0, 0]

        with pytest.raises(ContractViolation):
            play_game(Cheat(), 4, 16)

    def test_transcript_json(self):
        tr = play_game(alpha_edf_player("e", 4), 4, 16)
        doc = tr.to_jsonable()
        assert doc["rho"] == "e"
        assert doc["outcome"] == "stopped"
        assert doc["stopped_at"] == 0


class TestAggregateGame:
    def test_off_series_small(self):
        g = aggregate_game("e", 4, 16)
        assert list(g.off) == [1, 3, 5, 16]

    def test_agrees_with_interactive_game(self):
        for n in (4, 31, 100, 200):
            for alpha in (1, 2, "e"):
                agg = aggregate_game(alpha, n)
                tr = play_game(alpha_edf_player(alpha, n), n, rho=None)
                assert [s["online"] for s in tr.steps] == list(agg.online)
                assert [s["off"] for s in tr.steps] == list(agg.off)
                assert tr.released_total == agg.released_total
                assert tr.scheduled_total == agg.processed_total
                assert tr.missed == agg.missed
                assert tr.cost == agg.cost

    def test_agrees_with_stop_rule(self):
        for alpha in (1, 2, "e"):
            agg = aggregate_game(alpha, 50, rho="e")
            tr = play_game(alpha_edf_player(alpha, 50), 50, rho="e")
            assert tr.stopped_at == agg.stopped_at
            assert tr.released_total == agg.released_total

    def test_e_scale_thousand_no_miss(self):
        g = aggregate_game("e", 1000)
        assert not g.missed
        assert g.cost == 2718282
        assert g.released_total == g.processed_total == 7485017

    def test_alpha_one_hundred_misses(self):
        g = aggregate_game(1, 100)
        assert g.missed
        assert g.released_total == 51834
        assert g.processed_total == 26480

    def test_alpha_two_thousand_misses(self):
        g = aggregate_game(2, 1000)
        assert g.missed
        assert g.processed_total == 6981578

    def test_summary_fields(self):
        s = aggregate_game(2, 100).summary()
        for key in ("alpha", "n", "N", "missed", "cost", "off_final", "ratio"):
            assert key in s


class TestCountingBounds:
    def test_released_lower_closed_form(self):
        cb = counting_bounds(4, 16)
        assert cb.released_lower == pytest.approx(16 * math.log(4) - 3,
                                                  abs=1e-9)
        assert cb.released_lower == pytest.approx(19.18070977791825, abs=1e-9)

    def test_processed_upper_frozen(self):
        cb = counting_bounds(4, 16, 2.5)
        assert cb.processed_upper == pytest.approx(45.11474544157398, abs=1e-9)

    def test_actual_release_exceeds_lower_bound(self):
        assert actual_released(4, 16) == 33
        for n in (4, 10, 100, 1000):
            assert actual_released(n) >= counting_bounds(n).released_lower

    def test_crossover_values(self):
        assert crossover_n(2.5) == 94235
        assert crossover_n(1) == 4
        assert crossover_n("e") is None

    def test_deficit_positive_past_crossover(self):
        n = crossover_n(2.5)
        assert counting_bounds(n, alpha=2.5).deficit > 0
        assert counting_bounds(n - 1, alpha=2.5).deficit <= 0


class TestOfflineWitness:
    def test_tiny_feasible(self):
        w = offline_witness(4, 16, 0)
        assert w.m == 2
        assert w.feasible
        assert w.jobs_total == 4

    def test_tiny_infeasible(self):
        w = offline_witness(4, 16, 1)
        assert w.m == 2
        assert not w.feasible
        assert w.jobs_total == 9

    def test_midrange_feasible(self):
        w = offline_witness(100, 10**4, 50)
        assert w.m == 74
        assert w.feasible
        assert w.jobs_total == 7058

    def test_schedule_respects_machine_budget(self):
        w = offline_witness(20, 400, 10)
        per_slot = {}
        for jid, machine, start in w.schedule.assignments:
            per_slot.setdefault(start, []).append(machine)
        assert all(len(ms) <= w.m for ms in per_slot.values())

    def test_bad_tstar_rejected(self):
        with pytest.raises(ContractViolation):
            offline_witness(4, 16, 4)


class TestScalingBoundReport:
    def test_frozen_window(self):
        rows = scaling_bound_report(100, 10**4, t_max=60)
        frozen = {54: (79, 80), 55: (82, 82), 56: (84, 84), 57: (86, 86),
                  58: (89, 88), 59: (91, 90), 60: (94, 92)}
        for tstar, (off, bound) in frozen.items():
            row = rows[tstar]
            assert (row.off, row.bound) == (off, bound)
            assert row.holds == (off <= bound)

    def test_clean_prefix(self):
        rows = scaling_bound_report(100, 10**4, t_max=57)
        assert all(r.holds for r in rows)

    def test_off_column_is_true_optimum(self):
        inst = adversary_instance(12)
        series = off_prefix_series(inst.jobs)
        rows = scaling_bound_report(12)
        assert [r.off for r in rows] == [series[t] for t in range(12)]
