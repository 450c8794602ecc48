"""Oracle self-checks and production-vs-oracle equivalence on random inputs."""

import numpy as np
import pytest

from fchosim.cho import CONDITION_KINDS, evaluate_condition
from fchosim.events import Event
from fchosim.kpi import (HoRecord, KpiLedger, classify_fast_handovers,
                         normalized_reservation_time, outage_percent, reservation_time)

from oracles import (oracle_condition, oracle_condition_batch, oracle_fast_handovers,
                     oracle_fire_times, oracle_normalized_reservation, oracle_outage_percent,
                     oracle_reservation, random_event_list, random_ho_chain, random_traces)


def test_constant_satisfied_trace_fires_first_at_T():
    ref = np.full(12, -80.0)
    assert oracle_fire_times(ref, ref, "prep", 10.0, 80)[0] == 80
    assert oracle_fire_times(ref, ref, "prep", 10.0, 160)[0] == 160


def test_never_satisfied_trace_has_no_fires():
    ref = np.full(12, -80.0)
    assert oracle_fire_times(ref, ref, "exec", 3.0, 80) == []


def test_single_interval_reservation():
    evs = [("prep_ready", 2, 0, 1000), ("rel", 2, 0, 1500)]
    assert oracle_reservation(evs, 10, 30_000) == {(2, 0): 0.5}


def test_open_interval_truncated_at_t_sim():
    evs = [("prep_ready", 2, 0, 29_500)]
    assert oracle_reservation(evs, 10, 30_000) == {(2, 0): 0.5}
    led = KpiLedger(3, 1, 30_000)
    led.apply(Event(29_500, 0, "prep_ready", 0, 2, "prep"))
    led.close()
    assert reservation_time(led.intervals, 2, 0) == 0.5


@pytest.mark.parametrize("kind", CONDITION_KINDS)
def test_condition_equivalence_random(kind):
    rng = np.random.default_rng(11)
    ref, cand = random_traces(rng, 300, 25)
    offset = {"prep": 10.0, "rel": 13.0, "rep": 3.0, "exec": 3.0}[kind]
    got = evaluate_condition(kind, ref, cand, offset, 80)
    for i in range(len(ref)):
        assert np.array_equal(got[i], oracle_condition(ref[i], cand[i], kind, offset, 80))
    assert np.array_equal(got, oracle_condition_batch(ref, cand, kind, offset, 80))


def test_kpi_equivalence_random_event_lists():
    rng = np.random.default_rng(5)
    n_cells, n_ue, t_sim, dt = 5, 3, 3000, 10
    for _ in range(100):
        events = random_event_list(rng, n_cells, n_ue, t_sim, dt)
        led = KpiLedger(n_cells, n_ue, t_sim)
        for ev in events:
            led.apply(ev)
        led.close()
        raw = [(e.kind, e.to_cell, e.ue, e.t_ms) for e in events]
        want = oracle_reservation(raw, dt, t_sim)
        for (c, u), sec in want.items():
            assert reservation_time(led.intervals, c, u, t_sim) == sec
        assert normalized_reservation_time(led.intervals, n_cells, n_ue, t_sim) == \
            oracle_normalized_reservation(raw, n_cells, n_ue, dt, t_sim)
        assert outage_percent(led.outages, n_ue, t_sim) == \
            oracle_outage_percent(led.outages, n_ue, t_sim)
        for u in range(n_ue):
            hos = [(e.t_ms, e.from_cell, e.to_cell) for e in events
                   if e.kind == "ho_success" and e.ue == u]
            assert classify_fast_handovers([HoRecord(*h) for h in hos], 1000) == \
                oracle_fast_handovers(hos, 1000)


def test_fast_handover_equivalence_random_chains():
    rng = np.random.default_rng(8)
    seen = [0, 0]
    for _ in range(300):
        hos = random_ho_chain(rng, int(rng.integers(0, 12)))
        got = classify_fast_handovers([HoRecord(*h) for h in hos], 1000)
        assert got == oracle_fast_handovers(hos, 1000)
        seen[0] += got[0]
        seen[1] += got[1]
    assert seen[0] > 0 and seen[1] > 0
