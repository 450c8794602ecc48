"""Brute-force reference implementations, used by the tests only.

Each oracle is written the slow, literal way so it shares no code with the
package: window conditions scan every sample of every window, time integrals
sum a per-step indicator.
"""

from __future__ import annotations

import numpy as np


def _holds(kind, ref, cand, offset):
    # written in the same orientation as the handover conditions themselves
    if kind == "prep":
        return ref < cand + offset
    if kind == "rel":
        return cand + offset < ref
    if kind == "rep":
        return cand > ref + offset
    if kind == "exec":
        return ref + offset < cand
    raise ValueError(kind)


def oracle_condition(ref, cand, kind, offset, t_ms, period_ms=20):
    """Fire flag per sample: the inequality held at every sample in (t - T, t].

    Sample ``m`` is taken at time ``(m + 1) * period_ms``.
    """
    ref = list(map(float, ref))
    cand = list(map(float, cand))
    n = len(ref)
    width = t_ms // period_ms
    out = [False] * n
    for m in range(n):
        t = (m + 1) * period_ms
        # samples i with t - T < (i + 1) * period <= t
        window = range(max(0, m - width + 1), m + 1)
        if t < t_ms:
            continue
        out[m] = all(_holds(kind, ref[i], cand[i], offset) for i in window)
    return np.array(out, dtype=bool)


def oracle_condition_batch(ref, cand, kind, offset, t_ms, period_ms=20):
    """Same scan for a (traces, samples) batch: every full window must hold throughout."""
    ref = np.asarray(ref, dtype=float)
    cand = np.asarray(cand, dtype=float)
    width = t_ms // period_ms
    holds = _holds(kind, ref, cand, offset)
    out = np.zeros(holds.shape, dtype=bool)
    if holds.shape[-1] >= width:
        windows = np.lib.stride_tricks.sliding_window_view(holds, width, axis=-1)
        out[..., width - 1:] = windows.all(axis=-1)
    return out


def oracle_fire_times(ref, cand, kind, offset, t_ms, period_ms=20):
    fired = oracle_condition(ref, cand, kind, offset, t_ms, period_ms)
    return [(m + 1) * period_ms for m in range(len(fired)) if fired[m]]


def _reserved_steps(events, dt_ms, t_sim_ms):
    """Reserved step count per (cell, UE) from prep_ready/rel events.

    ``events`` are (kind, cell, ue, t_ms) tuples in time order. A reservation
    still open at t_sim counts up to t_sim.
    """
    steps = {}
    open_at = {}
    for kind, cell, ue, t in events:
        if kind == "prep_ready":
            open_at[(cell, ue)] = t
        elif kind == "rel" and (cell, ue) in open_at:
            start = open_at.pop((cell, ue))
            steps.setdefault((cell, ue), []).append((start, t))
    for key, start in open_at.items():
        steps.setdefault(key, []).append((start, t_sim_ms))
    out = {}
    for key, ivs in steps.items():
        count = 0
        for m in range(0, t_sim_ms, dt_ms):
            for s, e in ivs:
                if s <= m < e:
                    count += 1
        out[key] = count
    return out


def oracle_reservation(events, dt_ms, t_sim_ms):
    """Seconds reserved per (cell, UE) by summing a per-step indicator."""
    return {key: n * dt_ms / 1000.0
            for key, n in _reserved_steps(events, dt_ms, t_sim_ms).items()}


def oracle_normalized_reservation(events, n_cells, n_ue, dt_ms, t_sim_ms):
    if n_cells <= 0 or n_ue <= 0 or t_sim_ms <= 0:
        return 0.0
    steps = sum(_reserved_steps(events, dt_ms, t_sim_ms).values())
    return (steps * dt_ms / 1000.0) / (n_cells * n_ue * t_sim_ms / 1000.0)


def oracle_outage_percent(outages_by_ue, n_ue, t_sim_ms):
    """100 * (ms in outage, counted once per UE) / (N_UE * t_sim), by 1 ms indicator."""
    if n_ue <= 0 or t_sim_ms <= 0:
        return 0.0
    total = 0
    for ivs in outages_by_ue.values():
        hit = [False] * t_sim_ms
        for s, e, *_ in ivs:
            for ms in range(max(0, s), min(e, t_sim_ms)):
                hit[ms] = True
        total += sum(hit)
    return 100.0 * total / (n_ue * t_sim_ms)


def oracle_fast_handovers(records, t_fh_ms=1000):
    """(ping-pongs, short-stays) with each handover used in at most one pair.

    ``records`` are (t_ms, from_cell, to_cell) in time order. Pairs are matched
    earliest first.
    """
    used = set()
    pp = ss = 0
    for i in range(len(records) - 1):
        if i in used:
            continue
        t0, a, b = records[i]
        t1, b2, x = records[i + 1]
        if b2 != b or t1 - t0 > t_fh_ms:
            continue
        used.update((i, i + 1))
        if x == a:
            pp += 1
        else:
            ss += 1
    return pp, ss


# -- synthetic inputs ----------------------------------------------------------------

def random_traces(rng, n_traces, n):
    """Integer-valued L3 traces; equality boundaries are common on purpose."""
    base = rng.integers(-100, -60, size=(n_traces, 1))
    ref = base + rng.integers(-6, 7, size=(n_traces, n))
    cand = base + rng.integers(-16, 17, size=(n_traces, n))
    return ref.astype(float), cand.astype(float)


def random_event_list(rng, n_cells=5, n_ue=3, t_sim=3000, dt=10):
    """Valid prep_ready / rel sequences plus handovers and failures, in time order."""
    from fchosim.events import Event
    events = []
    t = 0
    reserved = set()
    while True:
        t += dt * int(rng.integers(1, 20))
        if t >= t_sim:
            break
        u = int(rng.integers(n_ue))
        c = int(rng.integers(n_cells))
        if (c, u) in reserved and rng.random() < 0.6:
            events.append(Event(t, u, "rel", 0, c, "release-event"))
            reserved.discard((c, u))
        elif (c, u) not in reserved:
            events.append(Event(t, u, "prep_ready", 0, c, "prep"))
            reserved.add((c, u))
        if rng.random() < 0.3:
            a, b = rng.choice(n_cells, 2, replace=False)
            events.append(Event(t, u, "exec_start", int(a), int(b)))
            events.append(Event(t, u, "ho_success", int(a), int(b)))
        if rng.random() < 0.05:
            events.append(Event(t, u, "rlf", int(c), -1))
            events.append(Event(t, u, "reestablish", int(c), int((c + 1) % n_cells)))
    return events


def random_ho_chain(rng, n_ho, n_cells=4):
    """Chronological handovers of one UE; each starts where the last one ended."""
    out = []
    t, cell = 0, 0
    for _ in range(n_ho):
        t += int(rng.choice([100, 400, 900, 1000, 1010, 1500]))
        nxt = int(rng.choice([c for c in range(n_cells) if c != cell]))
        out.append((t, cell, nxt))
        cell = nxt
    return out
