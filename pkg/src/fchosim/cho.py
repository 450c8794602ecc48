"""Conditional handover engine: preparation, release, replace, execution and failures.

All UEs are advanced together. Condition monitoring and radio-link timers are
vectorised over (UE, cell); the event handling for UEs that have something to
do in a step runs per UE (optionally on worker threads) and the results are
merged in UE-id order, so the event log does not depend on scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernels
from .blockage import select_serving_panels
from .config import ConfigError, ScenarioConfig
from .events import Event
from .measurement import L3Filter, RlmWindow, db2lin
from .mro import MroPolicy, identity_policy

CONDITION_KINDS = ("prep", "rel", "rep", "exec")

CONNECTED, RACH, REEST = 0, 1, 2
FREE, PENDING, READY = 0, 1, 2


def condition_holds(kind: str, ref, cand, offset):
    """Instantaneous inequality of one condition.

    ``ref`` is the serving cell quality (the weakest prepared cell for ``rep``)
    and ``cand`` the monitored cell. All comparisons are strict.
    """
    ref = np.asarray(ref, dtype=float)
    cand = np.asarray(cand, dtype=float)
    if kind == "prep":
        return ref < cand + offset
    if kind == "rel":
        return cand + offset < ref
    if kind == "rep":
        return cand > ref + offset
    if kind == "exec":
        return ref + offset < cand
    raise ConfigError([f"unknown condition kind {kind!r}"])


class ConditionMonitor:
    """Consecutive-sample counter per (UE, cell); fires once the inequality held for T."""

    def __init__(self, kind: str, offset_db, t_ms: int, period_ms: int, shape):
        if kind not in CONDITION_KINDS:
            raise ConfigError([f"unknown condition kind {kind!r}"])
        if t_ms <= 0 or t_ms % period_ms:
            raise ConfigError([f"{kind} time {t_ms} ms is not a multiple of {period_ms} ms"])
        self.kind = kind
        self.offset_db = offset_db
        self.required = t_ms // period_ms
        self.streak = np.zeros(shape, dtype=np.int32)

    def update(self, ref, cand, offset=None, frozen=None) -> np.ndarray:
        cond = condition_holds(self.kind, ref, cand, self.offset_db if offset is None else offset)
        cond = np.broadcast_to(cond, self.streak.shape)
        if frozen is not None and frozen.any():
            keep = self.streak[frozen].copy()
            kernels.streak_update(self.streak, cond)
            self.streak[frozen] = keep
        else:
            kernels.streak_update(self.streak, cond)
        return self.fired()

    def fired(self) -> np.ndarray:
        return self.streak >= self.required

    def reset(self, rows) -> None:
        self.streak[rows] = 0


def evaluate_condition(kind: str, ref_trace, cand_trace, offset_db: float, t_ms: int,
                       period_ms: int = 20) -> np.ndarray:
    """Fire flag at every sample of L3 traces, through the engine's monitor.

    Traces have shape (..., n) with sample ``i`` taken at ``(i + 1) * period_ms``;
    the result has the same shape.
    """
    ref = np.atleast_1d(np.asarray(ref_trace, dtype=float))
    cand = np.atleast_1d(np.asarray(cand_trace, dtype=float))
    ref, cand = np.broadcast_arrays(ref, cand)
    lead = ref.shape[:-1]
    n = ref.shape[-1]
    r2 = ref.reshape(-1, n)
    c2 = cand.reshape(-1, n)
    mon = ConditionMonitor(kind, offset_db, t_ms, period_ms, (r2.shape[0], 1))
    out = np.empty(r2.shape, dtype=bool)
    for i in range(n):
        out[:, i] = mon.update(r2[:, i:i + 1], c2[:, i:i + 1])[:, 0]
    return out.reshape(lead + (n,))


class PreparedSets:
    """Per-UE prepared/pending targets with a per-cell dual index.

    The (UE, cell) state array is authoritative; the per-cell index is rebuilt
    by :meth:`rebuild_dual` at the end of every step.
    """

    def __init__(self, n_ue: int, n_cells: int, n_max: int):
        self.n_max = n_max
        self.state = np.zeros((n_ue, n_cells), dtype=np.int8)
        self.ready_at = np.zeros((n_ue, n_cells), dtype=np.int64)
        self.since = np.zeros((n_ue, n_cells), dtype=np.int64)
        self.dual: dict[int, tuple] = {}
        self.rebuild_dual()

    def size(self, u: int) -> int:
        return int(np.count_nonzero(self.state[u]))

    def members(self, u: int) -> list[int]:
        return [int(c) for c in np.flatnonzero(self.state[u])]

    def prepared(self, u: int) -> list[tuple[int, int]]:
        """Ordered (cell, prepared-at) list of ready targets."""
        cells = np.flatnonzero(self.state[u] == READY)
        return sorted(((int(c), int(self.since[u, c])) for c in cells), key=lambda x: (x[1], x[0]))

    def rebuild_dual(self) -> None:
        ready = self.state == READY
        self.dual = {int(c): tuple(int(u) for u in np.flatnonzero(ready[:, c]))
                     for c in range(self.state.shape[1])}

    def ues_of(self, cell: int) -> tuple:
        return self.dual.get(cell, ())

    def check(self, serving: np.ndarray) -> list[str]:
        bad = []
        sizes = np.count_nonzero(self.state, axis=1)
        for u in np.flatnonzero(sizes > self.n_max):
            bad.append(f"UE {u}: {sizes[u]} prepared cells exceeds cap {self.n_max}")
        u_idx = np.arange(len(serving))
        for u in np.flatnonzero(self.state[u_idx, serving] != FREE):
            bad.append(f"UE {u}: serving cell {serving[u]} is in its prepared set")
        pairs_dual = sum(len(v) for v in self.dual.values())
        if pairs_dual != int(np.count_nonzero(self.state == READY)):
            bad.append("per-cell index out of sync with per-UE sets")
        return bad


class ChoEngine:
    """CHO / FCHO state machine for all UEs of one run."""

    def __init__(self, config: ScenarioConfig, n_ue: int, n_cells: int,
                 policy: MroPolicy | None = None):
        cfg = config
        self.cfg = cfg
        self.n_ue = n_ue
        self.n_cells = n_cells
        self.fast = cfg.mode == "FCHO"
        self.policy = policy
        base = policy if policy is not None else identity_policy(n_cells, cfg.o_prep_db)
        if base.n_cells != n_cells:
            raise ConfigError([f"policy covers {base.n_cells} cells, network has {n_cells}"])
        self.o_prep = base.o_prep_db
        self.blocked = base.blocked
        self.prune = policy is not None and policy.blocks_anything and self.fast

        shape = (n_ue, n_cells)
        w = cfg.ssb_period_ms
        self.mon = {
            "prep": ConditionMonitor("prep", cfg.o_prep_db, cfg.t_prep_ms, w, shape),
            "rel": ConditionMonitor("rel", cfg.o_rel_db, cfg.t_rel_ms, w, shape),
            "rep": ConditionMonitor("rep", cfg.o_rep_db, cfg.t_rep_ms, w, shape),
            "exec": ConditionMonitor("exec", cfg.o_exec_db, cfg.t_exec_ms, w, shape),
        }
        self.fired = {k: np.zeros(shape, dtype=bool) for k in CONDITION_KINDS}
        self.sets = PreparedSets(n_ue, n_cells, cfg.n_max)
        self.l3 = L3Filter(shape, cfg.l3_coeff)
        self.rlm = RlmWindow(n_ue, cfg.rlm_window_ms // cfg.dt_ms)

        self.serving = np.zeros(n_ue, dtype=np.int64)
        self.panel = np.full(n_ue, -1, dtype=np.int64)
        self.beam = np.zeros(n_ue, dtype=np.int64)
        self.best_panel = np.zeros(shape, dtype=np.int64)
        self.best_beam = np.zeros(shape, dtype=np.int64)
        self.state = np.zeros(n_ue, dtype=np.int8)
        self.rach_target = np.full(n_ue, -1, dtype=np.int64)
        self.rach_start = np.zeros(n_ue, dtype=np.int64)
        self.reest_end = np.zeros(n_ue, dtype=np.int64)
        self.rlf_start = np.full(n_ue, -1, dtype=np.int64)
        self.bfr_ms = np.zeros(n_ue, dtype=np.int64)
        self.started = False

        self.gamma_out_lin = float(db2lin(cfg.gamma_out_db))
        self.sinr_serving = np.zeros(n_ue)
        self.low_sinr = np.zeros(n_ue, dtype=bool)
        self._sinr = None
        self._rlf_due = np.zeros(n_ue, dtype=bool)
        self._pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
        self.violations: list[str] = []

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    # -- per-step vectorised part ---------------------------------------------
    def measure(self, t: int, l1_dbm: np.ndarray) -> list[Event]:
        """SSB instant: L3 update, panel selection and condition monitoring."""
        n_ue, n_cells = self.n_ue, self.n_cells
        u = np.arange(n_ue)
        n_p = l1_dbm.shape[3]
        flat = l1_dbm.reshape(n_ue, n_cells, -1)  # (U, C, B*P) beam-major
        best = np.argmax(flat, axis=2)
        self.best_beam = best // n_p
        self.best_panel = best % n_p
        l3 = self.l3.update(np.max(flat, axis=2))
        if not self.started:
            self.serving = np.argmax(l3, axis=1)
            self.started = True

        events = []
        panel_rsrp = l1_dbm[u, self.serving].max(axis=1)  # (U, P)
        connected = self.state == CONNECTED
        new_panel = select_serving_panels(panel_rsrp, self.panel, self.cfg.panel_hysteresis_db)
        for uu in np.flatnonzero(connected & (self.panel >= 0) & (new_panel != self.panel)):
            events.append(Event(t, int(uu), "panel_switch", int(self.panel[uu]),
                                int(new_panel[uu])))
        self.panel = np.where(connected | (self.panel < 0), new_panel, self.panel)
        self.beam = np.argmax(l1_dbm[u, self.serving, :, self.panel], axis=1)

        frozen = ~connected
        s_q = l3[u, self.serving][:, None]
        in_set = self.sets.state != FREE
        weakest = np.where(in_set, l3, np.inf).min(axis=1)[:, None]
        offs = self.o_prep[self.serving]
        self.fired["prep"] = self.mon["prep"].update(s_q, l3, offs, frozen)
        self.fired["rel"] = self.mon["rel"].update(s_q, l3, None, frozen)
        self.fired["rep"] = self.mon["rep"].update(weakest, l3, None, frozen)
        self.fired["exec"] = self.mon["exec"].update(s_q, l3, None, frozen)
        # the serving cell is never a candidate
        for k in CONDITION_KINDS:
            self.fired[k][u, self.serving] = False
        events.sort(key=lambda e: e.ue)
        return events

    def _radio_link_timers(self, t: int, sinr_lin: np.ndarray) -> None:
        cfg = self.cfg
        u = np.arange(self.n_ue)
        connected = self.state == CONNECTED
        self.sinr_serving = sinr_lin[u, self.panel, self.serving, self.beam]
        self.low_sinr = connected & (self.sinr_serving < self.gamma_out_lin)
        self.rlm.push(self.sinr_serving, connected)
        rlm_db = self.rlm.value_db()
        start = connected & (self.rlf_start < 0) & (rlm_db < cfg.gamma_out_db)
        self.rlf_start[start] = t
        cancel = connected & (self.rlf_start >= 0) & (rlm_db > cfg.gamma_in_db)
        self.rlf_start[cancel] = -1
        rlf_expired = connected & (self.rlf_start >= 0) & (t - self.rlf_start >= cfg.t_rlf_ms)
        best_serving = sinr_lin[u, :, self.serving, :].max(axis=(1, 2))
        beam_fail = connected & (best_serving < self.gamma_out_lin)
        self.bfr_ms = np.where(beam_fail, self.bfr_ms + cfg.dt_ms, 0)
        bfr_expired = connected & (self.bfr_ms >= cfg.bfr_window_ms)
        self._rlf_due = rlf_expired | bfr_expired

    def _actionable(self, t: int) -> np.ndarray:
        st = self.sets.state
        ready = st == READY
        free = st == FREE
        size = np.count_nonzero(st, axis=1)
        allowed = free & ~self.blocked[self.serving]
        act = (st == PENDING) & (self.sets.ready_at <= t)
        act = act.any(axis=1)
        connected = self.state == CONNECTED
        f = self.fired
        wants = ((f["exec"] & ready).any(axis=1) | (f["rel"] & ready).any(axis=1)
                 | ((f["prep"] & allowed).any(axis=1) & (size < self.cfg.n_max))
                 | ((f["rep"] & allowed).any(axis=1) & (size >= self.cfg.n_max)))
        return (act | ~connected | (connected & (wants | self._rlf_due)))

    def step(self, t: int, sinr_lin: np.ndarray, l1_dbm: np.ndarray | None = None) -> list[Event]:
        """Advance every UE by one step; returns the merged events of this step."""
        events = self.measure(t, l1_dbm) if l1_dbm is not None else []
        self._sinr = sinr_lin
        self._radio_link_timers(t, sinr_lin)
        todo = [int(u) for u in np.flatnonzero(self._actionable(t))]
        if self._pool is not None and len(todo) > 1:
            n = self.cfg.workers
            chunks = [todo[i::n] for i in range(n)]
            results = {}
            for part in self._pool.map(lambda ch: [(u, self._handle(u, t)) for u in ch], chunks):
                results.update(part)
            per_ue = [results[u] for u in todo]
        else:
            per_ue = [self._handle(u, t) for u in todo]
        # deterministic reduction in UE-id order
        if events:
            merged = {}
            for ev in events:
                merged.setdefault(ev.ue, []).append(ev)
            for u, evs in zip(todo, per_ue):
                merged.setdefault(u, []).extend(evs)
            events = [ev for u in sorted(merged) for ev in merged[u]]
        else:
            events = [ev for evs in per_ue for ev in evs]
        self.sets.rebuild_dual()
        bad = self.sets.check(self.serving)
        if bad:
            self.violations.extend(f"t={t}: {b}" for b in bad)
        return events

    # -- per-UE part --------------------------------------------------------------
    def _handle(self, u: int, t: int) -> list[Event]:
        ev: list[Event] = []
        self._complete_due(u, t, ev)
        st = self.state[u]
        if st == REEST:
            if t >= self.reest_end[u]:
                self.state[u] = CONNECTED
            return ev
        if st == RACH:
            elapsed = t - self.rach_start[u]
            if elapsed >= self.cfg.t_hof_ms:
                self._fail(u, t, "hof", ev)
            elif elapsed % self.cfg.rach_period_ms == 0:
                self._rach_attempt(u, t, ev)
            return ev
        if self._rlf_due[u]:
            self._fail(u, t, "rlf", ev)
            return ev
        st_row = self.sets.state[u]
        l3 = self.l3.value[u]
        exec_ok = self.fired["exec"][u] & (st_row == READY)
        if exec_ok.any():
            target = int(np.argmax(np.where(exec_ok, l3, -np.inf)))
            ev.append(Event(t, u, "exec_start", int(self.serving[u]), target))
            self.state[u] = RACH
            self.rach_target[u] = target
            self.rach_start[u] = t
            self.rlf_start[u] = -1
            self.bfr_ms[u] = 0
            self._rach_attempt(u, t, ev)
            return ev
        self._reports(u, t, ev)
        return ev

    def _complete_due(self, u: int, t: int, ev: list) -> None:
        sets = self.sets
        due = np.flatnonzero((sets.state[u] == PENDING) & (sets.ready_at[u] <= t))
        for c in due:
            sets.state[u, c] = READY
            sets.since[u, c] = t
            ev.append(Event(t, u, "prep_ready", int(self.serving[u]), int(c), "prep"))

    def _reports(self, u: int, t: int, ev: list) -> None:
        cfg = self.cfg
        sets = self.sets
        s = int(self.serving[u])
        row = sets.state[u]
        l3 = self.l3.value[u]
        allowed = (row == FREE) & ~self.blocked[s]
        rel_cells = [int(c) for c in np.flatnonzero(self.fired["rel"][u] & (row == READY))]
        size = int(np.count_nonzero(row))
        prep_mask = self.fired["prep"][u] & allowed
        rep_mask = self.fired["rep"][u] & allowed
        room_after_rel = size - len(rel_cells) < cfg.n_max
        want_prep = prep_mask.any() and room_after_rel
        want_rep = rep_mask.any() and not room_after_rel
        if not (rel_cells or want_prep or want_rep):
            return
        if self.sinr_serving[u] < self.gamma_out_lin:
            for c in rel_cells:
                ev.append(Event(t, u, "report_lost", s, c, "rel"))
            if want_prep:
                ev.append(Event(t, u, "report_lost", s, int(np.argmax(np.where(prep_mask, l3, -np.inf))), "prep"))
            if want_rep:
                ev.append(Event(t, u, "report_lost", s, int(np.argmax(np.where(rep_mask, l3, -np.inf))), "rep"))
            return
        for c in rel_cells:
            self._release(u, c, t, "release-event", ev)
        size = int(np.count_nonzero(row))
        if want_prep:
            cands = np.flatnonzero(prep_mask)
            order = cands[np.lexsort((cands, -l3[cands]))]
            for c in order[:max(cfg.n_max - size, 0)]:
                ev.append(Event(t, u, "prep", s, int(c)))
                self._start_prep(u, int(c), t)
        elif want_rep:
            members = np.flatnonzero(row != FREE)
            weak = int(members[np.argmin(l3[members])])
            strong = int(np.argmax(np.where(rep_mask, l3, -np.inf)))
            self._release(u, weak, t, "replace", ev)
            ev.append(Event(t, u, "rep", weak, strong))
            self._start_prep(u, strong, t)

    def _start_prep(self, u: int, c: int, t: int) -> None:
        if c == self.serving[u]:
            raise ConfigError([f"UE {u}: preparation towards its serving cell {c}"])
        if self.sets.state[u, c] != FREE:
            return
        self.sets.state[u, c] = PENDING
        self.sets.ready_at[u, c] = t + self.cfg.prep_latency_ms

    def _release(self, u: int, c: int, t: int, cause: str, ev: list) -> None:
        if self.sets.state[u, c] == FREE:
            self.violations.append(f"t={t}: UE {u} released non-prepared cell {c}")
            return
        self.sets.state[u, c] = FREE
        ev.append(Event(t, u, "rel", int(self.serving[u]), c, cause))

    def _rach_attempt(self, u: int, t: int, ev: list) -> None:
        tgt = int(self.rach_target[u])
        p = self.best_panel[u, tgt]
        b = self.best_beam[u, tgt]
        if self._sinr[u, p, tgt, b] >= self.gamma_out_lin:
            self._handover(u, tgt, t, ev)

    def _reset_links(self, u: int) -> None:
        for mon in self.mon.values():
            mon.reset(u)
        for k in CONDITION_KINDS:
            self.fired[k][u] = False
        self.rlm.reset(u)
        self.rlf_start[u] = -1
        self.bfr_ms[u] = 0

    def _handover(self, u: int, tgt: int, t: int, ev: list) -> None:
        sets = self.sets
        c0 = int(self.serving[u])
        ev.append(Event(t, u, "ho_success", c0, tgt))
        sets.state[u, tgt] = FREE
        ev.append(Event(t, u, "rel", c0, tgt, "ho-into"))
        self.serving[u] = tgt
        self.panel[u] = self.best_panel[u, tgt]
        self.beam[u] = self.best_beam[u, tgt]
        self.state[u] = CONNECTED
        self.rach_target[u] = -1
        if self.fast:
            sets.state[u, c0] = READY
            sets.since[u, c0] = t
            ev.append(Event(t, u, "prep_ready", tgt, c0, "retained-serving"))
            if self.prune:
                for c in self.policy.reactive_prune(sets.members(u), tgt):
                    self._release(u, c, t, "reactive-blocklist", ev)
        else:
            for c in sets.members(u):
                self._release(u, c, t, "post-ho-cho", ev)
        self._reset_links(u)

    def _fail(self, u: int, t: int, kind: str, ev: list) -> None:
        c0 = int(self.serving[u])
        ev.append(Event(t, u, kind, c0, int(self.rach_target[u]) if kind == "hof" else -1))
        new = int(np.argmax(self.l3.value[u]))
        ev.append(Event(t, u, "reestablish", c0, new))
        for c in self.sets.members(u):
            self._release(u, c, t, "reestablish", ev)
        self.serving[u] = new
        self.panel[u] = self.best_panel[u, new]
        self.beam[u] = self.best_beam[u, new]
        self.rach_target[u] = -1
        self.state[u] = REEST
        self.reest_end[u] = t + self.cfg.reestablish_ms
        self._reset_links(u)
