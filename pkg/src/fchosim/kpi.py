"""Mobility KPIs: fast handovers, outage, signaling and resource reservation time."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .events import Event

SIGNALING_RELEASE_EXCLUDED = ("ho-into", "replace")


@dataclass
class HoRecord:
    t_ms: int
    from_cell: int
    to_cell: int


def classify_fast_handovers(records, t_fh_ms: int = 1000) -> tuple[int, int]:
    """Count (ping-pongs, short-stays) in one UE's chronological handover list.

    A pair of consecutive handovers A->B, B->X no more than ``t_fh_ms`` apart is
    a ping-pong when X == A and a short-stay otherwise. Matching is earliest
    first and a handover joins at most one pair.
    """
    pp = ss = 0
    i = 0
    n = len(records)
    while i + 1 < n:
        a, b = records[i], records[i + 1]
        if b.from_cell == a.to_cell and b.t_ms - a.t_ms <= t_fh_ms:
            if b.to_cell == a.from_cell:
                pp += 1
            else:
                ss += 1
            i += 2
        else:
            i += 1
    return pp, ss


def merge_intervals(intervals):
    """Union of half-open [start, end) intervals, sorted."""
    out = []
    for s, e in sorted((s, e) for s, e in intervals if e > s):
        if out and s <= out[-1][1]:
            if e > out[-1][1]:
                out[-1][1] = e
        else:
            out.append([s, e])
    return [(s, e) for s, e in out]


def outage_duration_ms(intervals, t_sim_ms: int) -> int:
    clipped = [(max(0, s), min(e, t_sim_ms)) for s, e in intervals]
    return sum(e - s for s, e in merge_intervals(clipped))


def outage_percent(outages_by_ue, n_ue: int, t_sim_ms: int) -> float:
    """100 * total merged outage / (N_UE * t_sim)."""
    if n_ue <= 0 or t_sim_ms <= 0:
        return 0.0
    total = sum(outage_duration_ms([(s, e) for s, e, *_ in ivs], t_sim_ms)
                for ivs in outages_by_ue.values())
    return 100.0 * total / (n_ue * t_sim_ms)


def reservation_time(intervals, cell: int, ue: int, t_sim_ms: int | None = None) -> float:
    """Seconds that ``cell`` held resources for ``ue``; open intervals end at t_sim."""
    total = 0
    for c, u, start, end in intervals:
        if c == cell and u == ue:
            if end is None:
                end = t_sim_ms
            total += end - start
    return total / 1000.0


def normalized_reservation_time(intervals, n_cells: int, n_ue: int, t_sim_ms: int) -> float:
    """Sum of all reservation time over (N_cells * N_UE * t_sim), in seconds."""
    if n_cells <= 0 or n_ue <= 0 or t_sim_ms <= 0:
        return 0.0
    total_ms = sum((t_sim_ms if e is None else e) - s for _, _, s, e in intervals)
    return (total_ms / 1000.0) / (n_cells * n_ue * t_sim_ms / 1000.0)


def normalize_per_ue_per_min(count, n_ue: int, t_sim_s: float) -> float:
    if n_ue <= 0 or t_sim_s <= 0:
        return 0.0
    return count * 60.0 / (n_ue * t_sim_s)


def empirical_cdf(values):
    """Sorted values and right-continuous CDF levels."""
    x = np.sort(np.asarray(values, dtype=float))
    return x, np.arange(1, len(x) + 1) / max(len(x), 1)


@dataclass
class KpiLedger:
    """Event counters and interval bookkeeping, fed in event order."""

    n_cells: int
    n_ue: int
    t_sim_ms: int
    ho_interruption_ms: int = 55
    reestablish_ms: int = 180
    replace_counts_once: bool = True
    counts: dict = field(default_factory=lambda: defaultdict(int))
    release_causes: dict = field(default_factory=lambda: defaultdict(int))
    ho_history: dict = field(default_factory=lambda: defaultdict(list))
    outages: dict = field(default_factory=lambda: defaultdict(list))
    intervals: list = field(default_factory=list)  # (cell, ue, start, end)
    failure_matrix: np.ndarray = None
    _open: dict = field(default_factory=dict)
    _exec_start: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def __post_init__(self):
        if self.failure_matrix is None:
            self.failure_matrix = np.zeros((self.n_cells, self.n_cells), dtype=np.int64)

    def add_outage(self, ue: int, start: int, end: int, cause: str) -> None:
        if end <= start:
            self.violations.append(f"non-positive outage {start}..{end} for UE {ue}")
            return
        self.outages[ue].append((start, end, cause))

    def add_low_sinr(self, ue: int, t_ms: int, dt_ms: int) -> None:
        """Book one step [t, t + dt) of serving SINR below the outage threshold."""
        ivs = self.outages[ue]
        if ivs and ivs[-1][2] == "sinr" and ivs[-1][1] == t_ms:
            ivs[-1] = (ivs[-1][0], t_ms + dt_ms, "sinr")
        else:
            ivs.append((t_ms, t_ms + dt_ms, "sinr"))

    def apply(self, ev: Event) -> None:
        k = ev.kind
        self.counts[k] += 1
        if k == "prep_ready":
            key = (ev.to_cell, ev.ue)
            if key in self._open:
                self.violations.append(f"double open {key} at {ev.t_ms}")
            self._open[key] = ev.t_ms
        elif k == "rel":
            self.release_causes[ev.cause] += 1
            start = self._open.pop((ev.to_cell, ev.ue), None)
            if start is not None:
                self.intervals.append((ev.to_cell, ev.ue, start, ev.t_ms))
        elif k == "exec_start":
            self._exec_start[ev.ue] = ev.t_ms
        elif k == "ho_success":
            t0 = self._exec_start.pop(ev.ue, ev.t_ms)
            self.add_outage(ev.ue, t0, ev.t_ms + self.ho_interruption_ms, "ho")
            self.ho_history[ev.ue].append(HoRecord(ev.t_ms, ev.from_cell, ev.to_cell))
        elif k == "hof":
            t0 = self._exec_start.pop(ev.ue, ev.t_ms)
            if ev.t_ms > t0:
                self.add_outage(ev.ue, t0, ev.t_ms, "hof")
        elif k == "reestablish":
            self.add_outage(ev.ue, ev.t_ms, ev.t_ms + self.reestablish_ms, "reestablish")
            self.failure_matrix[ev.from_cell, ev.to_cell] += 1

    def close(self) -> None:
        """End of run: truncate still-open reservations at t_sim."""
        for (cell, ue), start in sorted(self._open.items()):
            self.intervals.append((cell, ue, start, self.t_sim_ms))
        self._open.clear()

    # -- derived ------------------------------------------------------------
    @property
    def mobility_failures(self) -> int:
        return self.counts["hof"] + self.counts["rlf"]

    @property
    def successful_handovers(self) -> int:
        return self.counts["ho_success"]

    def fast_handovers(self, t_fh_ms: int = 1000) -> tuple[int, int]:
        pp = ss = 0
        for recs in self.ho_history.values():
            a, b = classify_fast_handovers(recs, t_fh_ms)
            pp += a
            ss += b
        return pp, ss

    def signaling(self) -> dict:
        rel = sum(n for cause, n in self.release_causes.items()
                  if cause not in SIGNALING_RELEASE_EXCLUDED)
        rep = self.counts["rep"] * (1 if self.replace_counts_once else 2)
        prep = self.counts["prep"]
        return {"prep": prep, "rel": rel, "rep": rep, "total": prep + rel + rep}

    def reservation_durations_s(self) -> np.ndarray:
        return np.array([(e - s) / 1000.0 for _, _, s, e in self.intervals])

    def summary(self, t_fh_ms: int = 1000) -> dict:
        t_s = self.t_sim_ms / 1000.0
        per_min = lambda x: normalize_per_ue_per_min(x, self.n_ue, t_s)  # noqa: E731
        pp, ss = self.fast_handovers(t_fh_ms)
        sig = self.signaling()
        dur = self.reservation_durations_s()
        return {
            "successful_ho": per_min(self.successful_handovers),
            "ping_pong": per_min(pp),
            "short_stay": per_min(ss),
            "fast_ho": per_min(pp + ss),
            "hof": per_min(self.counts["hof"]),
            "rlf": per_min(self.counts["rlf"]),
            "mobility_failures": per_min(self.mobility_failures),
            "outage_pct": outage_percent(self.outages, self.n_ue, self.t_sim_ms),
            "sig_prep": per_min(sig["prep"]),
            "sig_rel": per_min(sig["rel"]),
            "sig_rep": per_min(sig["rep"]),
            "sig_total": per_min(sig["total"]),
            "res_median_s": float(np.median(dur)) if len(dur) else 0.0,
            "res_p95_s": float(np.percentile(dur, 95)) if len(dur) else 0.0,
            "res_norm": normalized_reservation_time(self.intervals, self.n_cells, self.n_ue,
                                                    self.t_sim_ms),
            "n_ho": self.successful_handovers,
            "n_failures": self.mobility_failures,
            "n_sig": sig["total"],
            "n_preparations": len(dur),
        }


# -- CSV outputs ------------------------------------------------------------------

SUMMARY_COLUMNS = ("scenario", "mode", "case", "speed_kmh", "policy", "n_max", "seed",
                   "n_ue", "t_sim_s", "successful_ho", "ping_pong", "short_stay", "fast_ho",
                   "hof", "rlf", "mobility_failures", "outage_pct", "sig_prep", "sig_rel",
                   "sig_rep", "sig_total", "res_median_s", "res_p95_s", "res_norm")


def write_rows(path, rows, columns) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def reservation_cdf_rows(durations_s, percentiles=range(0, 101, 5)):
    d = np.asarray(durations_s, dtype=float)
    if d.size == 0:
        return [{"percentile": p, "reservation_s": 0.0} for p in percentiles]
    return [{"percentile": p, "reservation_s": float(np.percentile(d, p))} for p in percentiles]


def write_border_matrix(path, matrix) -> None:
    n = matrix.shape[0]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["from\\to"] + list(range(n)))
        for i in range(n):
            w.writerow([i] + [int(x) for x in matrix[i]])
