"""Seeded scenario runner and per-run output files."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cho import ChoEngine
from .config import ScenarioConfig
from .deployment import build_network, drop_ues, step_ue
from .events import Event, write_events
from .kpi import (SUMMARY_COLUMNS, KpiLedger, reservation_cdf_rows, write_border_matrix,
                  write_rows)
from .mro import MroPolicy
from .radio import RadioModel

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    config: ScenarioConfig
    events: list[Event]
    ledger: KpiLedger
    summary: dict
    violations: list[str] = field(default_factory=list)


def _rngs(seed: int):
    drop, shadow, fading, sampled = np.random.SeedSequence(seed).spawn(4)
    return tuple(np.random.default_rng(s) for s in (drop, shadow, fading, sampled))


def run_scenario(config: ScenarioConfig, policy: MroPolicy | None = None) -> RunResult:
    """Simulate one configuration; same config and seed give the same event log."""
    cfg = config.validate()
    if policy is None and cfg.policy_file:
        policy = MroPolicy.load(cfg.policy_file)
    rng_drop, rng_shadow, rng_fading, rng_sampled = _rngs(cfg.seed)
    layout = build_network(cfg)
    n_ue = cfg.effective_n_ue
    ue = drop_ues(n_ue, layout, cfg.speed_mps, rng_drop, cfg.ue_height_m)
    radio = RadioModel(cfg, layout, n_ue, rng_shadow, rng_fading, rng_sampled)
    engine = ChoEngine(cfg, n_ue, layout.n_cells, policy)
    ledger = KpiLedger(layout.n_cells, n_ue, cfg.t_sim_ms, cfg.ho_interruption_ms,
                       cfg.reestablish_ms, cfg.replace_counts_once)
    events: list[Event] = []
    dt = cfg.dt_ms
    try:
        for k in range(cfg.n_steps):
            t = k * dt
            p = radio.link_budget(ue)
            sinr = radio.sinr_lin(p)
            step_events = engine.step(t, sinr, p if t % cfg.ssb_period_ms == 0 else None)
            for ev in step_events:
                ledger.apply(ev)
            for u in np.flatnonzero(engine.low_sinr):
                ledger.add_low_sinr(int(u), t, dt)
            events.extend(step_events)
            radio.advance()
            ue = step_ue(ue, dt / 1000.0, layout)
    finally:
        engine.close()
    ledger.close()
    violations = engine.violations + ledger.violations + check_ledger(ledger)
    if violations:
        log.warning("%d invariant violations, first: %s", len(violations), violations[0])
    return RunResult(cfg, events, ledger, ledger.summary(cfg.t_fh_ms), violations)


def check_ledger(ledger: KpiLedger) -> list[str]:
    """Structural checks on a closed ledger."""
    bad = []
    if int(ledger.failure_matrix.sum()) != ledger.mobility_failures:
        bad.append(f"border matrix sums to {int(ledger.failure_matrix.sum())}, "
                   f"failures are {ledger.mobility_failures}")
    by_pair: dict = {}
    for c, u, s, e in ledger.intervals:
        if e < s:
            bad.append(f"interval ({c}, {u}) ends before it starts")
        by_pair.setdefault((c, u), []).append((s, e))
    for key, ivs in by_pair.items():
        ivs.sort()
        for (s0, e0), (s1, _) in zip(ivs, ivs[1:]):
            if s1 < e0:
                bad.append(f"overlapping reservations for {key}")
    if ledger.counts["prep_ready"] != len(ledger.intervals):
        bad.append("reservation opened and closed counts differ")
    return bad


def summary_row(result: RunResult, scenario: str = "", policy: str = "") -> dict:
    cfg = result.config
    row = {"scenario": scenario, "mode": cfg.mode, "case": cfg.blockage_case,
           "speed_kmh": cfg.speed_kmh, "policy": policy or "none", "n_max": cfg.n_max,
           "seed": cfg.seed, "n_ue": cfg.effective_n_ue, "t_sim_s": cfg.t_sim_ms / 1000.0}
    row.update(result.summary)
    return row


def write_run_outputs(result: RunResult, out_dir, scenario: str = "run", policy: str = "") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_events(result.events, out / "events.log")
    write_rows(out / "kpi_summary.csv", [summary_row(result, scenario, policy)], SUMMARY_COLUMNS)
    write_rows(out / "reservation_cdf.csv",
               reservation_cdf_rows(result.ledger.reservation_durations_s()),
               ("percentile", "reservation_s"))
    write_border_matrix(out / "border_matrix.csv", result.ledger.failure_matrix)
    return out
