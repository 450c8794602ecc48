"""Multi-run campaigns for the blockage, policy and prepared-set-size grids."""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import CASES, ConfigError, ScenarioConfig
from .kpi import SUMMARY_COLUMNS, write_rows
from .mro import MroPolicy, build_H, derive_policy, identity_policy, save_H
from .scenario import run_scenario, summary_row

log = logging.getLogger(__name__)

FIGURES = (5, 6, 9, 10)
SEEDS = (1, 2, 3, 4, 5)
TRAIN_SEEDS = (1000,)
POLICY_APPROACHES = ("blocklist", "offset-reduction", "combined")
N_MAX_SWEEP = (1, 2, 4, 8)
PLOT_KPIS = ("successful_ho", "fast_ho", "ping_pong", "short_stay", "hof", "rlf",
             "mobility_failures", "outage_pct", "sig_prep", "sig_rel", "sig_rep", "sig_total",
             "res_median_s", "res_p95_s", "res_norm")


@dataclass
class CampaignRun:
    label: str
    config: ScenarioConfig
    policy: str = "none"  # "none" or one of POLICY_APPROACHES
    tags: dict = field(default_factory=dict)


def training_config(base: ScenarioConfig, seed: int) -> ScenarioConfig:
    """Full-size FCHO run at Case III, 120 km/h with the default offsets."""
    return ScenarioConfig(**{
        **base.to_dict(), "mode": "FCHO", "blockage_case": "III", "speed_kmh": 120.0,
        "n_ue": 420, "t_sim_s": 30.0, "scale": 1.0, "seed": seed, "n_max": 4,
        "o_prep_db": 10.0, "policy_file": None})


def train_H(base: ScenarioConfig, seeds=TRAIN_SEEDS):
    """Handover probability matrix pooled over the training runs."""
    events = []
    n_cells = None
    for seed in seeds:
        res = run_scenario(training_config(base, seed))
        events.extend(res.events)
        n_cells = res.ledger.n_cells
    return build_H(events, n_cells)


def policy_for(name: str, H, base: ScenarioConfig) -> MroPolicy:
    if name == "none":
        return identity_policy(H.shape[0], base.o_prep_db)
    return derive_policy(H, name, base.o_prep_db, base.reduced_prep_offset_db,
                         base.p_block, base.p_reduce)


def figure_runs(figure: int, base: ScenarioConfig, seeds=SEEDS) -> list[CampaignRun]:
    """The run matrix behind one reproduced figure."""
    runs = []
    if figure in (5, 6):
        speed = 60.0 if figure == 5 else 120.0
        for case in CASES:
            for mode in ("CHO", "FCHO"):
                for seed in seeds:
                    cfg = base.replace(mode=mode, blockage_case=case, speed_kmh=speed, seed=seed)
                    runs.append(CampaignRun(f"{mode}/{case}", cfg, tags={"case": case}))
    elif figure == 9:
        base = base.replace(blockage_case="III", speed_kmh=120.0)
        for seed in seeds:
            runs.append(CampaignRun("CHO", base.replace(mode="CHO", seed=seed)))
            runs.append(CampaignRun("FCHO", base.replace(mode="FCHO", seed=seed)))
            for name in POLICY_APPROACHES:
                runs.append(CampaignRun(name, base.replace(mode="FCHO", seed=seed), name))
    elif figure == 10:
        base = base.replace(blockage_case="III", speed_kmh=120.0, mode="FCHO")
        for n in N_MAX_SWEEP:
            for seed in seeds:
                runs.append(CampaignRun(f"n_max={n}", base.replace(n_max=n, seed=seed),
                                        "combined", {"n_max": n}))
    else:
        raise ConfigError([f"figure must be one of {FIGURES}"])
    return runs


def _execute(run: CampaignRun, policy: MroPolicy | None) -> dict:
    try:
        res = run_scenario(run.config, policy)
    except Exception as exc:  # a failed run is recorded, the campaign goes on
        log.error("run %s seed %d failed: %s", run.label, run.config.seed, exc)
        return {"label": run.label, "seed": run.config.seed, "status": f"failed: {exc}"}
    row = summary_row(res, run.label, run.policy)
    row.update(label=run.label, status="ok", violations=len(res.violations))
    return row


def run_campaign(runs, H=None, jobs: int = 1) -> list[dict]:
    """Execute every run; one summary row per run, failed runs included."""
    runs = list(runs)
    if not runs:
        raise ConfigError(["campaign has no runs"])
    policies = {}
    for run in runs:
        if run.policy != "none" and run.policy not in policies:
            if H is None:
                raise ConfigError([f"policy {run.policy!r} needs a trained H matrix"])
            policies[run.policy] = policy_for(run.policy, H, run.config)
    args = [(run, policies.get(run.policy)) for run in runs]
    if jobs <= 1:
        return [_execute(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_execute, *zip(*args)))


def aggregate(rows, kpis=PLOT_KPIS) -> list[dict]:
    """Mean and sample stdev per label, labels in first-seen order."""
    groups: dict = {}
    for row in rows:
        groups.setdefault(row["label"], []).append(row)
    out = []
    for label, group in groups.items():
        ok = [r for r in group if r.get("status") == "ok"]
        rec = {"label": label, "n_runs": len(ok), "n_failed_runs": len(group) - len(ok)}
        for k in kpis:
            vals = [float(r[k]) for r in ok]
            rec[f"{k}_mean"] = statistics.fmean(vals) if vals else float("nan")
            rec[f"{k}_std"] = statistics.stdev(vals) if len(vals) > 1 else 0.0
        out.append(rec)
    return out


def run_figure(figure: int, out_dir, base: ScenarioConfig | None = None, seeds=SEEDS,
               train_seeds=TRAIN_SEEDS, jobs: int = 1) -> list[dict]:
    """Run one figure campaign and write its per-run and plot-data CSVs."""
    base = (base or ScenarioConfig()).validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = figure_runs(figure, base, seeds)
    H = None
    if any(r.policy != "none" for r in runs):
        H = train_H(base, train_seeds)
        save_H(out / "H.csv", H)
        for name in POLICY_APPROACHES:
            policy_for(name, H, base).save(out / f"policy_{name}.csv")
    rows = run_campaign(runs, H, jobs)
    cols = ("label", "status", "violations") + SUMMARY_COLUMNS
    write_rows(out / f"kpi_summary_fig{figure}.csv", rows, cols)
    agg = aggregate(rows)
    agg_cols = ["label", "n_runs", "n_failed_runs"]
    for k in PLOT_KPIS:
        agg_cols += [f"{k}_mean", f"{k}_std"]
    write_rows(out / f"plotdata_fig{figure}.csv", agg, agg_cols)
    return agg
