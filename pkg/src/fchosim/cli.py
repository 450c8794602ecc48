"""Command line entry point: simulate, derive-policy, campaign, init-config."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .campaign import FIGURES, SEEDS, TRAIN_SEEDS, run_figure
from .config import ConfigError, ScenarioConfig
from .events import read_events
from .mro import APPROACHES, build_H, derive_policy, save_H
from .scenario import run_scenario, summary_row, write_run_outputs


def _seeds(text: str) -> tuple[int, ...]:
    return tuple(int(s) for s in text.split(",") if s.strip())


def _base_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    if getattr(args, "full_scale", False):
        cfg = cfg.replace(n_ue=420, t_sim_s=30.0)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _base_config(args)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.policy:
        changes["policy_file"] = args.policy
    cfg = cfg.replace(**changes).validate()
    result = run_scenario(cfg)
    out = write_run_outputs(result, args.out, "simulate", Path(args.policy).stem if args.policy else "")
    row = summary_row(result)
    print(json.dumps({k: row[k] for k in ("mode", "seed", "successful_ho", "mobility_failures",
                                           "outage_pct", "sig_total", "res_median_s")}))
    if result.violations:
        print(f"{len(result.violations)} invariant violations, see log", file=sys.stderr)
        return 1
    print(f"outputs written to {out}", file=sys.stderr)
    return 0


def cmd_derive_policy(args) -> int:
    events = read_events(args.log)
    H = build_H(events, args.n_cells)
    policy = derive_policy(H, args.approach, args.o_prep, args.reduced_offset,
                           args.p_block, args.p_reduce)
    policy.save(args.out)
    if args.h_out:
        save_H(args.h_out, H)
    print(f"{int(policy.blocked.sum())} blocked pairs, "
          f"{int((policy.o_prep_db < args.o_prep).sum())} reduced offsets -> {args.out}")
    return 0


def cmd_campaign(args) -> int:
    base = _base_config(args)
    agg = run_figure(args.figure, args.out, base, _seeds(args.seeds), _seeds(args.train_seeds),
                     args.jobs)
    for rec in agg:
        print(f"{rec['label']:>16s}  failures {rec['mobility_failures_mean']:.3f}"
              f" +- {rec['mobility_failures_std']:.3f}  outage {rec['outage_pct_mean']:.3f}%"
              f"  signaling {rec['sig_total_mean']:.1f}  runs {rec['n_runs']}"
              f" failed {rec['n_failed_runs']}")
    return 1 if any(rec["n_failed_runs"] for rec in agg) else 0


def cmd_init_config(args) -> int:
    cfg = ScenarioConfig()
    if args.full_scale:
        cfg = cfg.replace(n_ue=420, t_sim_s=30.0)
    if args.out == "-":
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
    else:
        cfg.dump(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fchosim", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario")
    s.add_argument("--config")
    s.add_argument("--policy")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", default="out")
    s.add_argument("--full-scale", action="store_true", help="420 UEs for 30 s")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("derive-policy", help="build a reservation policy from an event log")
    d.add_argument("--log", required=True)
    d.add_argument("--approach", required=True, choices=APPROACHES)
    d.add_argument("--out", required=True)
    d.add_argument("--h-out", help="also write the H matrix CSV")
    d.add_argument("--n-cells", type=int, default=21)
    d.add_argument("--o-prep", type=float, default=10.0)
    d.add_argument("--reduced-offset", type=float, default=7.0)
    d.add_argument("--p-block", type=float, default=0.0)
    d.add_argument("--p-reduce", type=float, default=0.12)
    d.set_defaults(func=cmd_derive_policy)

    c = sub.add_parser("campaign", help="reproduce one figure grid")
    c.add_argument("--figure", type=int, required=True, choices=FIGURES)
    c.add_argument("--out", required=True)
    c.add_argument("--config")
    c.add_argument("--seeds", default=",".join(map(str, SEEDS)))
    c.add_argument("--train-seeds", default=",".join(map(str, TRAIN_SEEDS)))
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--full-scale", action="store_true")
    c.set_defaults(func=cmd_campaign)

    i = sub.add_parser("init-config", help="write the default configuration")
    i.add_argument("--out", default="-")
    i.add_argument("--full-scale", action="store_true")
    i.set_defaults(func=cmd_init_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
