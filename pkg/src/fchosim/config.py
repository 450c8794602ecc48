"""Scenario configuration: defaults, validation and JSON persistence."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

MODES = ("CHO", "FCHO")
CASES = ("I", "II", "III", "IV", "V", "VI")
BLOCKAGE_MODELS = ("em", "3gpp")
SINR_MODES = ("expectation", "sampled")
LOS_MODELS = ("spatial", "expected")


class ConfigError(ValueError):
    """Raised when a scenario configuration is invalid.

    ``problems`` lists every offending field, one message each.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration: " + "; ".join(self.problems))


@dataclass
class ScenarioConfig:
    # radio
    carrier_ghz: float = 28.0
    bandwidth_mhz: float = 100.0
    tx_power_dbm: float = 40.0
    noise_figure_db: float = 9.0
    bs_height_m: float = 10.0
    ue_height_m: float = 1.5
    inter_site_distance_m: float = 200.0
    n_rings: int = 1  # 0 -> single site, 1 -> 7 sites
    beams_per_cell: int = 12
    kb: int = 4
    sinr_mode: str = "expectation"
    front_back_db: float = 30.0
    bs_element_gain_dbi: float = 8.0

    # LoS state, shadowing, fading
    los_model: str = "spatial"  # "spatial": correlated soft state per link; "expected": w = P_LoS
    los_corr_m: float = 50.0
    soft_los_sharpness: float = 200.0
    shadow_sigma_db: float = 4.0
    shadow_corr_m: float = 13.0
    shadow_grid_m: float = 2.0
    fading: bool = True
    fading_oscillators: int = 16

    # MPUE and blockage
    ue_element_gain_dbi: float = 5.0
    blockage_case: str = "III"
    blockage_model: str = "em"
    case_one_penalty_db: float = 1.0
    panel_hysteresis_db: float = 1.0
    thumb_attenuation_db: float = 18.66
    finger_attenuation_db: float = 5.28
    overlay_halfwidth_deg: float = 60.0
    overlay_file: str | None = None

    # measurement
    dt_ms: int = 10
    ssb_period_ms: int = 20
    l3_coeff: float = 0.5
    rlm_window_ms: int = 200

    # CHO
    mode: str = "FCHO"
    o_prep_db: float = 10.0
    o_exec_db: float = 3.0
    o_rel_db: float = 13.0
    o_rep_db: float = 3.0
    t_prep_ms: int = 80
    t_exec_ms: int = 80
    t_rel_ms: int = 80
    t_rep_ms: int = 80
    n_max: int = 4
    prep_latency_ms: int = 50
    rach_period_ms: int = 20
    t_hof_ms: int = 200
    t_rlf_ms: int = 1000
    bfr_window_ms: int = 200
    gamma_out_db: float = -8.0
    gamma_in_db: float = -6.0
    ho_interruption_ms: int = 55
    reestablish_ms: int = 180

    # KPI
    t_fh_ms: int = 1000
    replace_counts_once: bool = True

    # MRO
    p_block: float = 0.0
    p_reduce: float = 0.12
    reduced_prep_offset_db: float = 7.0
    policy_file: str | None = None

    # run
    n_ue: int = 105
    t_sim_s: float = 10.0
    speed_kmh: float = 120.0
    seed: int = 1
    scale: float = 1.0
    workers: int = 1

    @classmethod
    def full_scale(cls, **overrides) -> "ScenarioConfig":
        """Full-size run: 420 UEs for 30 s."""
        return cls(**{"n_ue": 420, "t_sim_s": 30.0, **overrides})

    # derived quantities -------------------------------------------------
    @property
    def wavelength_m(self) -> float:
        return 299_792_458.0 / (self.carrier_ghz * 1e9)

    @property
    def noise_dbm(self) -> float:
        return -174.0 + 10.0 * math.log10(self.bandwidth_mhz * 1e6) + self.noise_figure_db

    @property
    def speed_mps(self) -> float:
        return self.speed_kmh / 3.6

    @property
    def effective_n_ue(self) -> int:
        return max(1, int(round(self.n_ue * self.scale)))

    @property
    def t_sim_ms(self) -> int:
        steps = int(round(self.t_sim_s * self.scale * 1000.0 / self.dt_ms))
        return steps * self.dt_ms

    @property
    def n_steps(self) -> int:
        return self.t_sim_ms // self.dt_ms

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    # validation ---------------------------------------------------------
    def validate(self) -> "ScenarioConfig":
        bad = []
        if self.inter_site_distance_m <= 0:
            bad.append("inter_site_distance_m must be positive")
        if self.n_rings not in (0, 1):
            bad.append("n_rings must be 0 or 1")
        if self.mode not in MODES:
            bad.append(f"mode must be one of {MODES}")
        if self.blockage_case not in CASES:
            bad.append(f"blockage_case must be one of {CASES}")
        if self.blockage_model not in BLOCKAGE_MODELS:
            bad.append(f"blockage_model must be one of {BLOCKAGE_MODELS}")
        if self.los_model not in LOS_MODELS:
            bad.append(f"los_model must be one of {LOS_MODELS}")
        if self.los_corr_m <= 0 or self.soft_los_sharpness <= 0:
            bad.append("los_corr_m and soft_los_sharpness must be positive")
        if self.sinr_mode not in SINR_MODES:
            bad.append(f"sinr_mode must be one of {SINR_MODES}")
        if not self.gamma_in_db > self.gamma_out_db:
            bad.append("gamma_in_db must exceed gamma_out_db")
        if not 1 <= self.n_max <= 8:
            bad.append("n_max must lie in [1, 8]")
        if not 0.0 < self.l3_coeff <= 1.0:
            bad.append("l3_coeff must lie in (0, 1]")
        if self.dt_ms <= 0 or self.ssb_period_ms % self.dt_ms:
            bad.append("ssb_period_ms must be a positive multiple of dt_ms")
        for name in ("t_prep_ms", "t_exec_ms", "t_rel_ms", "t_rep_ms"):
            value = getattr(self, name)
            if value <= 0 or value % self.ssb_period_ms:
                bad.append(f"{name} must be a positive multiple of ssb_period_ms")
        for name in ("prep_latency_ms", "rach_period_ms", "t_hof_ms", "t_rlf_ms",
                     "rlm_window_ms", "bfr_window_ms"):
            value = getattr(self, name)
            if value < 0 or value % self.dt_ms:
                bad.append(f"{name} must be a non-negative multiple of dt_ms")
        for name in ("ho_interruption_ms", "reestablish_ms"):
            if getattr(self, name) < 0:
                bad.append(f"{name} must be non-negative")
        if self.rlm_window_ms < self.dt_ms:
            bad.append("rlm_window_ms must cover at least one step")
        if self.rach_period_ms <= 0:
            bad.append("rach_period_ms must be positive")
        if not 1 <= self.kb <= self.beams_per_cell:
            bad.append("kb must lie in [1, beams_per_cell]")
        if self.beams_per_cell != 12:
            bad.append("beams_per_cell is fixed at 12 by the beam table")
        if self.n_ue < 1:
            bad.append("n_ue must be at least 1")
        if self.t_sim_s < 0:
            bad.append("t_sim_s must be non-negative")
        if self.scale <= 0:
            bad.append("scale must be positive")
        if self.speed_kmh < 0:
            bad.append("speed_kmh must be non-negative")
        if self.shadow_sigma_db < 0:
            bad.append("shadow_sigma_db must be non-negative")
        if self.shadow_corr_m <= 0 or self.shadow_grid_m <= 0:
            bad.append("shadow_corr_m and shadow_grid_m must be positive")
        if self.fading_oscillators < 1:
            bad.append("fading_oscillators must be at least 1")
        if not 0.0 <= self.p_block <= self.p_reduce <= 1.0:
            bad.append("need 0 <= p_block <= p_reduce <= 1")
        if self.workers < 1:
            bad.append("workers must be at least 1")
        if bad:
            raise ConfigError(bad)
        return self

    # persistence --------------------------------------------------------
    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError([f"unknown field {name!r}" for name in unknown])
        return cls(**data)

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

