"""Per-step link budget for every (UE, cell, beam, panel) and the derived SINRs."""

from __future__ import annotations

import numpy as np

from . import kernels
from .blockage import MpueAntenna, GridOverlay
from .channel import (FadingState, LosStateField, ShadowFadingField, beam_gains_db, beam_table,
                      large_scale_db, los_probability, soft_los_weight)
from .config import ScenarioConfig
from .deployment import NetworkLayout, UeKinematics, wrapped_displacement
from .measurement import db2lin, sampled_interference_mask


class RadioModel:
    """Owns the static antenna/shadowing setup and the fading state of one run."""

    def __init__(self, config: ScenarioConfig, layout: NetworkLayout, n_ue: int,
                 shadow_rng: np.random.Generator, fading_rng: np.random.Generator,
                 sampled_rng: np.random.Generator | None = None):
        self.config = config
        self.layout = layout
        self.n_ue = n_ue
        self.beams = beam_table(config.bs_element_gain_dbi)
        self.n_beams = len(self.beams)
        overlays = None
        if config.overlay_file:
            grid = GridOverlay.from_csv(config.overlay_file)
            overlays = {"P1": grid}
        self.antenna = MpueAntenna(config.blockage_case, config.ue_element_gain_dbi,
                                   config.thumb_attenuation_db, config.finger_attenuation_db,
                                   config.overlay_halfwidth_deg, config.case_one_penalty_db,
                                   config.blockage_model, overlays=overlays)
        self.shadow = ShadowFadingField(layout.n_cells, layout.domain_circumradius + 2.0,
                                        config.shadow_sigma_db, config.shadow_corr_m,
                                        config.shadow_grid_m, shadow_rng)
        self.los_field = None
        if config.los_model == "spatial":
            self.los_field = LosStateField(layout.n_sites, layout.domain_circumradius + 2.0,
                                           config.los_corr_m, config.shadow_grid_m, shadow_rng)
        doppler = config.speed_mps / config.wavelength_m
        self.fading = FadingState((n_ue, layout.n_cells, self.n_beams), doppler,
                                  config.dt_ms / 1000.0, config.fading_oscillators,
                                  fading_rng, enabled=config.fading)
        self.sampled_rng = sampled_rng
        self.noise_lin = float(db2lin(config.noise_dbm))
        self.kb_frac = config.kb / self.n_beams
        self._cells = np.arange(layout.n_cells)
        self._sites = np.arange(layout.n_sites)

    def link_budget(self, ue: UeKinematics) -> np.ndarray:
        """Received power in dBm, shape (U, C, B, P), at the current fading state."""
        cfg, lay = self.config, self.layout
        disp_site = wrapped_displacement(lay.sites[None, :, :], ue.position[:, None, :], lay)
        disp = disp_site[:, lay.cell_site]  # (U, C, 2) site -> UE
        d2d = np.maximum(np.hypot(disp[..., 0], disp[..., 1]), 1e-6)
        dh = lay.bs_height_m - ue.height
        d3d = np.hypot(d2d, dh)
        az_bs = np.degrees(np.arctan2(disp[..., 1], disp[..., 0]))
        zen_bs = 90.0 + np.degrees(np.arctan2(dh, d2d))
        g_beam = beam_gains_db(self.beams, az_bs - lay.cell_azimuth_deg, zen_bs,
                               cfg.front_back_db)  # (U, C, B)
        az_ue = az_bs + 180.0 - np.degrees(ue.heading)[:, None]
        zen_ue = 180.0 - zen_bs
        g_panel = self.antenna.gains_db(az_ue, zen_ue)  # (U, C, P)
        w = None
        if self.los_field is not None:
            draw = self.los_field.sample(self._sites[None, :], disp_site)[:, lay.cell_site]
            w = soft_los_weight(los_probability(d2d), draw, cfg.soft_los_sharpness)
        ls = large_scale_db(d3d, d2d, self.shadow, self._cells[None, :], disp,
                            cfg.carrier_ghz, ue.height, w)  # (U, C)
        fad = self.fading.power_db() if cfg.fading else 0.0
        base = cfg.tx_power_dbm + g_beam - ls[..., None] + fad  # (U, C, B)
        return base[..., None] + g_panel[:, :, None, :]

    def advance(self) -> None:
        self.fading.advance()

    def sinr_lin(self, p_dbm: np.ndarray) -> np.ndarray:
        """Linear SINR of every link as if its cell served the UE on that panel: (U, P, C, B)."""
        p_lin = db2lin(np.moveaxis(p_dbm, 3, 1))  # (U, P, C, B)
        u, n_p, c, b = p_lin.shape
        flat = np.ascontiguousarray(p_lin.reshape(u * n_p, c, b))
        if self.config.sinr_mode == "sampled":
            # one draw per (UE, cell, beam), shared by the UE's panels
            mask = sampled_interference_mask(self.sampled_rng, (u, c, b), self.config.kb)
            mask = np.repeat(mask, n_p, axis=0)
            per_cell = (flat * mask).sum(axis=2)
            denom = self.noise_lin + per_cell.sum(axis=1, keepdims=True) - per_cell
            sinr = flat / denom[:, :, None]
        else:
            sinr = kernels.sinr_all(flat, None, self.kb_frac, self.noise_lin)
        return sinr.reshape(u, n_p, c, b)
