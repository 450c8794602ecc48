"""Three-panel edge-design MPUE receive gain and hand-blockage models.

UE frame: azimuth 0 deg points out of the top edge (direction of travel),
angles grow counter-clockwise, so the right edge faces 270 deg and the left
edge 90 deg. Zenith 90 deg is the horizon (screen parallel to the ground).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .config import ConfigError

PANELS = ("P1", "P2", "P3")
PANEL_BORESIGHT_DEG = np.array([270.0, 0.0, 90.0])

# which panels carry a hand overlay in each case
CASE_OVERLAYS = {
    "I": (),
    "II": (),
    "III": ("P1", "P3"),
    "IV": ("P1",),
    "V": ("P3",),
    "VI": (),
}

FLAT_LOSS_DB = 30.0


def _wrap180(x):
    return (np.asarray(x, dtype=float) + 180.0) % 360.0 - 180.0


def element_gain_db(azimuth_deg, zenith_deg, boresight_deg: float, max_gain_dbi: float = 5.0):
    """Directional element (65 deg HPBW, 30 dB floor) pointed at ``boresight_deg``."""
    a_h = -np.minimum(12.0 * (_wrap180(np.asarray(azimuth_deg) - boresight_deg) / 65.0) ** 2, 30.0)
    a_v = -np.minimum(12.0 * ((np.asarray(zenith_deg) - 90.0) / 65.0) ** 2, 30.0)
    return max_gain_dbi - np.minimum(-(a_h + a_v), 30.0)


def angular_separation_deg(az1, ze1, az2, ze2):
    """Great-circle angle between two (azimuth, zenith) directions."""
    az1, ze1, az2, ze2 = (np.radians(np.asarray(v, dtype=float)) for v in (az1, ze1, az2, ze2))
    cosang = (np.sin(ze1) * np.sin(ze2) * np.cos(az1 - az2) + np.cos(ze1) * np.cos(ze2))
    return np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))


@dataclass(frozen=True)
class TaperOverlay:
    """cos^2 attenuation bump centred on a panel boresight."""

    peak_db: float
    boresight_deg: float
    halfwidth_deg: float = 60.0

    def __call__(self, azimuth_deg, zenith_deg):
        sep = angular_separation_deg(azimuth_deg, zenith_deg, self.boresight_deg, 90.0)
        x = np.clip(sep / self.halfwidth_deg, 0.0, 1.0)
        return self.peak_db * np.cos(0.5 * np.pi * x) ** 2


class GridOverlay:
    """Attenuation table (azimuth deg, zenith deg, dB) with bilinear lookup."""

    def __init__(self, azimuths, zeniths, table):
        az = np.asarray(azimuths, dtype=float)
        ze = np.asarray(zeniths, dtype=float)
        table = np.asarray(table, dtype=float)
        if np.any(table < 0):
            raise ConfigError(["overlay attenuation must be non-negative"])
        # close the azimuth circle so lookups near 360 interpolate to 0
        if az[-1] - az[0] < 360.0:
            az = np.append(az, az[0] + 360.0)
            table = np.vstack([table, table[:1]])
        self._az0 = az[0]
        self._interp = RegularGridInterpolator((az, ze), table, bounds_error=False,
                                               fill_value=None)

    def __call__(self, azimuth_deg, zenith_deg):
        az = (np.asarray(azimuth_deg, dtype=float) - self._az0) % 360.0 + self._az0
        ze = np.broadcast_to(np.asarray(zenith_deg, dtype=float), az.shape)
        pts = np.stack([az, ze], axis=-1)
        return np.maximum(self._interp(pts), 0.0)

    @classmethod
    def from_csv(cls, path) -> "GridOverlay":
        rows = []
        with open(Path(path), newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].strip().startswith("#"):
                    continue
                try:
                    rows.append(tuple(float(x) for x in rec[:3]))
                except ValueError:
                    continue  # header
        data = np.array(rows)
        az = np.unique(data[:, 0])
        ze = np.unique(data[:, 1])
        table = np.full((len(az), len(ze)), np.nan)
        ia = np.searchsorted(az, data[:, 0])
        iz = np.searchsorted(ze, data[:, 1])
        table[ia, iz] = data[:, 2]
        if np.isnan(table).any():
            raise ConfigError([f"overlay grid in {path} is incomplete"])
        return cls(az, ze, table)


@dataclass(frozen=True)
class StochasticBlockageRegion:
    """Angular box in the UE frame with a flat loss (closed intervals)."""

    azimuth_center_deg: float = 260.0
    azimuth_span_deg: float = 120.0
    zenith_center_deg: float = 100.0
    zenith_span_deg: float = 80.0
    loss_db: float = FLAT_LOSS_DB

    def __post_init__(self):
        bad = []
        if not 0.0 < self.azimuth_span_deg <= 360.0:
            bad.append("azimuth span must lie in (0, 360]")
        if not 0.0 < self.zenith_span_deg <= 180.0:
            bad.append("elevation span must lie in (0, 180]")
        if bad:
            raise ConfigError(bad)

    def contains(self, azimuth_deg, zenith_deg):
        daz = np.abs(_wrap180(np.asarray(azimuth_deg) - self.azimuth_center_deg))
        dze = np.abs(np.asarray(zenith_deg, dtype=float) - self.zenith_center_deg)
        return (daz <= 0.5 * self.azimuth_span_deg) & (dze <= 0.5 * self.zenith_span_deg)


def stochastic_blockage_loss_db(region: StochasticBlockageRegion, azimuth_deg, zenith_deg):
    return np.where(region.contains(azimuth_deg, zenith_deg), region.loss_db, 0.0)


class MpueAntenna:
    """Receive gain of the three panels for one blockage case."""

    def __init__(self, case: str = "II", max_gain_dbi: float = 5.0,
                 thumb_db: float = 18.66, finger_db: float = 5.28,
                 halfwidth_deg: float = 60.0, case_one_penalty_db: float = 1.0,
                 model: str = "em", region: StochasticBlockageRegion | None = None,
                 overlays: dict | None = None):
        if case not in CASE_OVERLAYS:
            raise ConfigError([f"unknown blockage case {case!r}"])
        self.case = case
        self.max_gain_dbi = max_gain_dbi
        self.model = model
        self.region = region or StochasticBlockageRegion()
        self.penalty_db = case_one_penalty_db if case == "I" else 0.0
        default = {
            "P1": TaperOverlay(thumb_db, PANEL_BORESIGHT_DEG[0], halfwidth_deg),
            "P3": TaperOverlay(finger_db, PANEL_BORESIGHT_DEG[2], halfwidth_deg),
        }
        if overlays:
            default.update(overlays)
        self.overlays = {p: default[p] for p in CASE_OVERLAYS[case]} if model == "em" else {}

    def overlay_db(self, panel: int, azimuth_deg, zenith_deg):
        ov = self.overlays.get(PANELS[panel])
        if ov is None:
            return np.zeros(np.broadcast(np.asarray(azimuth_deg), np.asarray(zenith_deg)).shape)
        return ov(azimuth_deg, zenith_deg)

    def panel_rx_gain_db(self, panel: int, azimuth_deg, zenith_deg):
        g = element_gain_db(azimuth_deg, zenith_deg, PANEL_BORESIGHT_DEG[panel], self.max_gain_dbi)
        g = g - self.overlay_db(panel, azimuth_deg, zenith_deg) - self.penalty_db
        if self.model == "3gpp" and self.case not in ("II", "VI"):
            g = g - stochastic_blockage_loss_db(self.region, azimuth_deg, zenith_deg)
        return g

    def gains_db(self, azimuth_deg, zenith_deg) -> np.ndarray:
        """Gain of all three panels; a trailing panel axis is appended."""
        return np.stack([self.panel_rx_gain_db(p, azimuth_deg, zenith_deg) for p in range(3)],
                        axis=-1)


def panel_rx_gain_db(panel: int, case: str, azimuth_deg, zenith_deg=90.0, **kwargs):
    return MpueAntenna(case, **kwargs).panel_rx_gain_db(panel, azimuth_deg, zenith_deg)


def select_serving_panel(rsrp, incumbent: int | None = None, hysteresis_db: float = 1.0) -> int:
    """Strongest panel (lowest index on ties); the incumbent stays unless beaten by more than
    ``hysteresis_db``."""
    rsrp = np.asarray(rsrp, dtype=float)
    best = int(np.argmax(rsrp))
    if incumbent is None or best == incumbent:
        return best
    if rsrp[best] > rsrp[incumbent] + hysteresis_db:
        return best
    return int(incumbent)


def select_serving_panels(rsrp: np.ndarray, incumbent: np.ndarray, hysteresis_db: float) -> np.ndarray:
    """Vectorised :func:`select_serving_panel` over a leading UE axis (incumbent -1 = none)."""
    best = np.argmax(rsrp, axis=1)
    u = np.arange(len(rsrp))
    has = incumbent >= 0
    inc = np.where(has, incumbent, best)
    keep = has & ~(rsrp[u, best] > rsrp[u, inc] + hysteresis_db)
    return np.where(keep, inc, best)
