"""Propagation: UMi soft-LoS path loss, grid-of-beams gain, shadowing and fast fading."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import kernels

log = logging.getLogger(__name__)

_clamp_warned = False


@dataclass(frozen=True)
class BeamConfig:
    beam_id: int  # 1..12
    elevation_deg: float  # zenith angle of the beam centre
    azimuth_deg: float  # relative to sector boresight
    rows: int  # vertical elements
    cols: int  # horizontal elements
    peak_gain_dbi: float
    hpbw_az_deg: float
    hpbw_el_deg: float


def beam_table(element_gain_dbi: float = 8.0, h_spacing: float = 0.5,
               v_spacing: float = 0.7) -> list[BeamConfig]:
    """The 12-beam grid: 8 narrow outer beams and 4 wide inner beams."""
    beams = []
    for b in range(1, 13):
        if b <= 8:
            az, el, cols, rows = -52.5 + 15.0 * (b - 1), 90.0, 16, 8
        else:
            az, el, cols, rows = -45.0 + 30.0 * (b - 9), 97.0, 8, 4
        beams.append(BeamConfig(
            beam_id=b,
            elevation_deg=el,
            azimuth_deg=az,
            rows=rows,
            cols=cols,
            peak_gain_dbi=element_gain_dbi + 10.0 * np.log10(rows * cols),
            hpbw_az_deg=102.0 / (cols * h_spacing),
            hpbw_el_deg=102.0 / (rows * v_spacing),
        ))
    return beams


def _wrap_deg(x):
    return (np.asarray(x) + 180.0) % 360.0 - 180.0


def beam_gain_db(beam: BeamConfig, azimuth_deg, zenith_deg, front_back_db: float = 30.0):
    """Parabolic beam pattern around the beam centre, floored at the front/back limit.

    A half-beamwidth offset in one plane costs 3 dB.
    """
    daz = _wrap_deg(np.asarray(azimuth_deg) - beam.azimuth_deg)
    dze = np.asarray(zenith_deg) - beam.elevation_deg
    att = 12.0 * (daz / beam.hpbw_az_deg) ** 2 + 12.0 * (dze / beam.hpbw_el_deg) ** 2
    return beam.peak_gain_dbi - np.minimum(att, front_back_db)


def beam_gains_db(beams: list[BeamConfig], azimuth_deg, zenith_deg,
                  front_back_db: float = 30.0) -> np.ndarray:
    """Gain of every beam; a trailing axis of length ``len(beams)`` is appended."""
    az = np.asarray(azimuth_deg)[..., None]
    ze = np.asarray(zenith_deg)[..., None]
    b_az = np.array([b.azimuth_deg for b in beams])
    b_ze = np.array([b.elevation_deg for b in beams])
    w_az = np.array([b.hpbw_az_deg for b in beams])
    w_ze = np.array([b.hpbw_el_deg for b in beams])
    peak = np.array([b.peak_gain_dbi for b in beams])
    att = 12.0 * (_wrap_deg(az - b_az) / w_az) ** 2 + 12.0 * ((ze - b_ze) / w_ze) ** 2
    return peak - np.minimum(att, front_back_db)


# -- path loss ---------------------------------------------------------------

def los_probability(d2d):
    """UMi street-canyon LoS probability."""
    d2d = np.asarray(d2d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = 18.0 / d2d + np.exp(-d2d / 36.0) * (1.0 - 18.0 / d2d)
    return np.where(d2d <= 18.0, 1.0, p)


def pl_los_db(d3d, fc_ghz: float = 28.0):
    return 32.4 + 21.0 * np.log10(d3d) + 20.0 * np.log10(fc_ghz)


def pl_nlos_db(d3d, fc_ghz: float = 28.0, h_ut: float = 1.5):
    nlos = 22.4 + 35.3 * np.log10(d3d) + 21.3 * np.log10(fc_ghz) - 0.3 * (h_ut - 1.5)
    return np.maximum(pl_los_db(d3d, fc_ghz), nlos)


def path_loss_db(distance3d, los_weight=None, d2d=None, fc_ghz: float = 28.0,
                 h_ut: float = 1.5):
    """Soft-LoS UMi path loss: ``w * PL_LoS + (1 - w) * PL_NLoS``.

    When ``los_weight`` is None it is the LoS probability at ``d2d`` (which
    defaults to ``distance3d``). Distances below 1 m are clamped.
    """
    global _clamp_warned
    d = np.asarray(distance3d, dtype=float)
    if np.any(d < 1.0):
        if not _clamp_warned:
            log.warning("path_loss_db: distance below 1 m clamped to 1 m")
            _clamp_warned = True
        d = np.maximum(d, 1.0)
    if los_weight is None:
        los_weight = los_probability(d if d2d is None else d2d)
    w = np.asarray(los_weight, dtype=float)
    return w * pl_los_db(d, fc_ghz) + (1.0 - w) * pl_nlos_db(d, fc_ghz, h_ut)


# -- shadow fading -------------------------------------------------------------

def _gaussian_maps(n_maps: int, n: int, corr_m: float, grid_m: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Unit-variance Gaussian maps with exponential autocorrelation, FFT-filtered.

    The periodic FFT grid is padded so opposite edges stay uncorrelated.
    """
    pad = n + int(np.ceil(6.0 * corr_m / grid_m))
    k = np.fft.fftfreq(pad) * pad
    kx, ky = np.meshgrid(k, k, indexing="ij")
    r = grid_m * np.hypot(kx, ky)
    amp = np.sqrt(np.abs(np.fft.fft2(np.exp(-r / corr_m))))
    norm = np.sqrt(np.mean(amp ** 2))
    maps = np.empty((n_maps, n, n))
    for c in range(n_maps):
        white = rng.standard_normal((pad, pad))
        maps[c] = np.fft.ifft2(np.fft.fft2(white) * amp).real[:n, :n] / norm
    return maps


def _bilinear(maps: np.ndarray, idx, disp, half_span: float, grid_m: float) -> np.ndarray:
    n = maps.shape[1]
    g = (np.asarray(disp, dtype=float) + half_span) / grid_m
    g = np.clip(g, 0.0, n - 1.000001)
    i0 = np.floor(g).astype(np.intp)
    f = g - i0
    ix, iy = i0[..., 0], i0[..., 1]
    fx, fy = f[..., 0], f[..., 1]
    c = np.broadcast_to(np.asarray(idx), ix.shape)
    return (maps[c, ix, iy] * (1 - fx) * (1 - fy) + maps[c, ix + 1, iy] * fx * (1 - fy)
            + maps[c, ix, iy + 1] * (1 - fx) * fy + maps[c, ix + 1, iy + 1] * fx * fy)


class ShadowFadingField:
    """Per-cell spatially correlated log-normal shadowing (dB).

    Each cell owns a Gaussian field with exponential autocorrelation sampled on
    a square grid centred on its site and indexed by the (wrapped) site-to-UE
    displacement, so UEs crossing the wrap border see a continuous value.
    Values between grid points are bilinearly interpolated.
    """

    def __init__(self, n_cells: int, half_span: float, sigma_db: float, corr_m: float,
                 grid_m: float, rng: np.random.Generator):
        self.sigma_db = float(sigma_db)
        self.corr_m = float(corr_m)
        self.grid_m = float(grid_m)
        self.half_span = float(half_span)
        self.n = int(np.ceil(2.0 * half_span / grid_m)) + 2
        if sigma_db == 0.0:
            self.maps = np.zeros((n_cells, self.n, self.n))
        else:
            self.maps = sigma_db * _gaussian_maps(n_cells, self.n, corr_m, grid_m, rng)

    def sample(self, cell_idx, disp) -> np.ndarray:
        """Shadowing for cells ``cell_idx`` at site-to-UE displacements ``disp``."""
        return _bilinear(self.maps, cell_idx, disp, self.half_span, self.grid_m)


class LosStateField:
    """Spatially consistent uniform(0, 1) variable per site for the link LoS state.

    A link is in LoS where the LoS probability exceeds the local draw; the soft
    state :func:`soft_los_weight` smooths that comparison.
    """

    def __init__(self, n_sites: int, half_span: float, corr_m: float, grid_m: float,
                 rng: np.random.Generator):
        self.half_span = float(half_span)
        self.grid_m = float(grid_m)
        n = int(np.ceil(2.0 * half_span / grid_m)) + 2
        self.maps = _gaussian_maps(n_sites, n, corr_m, grid_m, rng)

    def sample(self, site_idx, disp) -> np.ndarray:
        g = _bilinear(self.maps, site_idx, disp, self.half_span, self.grid_m)
        return ndtr(g)


def soft_los_weight(p_los, draw, sharpness: float = 20.0):
    """Soft LoS state in (0, 1): near 1 where ``p_los`` clearly exceeds the local draw."""
    return 0.5 + np.arctan(sharpness * (np.asarray(p_los) - np.asarray(draw))) / np.pi


# -- fast fading -----------------------------------------------------------------

class FadingState:
    """Sum-of-sinusoids Rayleigh fading, one oscillator bank per link.

    Link ``l`` at time ``t`` has complex gain
    ``sum_n exp(j(2 pi f_d cos(alpha_n) t + phi_n)) / sqrt(N)``; the phasors are
    advanced by a fixed rotation per step. ``shape`` is typically
    ``(n_ue, n_cells, n_beams)``.
    """

    def __init__(self, shape, doppler_hz: float, dt_s: float, n_osc: int,
                 rng: np.random.Generator, enabled: bool = True):
        self.shape = tuple(shape)
        self.enabled = enabled
        self.n_osc = n_osc
        n_links = int(np.prod(self.shape))
        if not enabled:
            self.re = self.im = self.rot_re = self.rot_im = None
            return
        alpha = rng.uniform(0.0, 2.0 * np.pi, size=(n_links, n_osc))
        phi = rng.uniform(0.0, 2.0 * np.pi, size=(n_links, n_osc))
        w = 2.0 * np.pi * doppler_hz * np.cos(alpha) * dt_s
        self.re = np.cos(phi)
        self.im = np.sin(phi)
        self.rot_re = np.cos(w)
        self.rot_im = np.sin(w)

    def power(self) -> np.ndarray:
        """Current linear power gain of each link (mean 1)."""
        if not self.enabled:
            return np.ones(self.shape)
        return kernels.sos_power(self.re, self.im).reshape(self.shape)

    def advance(self) -> None:
        if self.enabled:
            kernels.sos_rotate(self.re, self.im, self.rot_re, self.rot_im)

    def power_db(self) -> np.ndarray:
        return 10.0 * np.log10(np.maximum(self.power(), 1e-30))


def sos_trace(doppler_hz: float, dt_s: float, n_steps: int, n_osc: int = 16,
              seed: int = 0) -> np.ndarray:
    """Linear power trace of a single link, for inspection and tests."""
    st = FadingState((1,), doppler_hz, dt_s, n_osc, np.random.default_rng(seed))
    out = np.empty(n_steps)
    for k in range(n_steps):
        out[k] = st.power()[0]
        st.advance()
    return out


def large_scale_db(distance3d, d2d, shadow: ShadowFadingField | None, cell_idx, disp,
                   fc_ghz: float = 28.0, h_ut: float = 1.5, los_weight=None):
    """Path loss plus shadowing for cells ``cell_idx`` at site-to-UE displacements ``disp``."""
    pl = path_loss_db(distance3d, los_weight, d2d=d2d, fc_ghz=fc_ghz, h_ut=h_ut)
    if shadow is None:
        return pl
    return pl + shadow.sample(cell_idx, disp)
