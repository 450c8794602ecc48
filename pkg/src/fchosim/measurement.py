"""L1 RSRP, L3 cell quality, downlink SINR and radio link monitoring."""

from __future__ import annotations

import numpy as np

from .config import ConfigError


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def lin2db(x):
    return 10.0 * np.log10(np.maximum(np.asarray(x, dtype=float), 1e-300))


def raw_rsrp(tx_power_dbm, beam_gain_db=0.0, panel_gain_db=0.0, path_loss_db=0.0,
             shadow_db=0.0, fading_db=0.0, blockage_db=0.0):
    """Additive link budget. ``fading_db`` is a gain (negative in a fade)."""
    return (np.asarray(tx_power_dbm, dtype=float) + beam_gain_db + panel_gain_db
            - path_loss_db - shadow_db + fading_db - blockage_db)


def l3_filter(prev, meas, a: float):
    """One step of the exponential L3 filter in dB; ``prev=None`` initialises."""
    if not 0.0 < a <= 1.0:
        raise ConfigError([f"L3 filter coefficient {a} outside (0, 1]"])
    if prev is None:
        return meas
    return (1.0 - a) * prev + a * meas


def beam_rsrp(l1):
    """Per-beam RSRP: max over the trailing panel axis."""
    return np.max(l1, axis=-1)


def cell_quality(l1):
    """Unfiltered cell quality from (..., beams, panels) L1 values: best beam on best panel."""
    return np.max(beam_rsrp(l1), axis=-1)


class L3Filter:
    """Vectorised L3 cell-quality filter; each entry initialises on its first sample."""

    def __init__(self, shape, a: float):
        if not 0.0 < a <= 1.0:
            raise ConfigError([f"L3 filter coefficient {a} outside (0, 1]"])
        self.a = a
        self.value = np.zeros(shape)
        self.ready = np.zeros(shape, dtype=bool)

    def update(self, meas: np.ndarray) -> np.ndarray:
        self.value = np.where(self.ready, (1.0 - self.a) * self.value + self.a * meas, meas)
        self.ready[...] = True
        return self.value


def sinr_db(serving_dbm: float, interferers_dbm, noise_dbm: float, kb: int = 4,
            n_beams: int = 12, mode: str = "expectation", rng=None) -> float:
    """Downlink SINR of one serving link.

    ``interferers_dbm`` has shape (cells, beams) and holds every beam of every
    non-serving cell. In expectation mode each cell contributes ``kb/n_beams`` of
    its summed beam power; in sampled mode ``kb`` beams per cell are drawn
    without replacement.
    """
    p = db2lin(np.atleast_2d(interferers_dbm))
    if p.size == 0:
        interference = 0.0
    elif mode == "expectation":
        interference = kb / n_beams * float(p.sum())
    elif mode == "sampled":
        rng = rng if rng is not None else np.random.default_rng()
        idx = np.argsort(rng.random(p.shape), axis=1)[:, :kb]
        interference = float(np.take_along_axis(p, idx, axis=1).sum())
    else:
        raise ConfigError([f"unknown SINR mode {mode!r}"])
    noise = float(db2lin(noise_dbm)) if noise_dbm is not None else 0.0
    return float(lin2db(db2lin(serving_dbm) / (noise + interference)))


def sampled_interference_mask(rng: np.random.Generator, shape, kb: int) -> np.ndarray:
    """Boolean (..., beams) mask selecting ``kb`` beams uniformly per leading index."""
    keys = rng.random(shape)
    kth = np.partition(keys, kb - 1, axis=-1)[..., kb - 1:kb]
    return keys <= kth


def rlm_average(history_db, window_steps: int) -> float:
    """Linear-domain mean of the last ``window_steps`` SINR samples, in dB."""
    if window_steps < 1:
        raise ConfigError(["RLM window must cover at least one step"])
    h = np.asarray(history_db, dtype=float)[-window_steps:]
    return float(lin2db(np.mean(db2lin(h))))


class RlmWindow:
    """Sliding linear mean of serving SINR for a batch of UEs (ring buffer)."""

    def __init__(self, n_ue: int, window_steps: int):
        if window_steps < 1:
            raise ConfigError(["RLM window must cover at least one step"])
        self.buf = np.zeros((n_ue, window_steps))
        self.count = np.zeros(n_ue, dtype=np.int64)
        self.pos = np.zeros(n_ue, dtype=np.int64)

    def push(self, sinr_lin: np.ndarray, mask: np.ndarray) -> None:
        u = np.flatnonzero(mask)
        self.buf[u, self.pos[u]] = sinr_lin[u]
        self.pos[u] = (self.pos[u] + 1) % self.buf.shape[1]
        self.count[u] = np.minimum(self.count[u] + 1, self.buf.shape[1])

    def value_db(self) -> np.ndarray:
        n = np.maximum(self.count, 1)
        # unused slots are zero, so the plain row sum is the window sum
        return lin2db(self.buf.sum(axis=1) / n)

    def reset(self, u) -> None:
        self.buf[u] = 0.0
        self.count[u] = 0
        self.pos[u] = 0
