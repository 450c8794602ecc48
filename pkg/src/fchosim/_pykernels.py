"""Pure-numpy versions of the per-step hot kernels.

Same signatures and semantics as the compiled ``_ckernels`` module; used when
the extension is not built or ``FCHOSIM_PURE_PYTHON`` is set.
"""

import numpy as np


def sos_power(re, im):
    n = re.shape[1]
    return (re.sum(axis=1) ** 2 + im.sum(axis=1) ** 2) / n


def sos_rotate(re, im, rot_re, rot_im):
    new_re = re * rot_re - im * rot_im
    im *= rot_re
    im += re * rot_im
    re[...] = new_re


def sinr_all(p_lin, serving, kb_frac, noise_lin):
    """Linear SINR of every (cell, beam) link of each UE, as if it were serving.

    ``p_lin`` is (U, C, B) received power on the UE's serving panel. Interference
    is the expected power of ``kb_frac`` of each other cell's beams.
    """
    per_cell = kb_frac * p_lin.sum(axis=2)  # (U, C)
    total = per_cell.sum(axis=1)  # (U,)
    denom = noise_lin + (total[:, None] - per_cell)
    return p_lin / denom[:, :, None]


def serving_sinr(p_lin, serving, beam, kb_frac, noise_lin):
    u = np.arange(p_lin.shape[0])
    per_cell = kb_frac * p_lin.sum(axis=2)
    total = per_cell.sum(axis=1)
    denom = noise_lin + total - per_cell[u, serving]
    return p_lin[u, serving, beam] / denom


def streak_update(streak, cond):
    streak += 1
    streak *= cond
