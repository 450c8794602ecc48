"""Compiled and numpy kernels must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from fchosim import _pykernels, kernels

ck = pytest.importorskip("fchosim._ckernels")


def test_backend_selected_at_import():
    assert kernels.BACKEND in ("cython", "python")


def test_sinr_all_matches():
    rng = np.random.default_rng(0)
    p = rng.uniform(1e-12, 1e-7, size=(30, 21, 12))
    a = _pykernels.sinr_all(p, None, 4 / 12, 1e-11)
    b = ck.sinr_all(np.ascontiguousarray(p), None, 4 / 12, 1e-11)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_serving_sinr_matches():
    rng = np.random.default_rng(1)
    p = rng.uniform(1e-12, 1e-7, size=(30, 21, 12))
    s = rng.integers(0, 21, 30)
    bm = rng.integers(0, 12, 30)
    a = _pykernels.serving_sinr(p, s, bm, 4 / 12, 1e-11)
    b = ck.serving_sinr(p, s.astype(np.int64), bm.astype(np.int64), 4 / 12, 1e-11)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_sos_kernels_match():
    rng = np.random.default_rng(2)
    re = rng.standard_normal((50, 16))
    im = rng.standard_normal((50, 16))
    w = rng.uniform(0, 0.3, (50, 16))
    rr, ri = np.cos(w), np.sin(w)
    r1, i1 = re.copy(), im.copy()
    r2, i2 = re.copy(), im.copy()
    for _ in range(100):
        _pykernels.sos_rotate(r1, i1, rr, ri)
        ck.sos_rotate(r2, i2, rr, ri)
    assert np.allclose(r1, r2, rtol=0, atol=1e-12)
    assert np.allclose(_pykernels.sos_power(r1, i1), ck.sos_power(r2, i2), rtol=1e-12)


def test_streak_update_matches():
    rng = np.random.default_rng(3)
    s1 = rng.integers(0, 5, size=(40, 21)).astype(np.int32)
    s2 = s1.copy()
    for _ in range(20):
        cond = rng.random((40, 21)) < 0.7
        _pykernels.streak_update(s1, cond.view(np.uint8))
        ck.streak_update(s2, cond.view(np.uint8))
    assert np.array_equal(s1, s2)


def test_pure_python_backend_gives_same_event_log(tmp_path):
    code = ("import sys; from fchosim.config import ScenarioConfig; "
            "from fchosim.scenario import run_scenario; from fchosim.events import events_to_text; "
            "r = run_scenario(ScenarioConfig(n_ue=12, t_sim_s=1.5, seed=4)); "
            "sys.stdout.write(events_to_text(r.events))")
    env_py = {"FCHOSIM_PURE_PYTHON": "1"}
    out_c = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                           check=True).stdout
    out_p = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                           check=True, env={**os.environ, **env_py}).stdout
    assert out_c and out_c == out_p
