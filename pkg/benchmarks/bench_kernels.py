"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--run]

``--run`` also times a short end-to-end simulation under each backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fchosim import _pykernels

try:
    from fchosim import _ckernels
except ImportError:
    _ckernels = None

# desk-scale shapes: 105 UEs x 3 panels, 21 cells, 12 beams, 16 oscillators
U, P, C, B, N_OSC = 105, 3, 21, 12, 16


def cases(rng):
    p = np.ascontiguousarray(rng.uniform(1e-12, 1e-7, size=(U * P, C, B)))
    re = rng.standard_normal((U * C * B, N_OSC))
    im = rng.standard_normal((U * C * B, N_OSC))
    w = rng.uniform(0, 0.3, (U * C * B, N_OSC))
    rot_re, rot_im = np.cos(w), np.sin(w)
    streak = np.zeros((U, C), dtype=np.int32)
    cond = (rng.random((U, C)) < 0.7).view(np.uint8)
    return {
        "sinr_all": lambda k: k.sinr_all(p, None, 4 / 12, 1e-11),
        "sos_rotate": lambda k: k.sos_rotate(re, im, rot_re, rot_im),
        "sos_power": lambda k: k.sos_power(re, im),
        "streak_update": lambda k: k.streak_update(streak, cond),
    }


def time_run(pure: bool) -> float:
    code = ("import time; from fchosim.config import ScenarioConfig; "
            "from fchosim.scenario import run_scenario; t = time.perf_counter(); "
            "run_scenario(ScenarioConfig(n_ue=105, t_sim_s=2.0, seed=1)); "
            "print(time.perf_counter() - t)")
    env = dict(os.environ)
    env.pop("FCHOSIM_PURE_PYTHON", None)
    if pure:
        env["FCHOSIM_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--run", action="store_true")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy timings are shown")
    fns = cases(np.random.default_rng(0))
    print(f"{'kernel':<14} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, fn in fns.items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<14} {t_py:10.3f} {'-':>10} {'-':>8}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<14} {t_py:10.3f} {t_c:10.3f} {t_py / t_c:7.1f}x")
    if args.run:
        t_py = time_run(True)
        t_c = time_run(False)
        print(f"{'2 s run':<14} {t_py * 1e3:10.0f} {t_c * 1e3:10.0f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
