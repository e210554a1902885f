#!/usr/bin/env python3
"""Time the jitted kernels against the pure-Python fallback.

Each path runs in its own interpreter because SIGNEDQUBO_DISABLE_NUMBA is
read at import time. Both paths must return the same best energy.

    python3 benchmarks/bench_kernels.py [--sweeps 20] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
from signedqubo import _accel
from signedqubo.datasets import generate_planted
from signedqubo.formulations import PenaltyPolicy, build
from signedqubo.solvers import solve_brute_force, solve_pticm, solve_sa

sweeps, repeat = int(sys.argv[1]), int(sys.argv[2])
g = generate_planted((8, 12, 12), 0.2, 7)
q, enc, _ = build(g, "frustration", 4, PenaltyPolicy.uniform(50))
small, _, _ = build(generate_planted((3, 3), 0.8, 1), "frustration", 3,
                    PenaltyPolicy.degree_scaled())
cases = {
    "sa": lambda: solve_sa(q, seed=1, sweeps=sweeps * 10),
    "pticm": lambda: solve_pticm(q, seed=1, sweeps=sweeps),
    "brute_18": lambda: solve_brute_force(small),
}
out = {"numba": _accel.USE_NUMBA}
for name, fn in cases.items():
    res = fn()  # warm-up, includes compilation on the jitted path
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = fn()
        times.append(time.perf_counter() - t0)
    out[name] = {"seconds": min(times), "best_energy": res.best_energy}
print(json.dumps(out))
"""


def run_path(disable: bool, sweeps: int, repeat: int) -> dict:
    env = dict(os.environ)
    env["SIGNEDQUBO_DISABLE_NUMBA"] = "1" if disable else "0"
    proc = subprocess.run([sys.executable, "-c", CHILD, str(sweeps), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sweeps", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    fast = run_path(False, args.sweeps, args.repeat)
    slow = run_path(True, args.sweeps, args.repeat)
    if not fast["numba"]:
        print("numba unavailable; both columns use the fallback")
    print(f"{'kernel':<10} {'numba s':>10} {'python s':>10} {'speedup':>9}  energies agree")
    for name in ("sa", "pticm", "brute_18"):
        a, b = fast[name], slow[name]
        same = a["best_energy"] == b["best_energy"]
        print(f"{name:<10} {a['seconds']:>10.4f} {b['seconds']:>10.4f} "
              f"{b['seconds'] / a['seconds']:>8.1f}x  {same}")


if __name__ == "__main__":
    main()
