"""Time the compiled and pure-Python kernels on the same integrations.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import math
import time

import numpy as np

from dirac_embed._backend import available_backends
from dirac_embed.constructors import make_supercritical
from dirac_embed.potential import BoundaryAngle
from dirac_embed.prufer import integrate_direct, integrate_prufer

CASES = [
    # name, lambda of potential, lambda integrated, span
    ("locked A=2 [0,1000]", 1.0, 1.0, (0.0, 1000.0)),
    ("non-locked A=2 [0,1000]", 1.0, 2.5, (0.0, 1000.0)),
]


def _time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'case':32s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    rows = []
    for name, lam_pot, lam, span in CASES:
        pot = make_supercritical(lam_pot, 2.0, BoundaryAngle(0.3))
        rows.append((name, lambda b, pot=pot, lam=lam, span=span:
                     integrate_prufer(pot, lam, 0.3, span, backend=b)))
    pot = make_supercritical(1.0, 2.0, BoundaryAngle(0.3))
    rows.append(("direct RK4 [0,50]", lambda b: integrate_direct(
        pot, 1.0, (math.cos(0.3), math.sin(0.3)), (0.0, 50.0), backend=b)))
    for name, fn in rows:
        times = [_time(lambda: fn(b), args.repeat) for b in backends]
        speed = f"{times[-1] / times[0]:10.1f}x" if len(times) == 2 else ""
        print(f"{name:32s}" + "".join(f"{t:12.4f}" for t in times) + speed)
    # both backends must agree bit for bit
    if len(backends) == 2:
        a, b = (integrate_prufer(pot, 2.5, 0.3, (0.0, 100.0), backend=k) for k in backends)
        print("bitwise agreement:", bool(np.array_equal(a.lnR, b.lnR)))


if __name__ == "__main__":
    main()
