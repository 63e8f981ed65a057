"""Compare the compiled and pure-Python kernels.

python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from metabic.kernels import available_backends

RATES = np.array([13.7, 8.8, 7.9, -0.2])
Y0 = np.array([0.0, 0.5, 0.5, 0.0, 0.5, 0.0])
X = np.linspace(0.0, 60.0, 20000)
M = np.random.default_rng(0).standard_normal((8, 8))
M = M + M.T

CASES = {
    "j0_array(20k points)": lambda b: b.j0_array(X),
    "dicke_rk45(t=1, 2000 out)": lambda b: b.dicke_rk45(Y0, RATES, 1.0, 2000),
    "dicke_rk4(t=1, 2000 steps)": lambda b: b.dicke_rk4(Y0, RATES, 1.0, 2000),
    "jacobi_eigh(8x8)": lambda b: b.jacobi_eigh(M),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the Python backend is timed")
    print(f"{'kernel':32s}" + "".join(f"{n:>14s}" for n in backends) + "   speedup")
    for name, fn in CASES.items():
        times = {}
        for bname, mod in backends.items():
            n = 1 if bname == "python" else 10
            t = min(timeit.repeat(lambda: fn(mod), number=n, repeat=args.repeat)) / n
            times[bname] = t
        row = f"{name:32s}" + "".join(f"{times[b] * 1e3:12.3f}ms" for b in backends)
        if "compiled" in times:
            row += f"   {times['python'] / times['compiled']:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
