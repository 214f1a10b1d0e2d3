"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from mubound import _fallback
from mubound.curve import an_table, named_curve

try:
    from mubound import _kernels
except ImportError:
    _kernels = None


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _fallback)] + ([("cython", _kernels)] if _kernels else [])

    E = named_curve("11a")
    coeffs = np.ascontiguousarray(an_table(E, 200_000).scaled())
    cases = [
        ("qseries M=2000", lambda k: k.qseries(coeffs, 2000, 0.137, 1 / 110)),
        ("qseries M=200000", lambda k: k.qseries(coeffs, 200_000, 0.137, 1 / 11000)),
        ("count_affine p=10007", lambda k: k.count_affine(*E.ainvs, 10007)),
        ("count_affine p=100003", lambda k: k.count_affine(*E.ainvs, 100003)),
    ]
    print(f"{'kernel':<24}" + "".join(f"{name:>12}" for name, _ in backends) + "     speedup")
    for label, call in cases:
        times = [bench(lambda: call(k), args.repeat) for _, k in backends]
        row = f"{label:<24}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"   {times[0] / times[1]:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
